//! Dense complex linear algebra used across the crate: pseudoinverses,
//! eigendecompositions of small non-Hermitian matrices and principal angles
//! between subspaces.

use nalgebra::{linalg::Schur, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cabs, creal, lit, CMatrix, CVector, Real, C};

/// Relative singular-value cutoff used by [`pinv`] unless a caller asks for
/// something else.
pub const DEFAULT_RCOND: f64 = 1e-10;

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.norm_sqr())
        .sqrt()
}

pub fn frobenius_real<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

pub fn vec_norm<T: Real>(v: &CVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Thin SVD `a = U Σ Vᴴ` with singular values in descending order.
pub struct Svd<T: Real> {
    pub u: CMatrix<T>,
    pub sigma: Vec<T>,
    pub v: CMatrix<T>,
}

pub fn svd<T: Real>(a: &CMatrix<T>) -> Result<Svd<T>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::Empty("matrix for SVD".into()));
    }
    let dec = a.clone().svd(true, true);
    let u = dec.u.ok_or_else(|| Error::LinAlg("SVD did not return U".into()))?;
    let v_t = dec
        .v_t
        .ok_or_else(|| Error::LinAlg("SVD did not return Vᴴ".into()))?;
    let sv: Vec<T> = dec.singular_values.iter().copied().collect();
    if sv.iter().any(|s| !s.is_finite()) {
        return Err(Error::LinAlg("non-finite singular value".into()));
    }
    // nalgebra does not guarantee ordering; sort descending.
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap());
    let v = v_t.adjoint();
    let u_sorted = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = CMatrix::from_fn(v.nrows(), order.len(), |r, c| v[(r, order[c])]);
    Ok(Svd {
        u: u_sorted,
        sigma: order.iter().map(|&i| sv[i]).collect(),
        v: v_sorted,
    })
}

/// Moore–Penrose pseudoinverse with singular values below `rcond·σ_max`
/// treated as zero.
pub fn pinv<T: Real>(a: &CMatrix<T>, rcond: T) -> Result<CMatrix<T>> {
    let s = svd(a)?;
    let smax = s.sigma.first().copied().unwrap_or_else(T::zero);
    let cutoff = rcond * smax;
    let mut out = CMatrix::zeros(a.ncols(), a.nrows());
    if smax <= T::zero() {
        return Ok(out);
    }
    for (k, &sk) in s.sigma.iter().enumerate() {
        if sk <= cutoff {
            continue;
        }
        let inv = creal(T::one() / sk);
        let vk = s.v.column(k);
        let uk = s.u.column(k);
        out += (vk * inv) * uk.adjoint();
    }
    Ok(out)
}

/// Numerical rank with the same relative cutoff convention as [`pinv`].
pub fn rank<T: Real>(a: &CMatrix<T>, rcond: T) -> Result<usize> {
    let s = svd(a)?;
    let smax = s.sigma.first().copied().unwrap_or_else(T::zero);
    Ok(s.sigma.iter().filter(|&&x| x > rcond * smax && x > T::zero()).count())
}

/// Orthonormal basis for the column space of `a`.
pub fn orth<T: Real>(a: &CMatrix<T>, rcond: T) -> Result<CMatrix<T>> {
    let s = svd(a)?;
    let smax = s.sigma.first().copied().unwrap_or_else(T::zero);
    let r = s
        .sigma
        .iter()
        .filter(|&&x| x > rcond * smax && x > T::zero())
        .count();
    Ok(s.u.columns(0, r).into_owned())
}

/// Principal angles (radians, ascending) between `range(a)` and `range(b)`.
///
/// Returns `min(rank a, rank b)` angles. Small angles are computed from
/// sines so they stay accurate down to roundoff.
pub fn principal_angles<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<Vec<T>> {
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "principal angles between {}-row and {}-row bases",
            a.nrows(),
            b.nrows()
        )));
    }
    let rc = lit::<T>(1e-12);
    let qa = orth(a, rc)?;
    let qb = orth(b, rc)?;
    let (qa, qb) = if qa.ncols() >= qb.ncols() { (qa, qb) } else { (qb, qa) };
    let k = qb.ncols();
    if k == 0 {
        return Ok(Vec::new());
    }
    let cos = svd(&(qa.adjoint() * &qb))?.sigma;
    let resid = &qb - &qa * (qa.adjoint() * &qb);
    let mut sin = svd(&resid)?.sigma;
    sin.truncate(k);
    sin.reverse();
    let mut angles: Vec<T> = (0..k)
        .map(|i| {
            let c = cos.get(i).copied().unwrap_or_else(T::zero).min(T::one());
            let s = sin.get(i).copied().unwrap_or_else(T::zero).min(T::one());
            s.atan2(c)
        })
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(angles)
}

pub fn max_principal_angle<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<T> {
    Ok(principal_angles(a, b)?
        .into_iter()
        .fold(T::zero(), |m, x| m.max(x)))
}

/// Angle between two complex lines `span{u}` and `span{v}`.
pub fn vector_angle<T: Real>(u: &CVector<T>, v: &CVector<T>) -> T {
    let nu = vec_norm(u);
    let nv = vec_norm(v);
    if nu <= T::zero() || nv <= T::zero() {
        return T::pi() / lit(2.0);
    }
    let uh = u.map(|z| z / creal(nu));
    let vh = v.map(|z| z / creal(nv));
    let proj = uh.dotc(&vh);
    let resid = &vh - &uh * proj;
    vec_norm(&resid).atan2(cabs(proj))
}

/// Eigendecomposition of a general complex square matrix via a Schur
/// factorization followed by triangular back-substitution.
///
/// Eigenvectors are returned as unit-norm columns. Fails when two
/// eigenvalues coincide to the point that back-substitution breaks down.
pub fn eig<T: Real>(a: &CMatrix<T>) -> Result<(Vec<C<T>>, CMatrix<T>)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch("eig needs a square matrix".into()));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let schur = Schur::try_new(a.clone(), lit(1e-15), 10_000)
        .ok_or_else(|| Error::LinAlg("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let lambdas: Vec<C<T>> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = lambdas.iter().fold(T::zero(), |m, z| m.max(cabs(*z)));
    let floor = lit::<T>(1e-14) * scale.max(T::one());
    let mut vecs = CMatrix::zeros(n, n);
    for k in 0..n {
        let mut x = CVector::<T>::zeros(n);
        x[k] = creal(T::one());
        for j in (0..k).rev() {
            let mut s = creal(T::zero());
            for l in (j + 1)..=k {
                s += t[(j, l)] * x[l];
            }
            let mut den = t[(j, j)] - lambdas[k];
            if cabs(den) < floor {
                den = creal(floor);
            }
            x[j] = -s / den;
        }
        let v = &q * x;
        let nv = vec_norm(&v);
        if !(nv > T::zero()) || !nv.is_finite() {
            return Err(Error::LinAlg("eigenvector back-substitution failed".into()));
        }
        vecs.set_column(k, &v.map(|z| z / creal(nv)));
    }
    Ok((lambdas, vecs))
}

/// Eigenvalues of a real matrix.
pub fn eigvals_real<T: Real>(a: &DMatrix<T>) -> Result<Vec<C<T>>> {
    Ok(eig(&a.map(creal))?.0)
}

/// Eigendecomposition of a real matrix with conjugate eigenvalues made
/// exactly conjugate and their eigenvectors chosen as conjugates of each
/// other. Real eigenvalues get real eigenvectors.
pub fn eig_real<T: Real>(a: &DMatrix<T>) -> Result<(Vec<C<T>>, CMatrix<T>)> {
    let (mut lam, mut vecs) = eig(&a.map(creal))?;
    let n = lam.len();
    let scale = lam.iter().fold(T::one(), |m, z| m.max(cabs(*z)));
    let tol = lit::<T>(1e-9) * scale;
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        done[i] = true;
        if lam[i].im.abs() <= tol {
            lam[i].im = T::zero();
            // Rotate to the real line through the largest entry.
            let v = vecs.column(i).into_owned();
            let big = v
                .iter()
                .copied()
                .max_by(|x, y| x.norm_sqr().partial_cmp(&y.norm_sqr()).unwrap())
                .unwrap();
            let rot = big.conj() / creal(cabs(big));
            let re = v.map(|z| creal((z * rot).re));
            let nr = vec_norm(&re);
            vecs.set_column(i, &re.map(|z| z / creal(nr)));
            continue;
        }
        let target = lam[i].conj();
        let j = ((i + 1)..n)
            .filter(|&j| !done[j])
            .min_by(|&x, &y| cabs(lam[x] - target).partial_cmp(&cabs(lam[y] - target)).unwrap());
        let Some(j) = j else { continue };
        if cabs(lam[j] - target) > tol {
            continue;
        }
        done[j] = true;
        let (pi, ci) = if lam[i].im > T::zero() { (i, j) } else { (j, i) };
        let avg = (lam[pi] + lam[ci].conj()).scale(lit(0.5));
        lam[pi] = avg;
        lam[ci] = avg.conj();
        let v = vecs.column(pi).into_owned();
        vecs.set_column(ci, &v.map(|z| z.conj()));
    }
    Ok((lam, vecs))
}

pub fn inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::LinAlg("matrix is singular".into()))
}

pub fn real_to_complex_vec<T: Real>(v: &DVector<T>) -> CVector<T> {
    v.map(creal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn pinv_of_identity_is_identity() {
        let i = CMatrix::<f64>::identity(4, 4);
        let p = pinv(&i, 1e-10).unwrap();
        assert!(frobenius(&(p - i)) < 1e-14);
    }

    #[test]
    fn eig_recovers_known_spectrum() {
        let d = CMatrix::<f64>::from_diagonal(&CVector::from_vec(vec![
            cplx(-0.1, 1.0),
            cplx(-0.1, -1.0),
            cplx(-0.3, 2.0),
        ]));
        let s = CMatrix::<f64>::from_fn(3, 3, |i, j| cplx((i * 3 + j) as f64 * 0.1 + if i == j { 1.0 } else { 0.0 }, 0.05 * i as f64));
        let a = &s * d * s.clone().try_inverse().unwrap();
        let (l, v) = eig(&a).unwrap();
        for k in 0..3 {
            let r = &a * v.column(k) - v.column(k) * l[k];
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
        let mut ims: Vec<f64> = l.iter().map(|z| z.im).collect();
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ims[0] + 1.0).abs() < 1e-10 && (ims[2] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn principal_angle_of_identical_spaces_is_zero() {
        let a = CMatrix::<f64>::from_fn(5, 2, |i, j| cplx((i + j) as f64, (i * j) as f64 + 1.0));
        let b = &a * CMatrix::from_fn(2, 2, |i, j| cplx(1.0 + i as f64, j as f64 - 0.5));
        let ang = max_principal_angle(&a, &b).unwrap();
        assert!(ang < 1e-12, "{ang}");
    }

    #[test]
    fn principal_angle_of_orthogonal_lines_is_right_angle() {
        let a = CMatrix::<f64>::from_column_slice(2, 1, &[cplx(1.0, 0.0), cplx(0.0, 0.0)]);
        let b = CMatrix::<f64>::from_column_slice(2, 1, &[cplx(0.0, 0.0), cplx(0.0, 3.0)]);
        let ang = max_principal_angle(&a, &b).unwrap();
        assert!((ang - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
