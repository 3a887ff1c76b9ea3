//! Brute-force numerical checks of the delay-embedding tangent-space
//! results: sampling-map Jacobians, linearized embedded flows and tangent
//! spaces estimated from data.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::integrate::{dopri5, Tolerances};
use super::system::OdeSystem;
use crate::embedding::{tangent_basis, DelayConfig, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::{eig, inverse, pinv, svd, DEFAULT_RCOND};
use crate::polyalg::{MonomialBasis, PolyMap};
use crate::scalar::{cabs, cplx, creal, lit, real_part, to_complex_matrix, CMatrix, Real, C};

/// Real polynomial observable `x ↦ μ(x)` with `q` channels, stored as a
/// [`PolyMap`] with zero imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T: Real> {
    pub map: PolyMap<T>,
}

impl<T: Real> Observable<T> {
    pub fn linear(c: &DMatrix<T>) -> Self {
        let basis = MonomialBasis::new(c.ncols(), 1, 1).expect("valid basis");
        Self {
            map: PolyMap::new(to_complex_matrix(c), basis).expect("shapes agree"),
        }
    }

    pub fn channels(&self) -> usize {
        self.map.n_out()
    }

    pub fn eval(&self, x: &DVector<T>) -> DVector<T> {
        let z: Vec<C<T>> = x.iter().map(|&v| creal(v)).collect();
        self.map.eval(&z).expect("state dimension").map(|z| z.re)
    }

    pub fn gradient(&self, x: &DVector<T>) -> DMatrix<T> {
        let z: Vec<C<T>> = x.iter().map(|&v| creal(v)).collect();
        real_part(&self.map.jacobian(&z).expect("state dimension"))
    }
}

/// Random observable `C x + Σ quadratic terms` with entries of `C` uniform
/// in `[-1, 1]` and quadratic coefficients scaled by `quad`.
pub fn random_observable<T: Real, R: Rng>(rng: &mut R, n: usize, q: usize, quad: f64) -> Observable<T> {
    let basis = MonomialBasis::new(n, 1, 2).expect("valid basis");
    let coeffs = CMatrix::from_fn(q, basis.len(), |_, t| {
        let s = if basis.degree(t) == 1 { 1.0 } else { quad };
        creal(lit(s * rng.random_range(-1.0..1.0)))
    });
    Observable {
        map: PolyMap::new(coeffs, basis).expect("shapes agree"),
    }
}

/// Random real linear system with `n/2` underdamped pairs (n even) and
/// distinct eigenvalues, `A = P·blockdiag((a, b), (−b, a))·P⁻¹` for a random
/// well-conditioned `P`.
pub fn random_stable_system<T: Real, R: Rng>(rng: &mut R, n: usize) -> Result<OdeSystem<T>> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidArgument("random systems need an even, positive dimension".into()));
    }
    let pairs = n / 2;
    let mut block = DMatrix::<f64>::zeros(n, n);
    let mut used: Vec<(f64, f64)> = Vec::new();
    for k in 0..pairs {
        let (a, b) = loop {
            let a = -rng.random_range(0.01..0.5);
            let b = rng.random_range(0.5..4.0);
            if used.iter().all(|&(ua, ub)| (ua - a).abs() + (ub - b).abs() > 0.05) {
                break (a, b);
            }
        };
        used.push((a, b));
        block[(2 * k, 2 * k)] = a;
        block[(2 * k, 2 * k + 1)] = b;
        block[(2 * k + 1, 2 * k)] = -b;
        block[(2 * k + 1, 2 * k + 1)] = a;
    }
    let p = loop {
        let p = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let s = p.clone().svd(false, false).singular_values;
        if s.min() > 0.2 * s.max() {
            break p;
        }
    };
    let a = &p * block * p.clone().try_inverse().expect("conditioned");
    OdeSystem::linear(a.map(lit), format!("random stable linear system, n = {n}"))
}

/// `e^{A t}` for a real matrix.
pub fn expm<T: Real>(a: &DMatrix<T>, t: T) -> DMatrix<T> {
    (a * t).exp()
}

/// Exact samples of a linear flow at `t = j·dt`, `j = 0..n`.
pub fn simulate_linear<T: Real>(a: &DMatrix<T>, x0: &DVector<T>, dt: T, n: usize) -> DMatrix<T> {
    let step = expm(a, dt);
    let mut out = DMatrix::zeros(x0.len(), n);
    let mut x = x0.clone();
    for j in 0..n {
        out.set_column(j, &x);
        x = &step * x;
    }
    out
}

fn flow_samples<T: Real>(system: &OdeSystem<T>, x0: &DVector<T>, config: &DelayConfig<T>) -> Result<Vec<DVector<T>>> {
    let tau = config.tau();
    if system.g.is_none() {
        let step = expm(&system.a, tau);
        let mut out = Vec::with_capacity(config.p);
        let mut x = x0.clone();
        for _ in 0..config.p {
            out.push(x.clone());
            x = &step * x;
        }
        return Ok(out);
    }
    let times: Vec<T> = (0..config.p).map(|j| T::from_usize(j).unwrap() * tau).collect();
    let tol = Tolerances {
        rtol: lit(1e-13),
        atol: lit(1e-22),
        max_steps: 10_000_000,
    };
    dopri5(|_, x| system.rhs(x), x0, &times, tol)
}

/// Delay map `Ψ(x) = (μ(x), μ(φ^τ x), …, μ(φ^{(p−1)τ} x))`, channel-major.
pub fn sampling_map<T: Real>(
    system: &OdeSystem<T>,
    observable: &Observable<T>,
    config: &DelayConfig<T>,
    x: &DVector<T>,
) -> Result<DVector<T>> {
    let p = config.p;
    let q = observable.channels();
    let states = flow_samples(system, x, config)?;
    let mut y = DVector::zeros(p * q);
    for (j, s) in states.iter().enumerate() {
        let m = observable.eval(s);
        for l in 0..q {
            y[l * p + j] = m[l];
        }
    }
    Ok(y)
}

/// Time derivative of [`sampling_map`] along the flow through `x`.
fn sampling_velocity<T: Real>(
    system: &OdeSystem<T>,
    observable: &Observable<T>,
    config: &DelayConfig<T>,
    x: &DVector<T>,
) -> Result<DVector<T>> {
    let p = config.p;
    let q = observable.channels();
    let states = flow_samples(system, x, config)?;
    let mut y = DVector::zeros(p * q);
    for (j, s) in states.iter().enumerate() {
        let m = observable.gradient(s) * system.rhs(s);
        for l in 0..q {
            y[l * p + j] = m[l];
        }
    }
    Ok(y)
}

/// Central-difference Jacobian `DΨ(0)` (`p·q × n`).
pub fn sampling_map_jacobian<T: Real>(
    system: &OdeSystem<T>,
    observable: &Observable<T>,
    config: &DelayConfig<T>,
    eps: T,
) -> Result<DMatrix<T>> {
    let n = system.dim();
    let mut jac = DMatrix::zeros(config.p * observable.channels(), n);
    let two = lit::<T>(2.0);
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = eps;
        let plus = sampling_map(system, observable, config, &e)?;
        let minus = sampling_map(system, observable, config, &(-e))?;
        jac.set_column(i, &((plus - minus) / (two * eps)));
    }
    Ok(jac)
}

/// `DΨ(0)` predicted from the spectrum of `A`: `T_all · W⁻¹` with `W` the
/// eigenvectors of `A` and `T_all` the tangent basis over all modes with
/// mode shapes `Dμ(0)·w_k`.
pub fn predicted_sampling_jacobian<T: Real>(
    system: &OdeSystem<T>,
    observable: &Observable<T>,
    config: &DelayConfig<T>,
) -> Result<DMatrix<T>> {
    let (lam, w) = system.linear_spectrum()?;
    let grad = to_complex_matrix(&observable.gradient(&DVector::zeros(system.dim())));
    let shapes = &grad * &w;
    let spectrum = Spectrum::new(lam, Some(shapes))?;
    let t = tangent_basis(&spectrum, config)?;
    Ok(real_part(&(t.matrix * inverse(&w)?)))
}

/// Numerical linearization of the delay-embedded flow at the fixed point,
/// restricted to the image of a spectral subspace.
#[derive(Debug, Clone)]
pub struct EmbeddedLinearization<T: Real> {
    /// Embedded images of the probe directions, `(Ψ(εδ) − Ψ(−εδ))/2ε`.
    pub tangent: DMatrix<T>,
    /// Matching embedded velocities.
    pub velocity: DMatrix<T>,
    /// Eigenvalues of the restricted linear map.
    pub eigenvalues: Vec<C<T>>,
    /// Embedded eigenvectors (`p·q × d`).
    pub eigenvectors: CMatrix<T>,
    /// The restricted map in the coordinates of the tangent basis `T`:
    /// `(T†K)(T†J)⁻¹`.
    pub in_basis: CMatrix<T>,
    /// Singular values of `tangent`, descending.
    pub tangent_singular_values: Vec<T>,
}

/// Linearizes the embedded flow `ẏ = DΨ(x)·f(x)` by central differences
/// along the real spectral subspace spanned by the eigenvectors of `A`
/// closest to `slow`.
pub fn linearize_embedded_flow<T: Real>(
    system: &OdeSystem<T>,
    observable: &Observable<T>,
    config: &DelayConfig<T>,
    slow: &[C<T>],
    eps: T,
) -> Result<EmbeddedLinearization<T>> {
    let (lam, w) = system.linear_spectrum()?;
    let mut picked = Vec::new();
    for s in slow {
        let k = (0..lam.len())
            .min_by(|&a, &b| cabs(lam[a] - *s).partial_cmp(&cabs(lam[b] - *s)).unwrap())
            .ok_or_else(|| Error::Empty("system spectrum".into()))?;
        picked.push(k);
    }
    let slow_lam: Vec<C<T>> = picked.iter().map(|&k| lam[k]).collect();
    let spectrum = if observable.channels() == 1 {
        Spectrum::scalar(slow_lam)?
    } else {
        let grad = to_complex_matrix(&observable.gradient(&DVector::zeros(system.dim())));
        let shapes = CMatrix::from_fn(grad.nrows(), picked.len(), |i, k| (grad.row(i) * w.column(picked[k]))[0]);
        Spectrum::new(slow_lam, Some(shapes))?
    };
    // Real basis of the subspace: Re/Im of one member per pair, Re of reals.
    let mut dirs: Vec<DVector<T>> = Vec::new();
    for g in spectrum.groups() {
        let v = w.column(picked[g.lead()]).into_owned();
        match g {
            crate::embedding::ModeGroup::Pair { .. } => {
                dirs.push(v.map(|z| z.re));
                dirs.push(v.map(|z| z.im));
            }
            _ => dirs.push(v.map(|z| z.re)),
        }
    }
    let d = dirs.len();
    let rows = config.p * observable.channels();
    let mut jm = DMatrix::zeros(rows, d);
    let mut km = DMatrix::zeros(rows, d);
    let two = lit::<T>(2.0);
    for (i, dir) in dirs.iter().enumerate() {
        let dir = dir.normalize() * eps;
        let minus = -dir.clone();
        let yp = sampling_map(system, observable, config, &dir)?;
        let ym = sampling_map(system, observable, config, &minus)?;
        let vp = sampling_velocity(system, observable, config, &dir)?;
        let vm = sampling_velocity(system, observable, config, &minus)?;
        jm.set_column(i, &((yp - ym) / (two * eps)));
        km.set_column(i, &((vp - vm) / (two * eps)));
    }
    let jc = to_complex_matrix(&jm);
    let kc = to_complex_matrix(&km);
    let sv = svd(&jc)?.sigma;
    // Restricted map in probe coordinates: R = J†K.
    let r = pinv(&jc, lit(DEFAULT_RCOND))? * &kc;
    let (ev, evec) = eig(&r)?;
    let eigenvectors = &jc * evec;
    let basis = tangent_basis(&spectrum, config)?;
    let tp = pinv(&basis.matrix, lit(DEFAULT_RCOND))?;
    let in_basis = (&tp * &kc) * pinv(&(&tp * &jc), lit(DEFAULT_RCOND))?;
    Ok(EmbeddedLinearization {
        tangent: jm,
        velocity: km,
        eigenvalues: ev,
        eigenvectors,
        in_basis,
        tangent_singular_values: sv,
    })
}

/// Span of the `d` leading left singular vectors of `Y − q_fix·1ᵀ`.
pub fn estimate_tangent_space<T: Real>(y: &DMatrix<T>, q_fix: Option<&DVector<T>>, d: usize) -> Result<CMatrix<T>> {
    let mut c = y.clone();
    if let Some(q) = q_fix {
        for mut col in c.column_iter_mut() {
            col -= q;
        }
    }
    let s = svd(&to_complex_matrix(&c))?;
    if s.u.ncols() < d {
        return Err(Error::InvalidArgument(format!("data has rank below {d}")));
    }
    Ok(s.u.columns(0, d).into_owned())
}

/// Real point in the spectral subspace of the modes closest to `slow`,
/// `Σ_k Re(c_k v_k)` with random unit-modulus `c_k` scaled by `amplitude`.
pub fn random_subspace_point<T: Real, R: Rng>(
    rng: &mut R,
    system: &OdeSystem<T>,
    slow: &[C<T>],
    amplitude: T,
) -> Result<DVector<T>> {
    let (lam, w) = system.linear_spectrum()?;
    let mut x = DVector::zeros(system.dim());
    for s in slow.iter().filter(|s| s.im >= T::zero()) {
        let k = (0..lam.len())
            .min_by(|&a, &b| cabs(lam[a] - *s).partial_cmp(&cabs(lam[b] - *s)).unwrap())
            .unwrap();
        let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let c = cplx(lit::<T>(phi.cos()), lit::<T>(phi.sin()));
        x += w.column(k).map(|z| (z * c).re);
    }
    let nx = x.norm();
    Ok(if nx > T::zero() { x * (amplitude / nx) } else { x })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_principal_angle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expm_of_rotation() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let e = expm(&a, std::f64::consts::FRAC_PI_2);
        assert!((e - DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn sampling_jacobian_matches_prediction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sys = random_stable_system::<f64, _>(&mut rng, 4).unwrap();
        let obs = random_observable(&mut rng, 4, 2, 0.3);
        let cfg = DelayConfig::new(3, 0.07, 5).unwrap();
        let num = sampling_map_jacobian(&sys, &obs, &cfg, 1e-4).unwrap();
        let pred = predicted_sampling_jacobian(&sys, &obs, &cfg).unwrap();
        assert!((num - &pred).norm() / pred.norm() < 1e-8);
    }

    #[test]
    fn linear_tangent_space_is_vandermonde() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let sys = random_stable_system::<f64, _>(&mut rng, 4).unwrap();
        let (lam, _) = sys.linear_spectrum().unwrap();
        let slow: Vec<_> = lam.iter().copied().filter(|z| z.re > -0.6).take(2).collect();
        let obs = Observable::linear(&DMatrix::from_fn(1, 4, |_, _| rng.random_range(-1.0..1.0)));
        let x0 = random_subspace_point(&mut rng, &sys, &slow, 1e-3).unwrap();
        let states = simulate_linear(&sys.a, &x0, 0.1, 200);
        let signal = DMatrix::from_fn(1, 200, |_, j| obs.eval(&states.column(j).into_owned())[0]);
        let cfg = DelayConfig::new(2, 0.1, 6).unwrap();
        let y = crate::embedding::hankel_embed(&signal, &cfg).unwrap();
        let est = estimate_tangent_space(&y, None, 2).unwrap();
        let v = crate::embedding::vandermonde(&Spectrum::scalar(slow).unwrap(), &cfg).unwrap();
        assert!(max_principal_angle(&est, &v).unwrap() < 1e-6);
    }
}
