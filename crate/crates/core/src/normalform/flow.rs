use nalgebra::DVector;

use super::compute::NormalForm;
use crate::bench::{dopri5, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::vec_norm;
use crate::polyalg::PolyMap;
use crate::scalar::{cplx, lit, to_f64, CMatrix, CVector, Real, C};

/// Integrates `ζ̇ = N(ζ)` in complex coordinates; column `j` of the result
/// is `ζ(times[j])`. Default relative tolerance `1e-9`.
pub fn integrate_nf<T: Real>(n: &PolyMap<T>, zeta0: &[C<T>], times: &[T], rtol: Option<T>) -> Result<CMatrix<T>> {
    let d = n.dim();
    if zeta0.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "initial condition has {} entries, normal form has {d}",
            zeta0.len()
        )));
    }
    let mut x0 = DVector::zeros(2 * d);
    for k in 0..d {
        x0[k] = zeta0[k].re;
        x0[d + k] = zeta0[k].im;
    }
    let mut z = vec![cplx(T::zero(), T::zero()); d];
    let f = |_: T, x: &DVector<T>| {
        for k in 0..d {
            z[k] = cplx(x[k], x[d + k]);
        }
        let v = n.eval(&z).expect("dimension checked");
        DVector::from_iterator(2 * d, v.iter().map(|c| c.re).chain(v.iter().map(|c| c.im)))
    };
    let tol = Tolerances::with_rtol(rtol.unwrap_or_else(|| lit(1e-9)));
    let states = dopri5(f, &x0, times, tol)?;
    Ok(CMatrix::from_fn(d, times.len(), |k, j| cplx(states[j][k], states[j][d + k])))
}

/// Solves `ξ = W·H(ζ)` for `ζ`.
///
/// Runs the fixed-point iteration `ζ ← η − H_{≥2}(ζ)` with `η = W⁻¹ξ`
/// and switches to Newton's method once half of `max_iter` steps failed to
/// contract. The answer must satisfy `‖ξ − W·H(ζ)‖ ≤ tol·‖ξ‖` and keep the
/// nonlinear part of `H` smaller than the linear one.
pub fn invert_transform<T: Real>(nf: &NormalForm<T>, xi: &CVector<T>, tol: T, max_iter: usize) -> Result<CVector<T>> {
    let d = nf.dim();
    if xi.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "reduced point has {} entries, normal form has {d}",
            xi.len()
        )));
    }
    let scale = vec_norm(xi);
    if scale == T::zero() {
        return Ok(CVector::zeros(d));
    }
    let eta = &nf.modal_basis_inv * xi;
    let residual = |z: &CVector<T>| -> Result<T> { Ok(vec_norm(&(xi - nf.to_reduced(z.as_slice())?))) };
    let target = tol * scale;
    let mut zeta = eta.clone();
    let mut best = (residual(&zeta)?, zeta.clone());
    let mut stalled = 0usize;
    let half = (max_iter / 2).max(1);
    let mut iters = 0usize;
    while best.0 > target && stalled < half && iters < max_iter {
        iters += 1;
        let hz = nf.h.eval(zeta.as_slice())?;
        // H has identity linear part: H(ζ) − ζ is the nonlinear remainder.
        zeta = &eta - (hz - &zeta);
        let r = residual(&zeta)?;
        if !r.is_finite() {
            break;
        }
        if r < best.0 {
            if r > best.0 * lit(0.9) {
                stalled += 1;
            } else {
                stalled = 0;
            }
            best = (r, zeta.clone());
        } else {
            stalled += 1;
        }
    }
    if best.0 > target {
        zeta = best.1.clone();
        for _ in 0..half {
            let jac = &nf.modal_basis * nf.h.jacobian(zeta.as_slice())?;
            let rhs = xi - nf.to_reduced(zeta.as_slice())?;
            let Some(step) = jac.lu().solve(&rhs) else { break };
            zeta += step;
            let r = residual(&zeta)?;
            if !r.is_finite() {
                break;
            }
            if r < best.0 {
                best = (r, zeta.clone());
            }
            if r <= target {
                break;
            }
        }
    }
    if !(best.0 <= target) {
        return Err(Error::OutsideValidityRadius(format!(
            "transform inversion stalled at relative residual {:.3e}",
            to_f64(best.0 / scale)
        )));
    }
    let z = best.1;
    let nonlinear = vec_norm(&(nf.h.eval(z.as_slice())? - &z));
    if nonlinear >= vec_norm(&z) {
        return Err(Error::OutsideValidityRadius(format!(
            "nonlinear part of the transform dominates at |ζ| = {:.3e}",
            to_f64(vec_norm(&z))
        )));
    }
    Ok(z)
}
