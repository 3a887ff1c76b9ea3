use rand::Rng;

use super::compute::NormalForm;
use crate::error::{Error, Result};
use crate::linalg::vec_norm;
use crate::polyalg::PolyMap;
use crate::scalar::{cexp, cplx, creal, lit, CVector, Real, C};

/// Order-`≤ order` part of `s ↦ f(s·ζ)`, extracted by a discrete Fourier
/// transform over `m` points on the unit circle (`m` must exceed the
/// polynomial degree of `f` to avoid aliasing).
pub fn truncate_along_ray<T: Real>(
    f: impl Fn(&[C<T>]) -> Result<CVector<T>>,
    zeta: &[C<T>],
    order: u32,
    m: usize,
) -> Result<CVector<T>> {
    let tau = T::two_pi();
    let mut coeffs: Vec<Option<CVector<T>>> = vec![None; order as usize + 1];
    let inv_m = creal(T::one() / T::from_usize(m).unwrap());
    for j in 0..m {
        let ang = tau * T::from_usize(j).unwrap() / T::from_usize(m).unwrap();
        let s = cexp(cplx(T::zero(), ang));
        let point: Vec<C<T>> = zeta.iter().map(|&z| z * s).collect();
        let v = f(&point)?;
        for (o, slot) in coeffs.iter_mut().enumerate() {
            let w = cexp(cplx(T::zero(), -ang * T::from_usize(o).unwrap())) * inv_m;
            let term = v.map(|x| x * w);
            match slot {
                Some(acc) => *acc += term,
                None => *slot = Some(term),
            }
        }
    }
    let mut out = coeffs[0].take().unwrap_or_else(|| CVector::zeros(0));
    for c in coeffs.into_iter().skip(1).flatten() {
        out += c;
    }
    Ok(out)
}

/// Largest `‖[D(WH)(ζ)·N(ζ) − G(W·H(ζ))]_{≤h}‖ / ‖ζ‖²` over `samples`
/// random points with `‖ζ‖ ≤ radius`, evaluated pointwise without any
/// series arithmetic.
pub fn conjugacy_residual<T: Real, R: Rng>(
    nf: &NormalForm<T>,
    g: &PolyMap<T>,
    samples: usize,
    radius: T,
    rng: &mut R,
) -> Result<T> {
    let d = nf.dim();
    if g.dim() != d || g.n_out() != d {
        return Err(Error::DimensionMismatch("dynamics map does not match the normal form".into()));
    }
    let h = nf.order;
    let degree = (g.basis().l_max() * h).max(2 * h);
    let m = degree as usize + 2;
    let mut worst = T::zero();
    for _ in 0..samples {
        let mut z: Vec<C<T>> = (0..d)
            .map(|_| cplx(lit::<T>(rng.random_range(-1.0..1.0)), lit::<T>(rng.random_range(-1.0..1.0))))
            .collect();
        let nz = vec_norm(&CVector::from_vec(z.clone()));
        let r = radius * lit::<T>(rng.random_range(0.05..1.0));
        for x in &mut z {
            *x *= creal(r / nz);
        }
        let f = |p: &[C<T>]| -> Result<CVector<T>> {
            let lhs = &nf.modal_basis * (nf.h.jacobian(p)? * nf.n.eval(p)?);
            let rhs = g.eval_vec(&nf.to_reduced(p)?)?;
            Ok(lhs - rhs)
        };
        let res = truncate_along_ray(f, &z, h, m)?;
        let nz = vec_norm(&CVector::from_vec(z.clone()));
        worst = worst.max(vec_norm(&res) / (nz * nz));
    }
    Ok(worst)
}
