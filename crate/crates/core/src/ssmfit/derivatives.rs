use super::reduced::ReducedData;
use crate::error::{Error, Result};
use crate::scalar::{creal, lit, CMatrix, Real};

/// Fourth-order central differences of `xi` with sample spacing `dt`.
///
/// The first and last two columns have no centred stencil and are dropped
/// from `xi`, `times` and the returned `xi_dot` alike.
pub fn estimate_derivatives<T: Real>(reduced: &ReducedData<T>, dt: T) -> Result<ReducedData<T>> {
    let n = reduced.len();
    if n < 5 {
        return Err(Error::SignalTooShort { required: 5, got: n });
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument("sample spacing must be positive".into()));
    }
    let d = reduced.dim();
    let m = n - 4;
    let w = creal(T::one() / (lit::<T>(12.0) * dt));
    let eight = creal(lit::<T>(8.0));
    let x = &reduced.xi;
    let xi_dot = CMatrix::from_fn(d, m, |k, j| {
        let c = j + 2;
        (x[(k, c - 2)] - eight * x[(k, c - 1)] + eight * x[(k, c + 1)] - x[(k, c + 2)]) * w
    });
    Ok(ReducedData {
        xi: x.columns(2, m).into_owned(),
        xi_dot: Some(xi_dot),
        times: reduced.times[2..n - 2].to_vec(),
        q_fix: reduced.q_fix.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use nalgebra::DVector;

    fn data(f: impl Fn(f64) -> num_complex::Complex<f64>, dt: f64, n: usize) -> ReducedData<f64> {
        let times: Vec<f64> = (0..n).map(|j| j as f64 * dt).collect();
        ReducedData {
            xi: CMatrix::from_fn(1, n, |_, j| f(times[j])),
            xi_dot: None,
            times,
            q_fix: DVector::zeros(1),
        }
    }

    #[test]
    fn exponential_derivative() {
        let lam = cplx(-0.6, 0.8);
        let r = estimate_derivatives(&data(|t| (lam * t).exp(), 0.01, 200), 0.01).unwrap();
        let xd = r.xi_dot.unwrap();
        for j in 0..r.xi.ncols() {
            let expect = lam * r.xi[(0, j)];
            assert!((xd[(0, j)] - expect).norm() / expect.norm() < 1e-6);
        }
        assert!((r.times[0] - 0.02).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let r = estimate_derivatives(&data(|_| cplx(3.0, -1.0), 0.1, 10), 0.1).unwrap();
        assert!(r.xi_dot.unwrap().norm() == 0.0);
    }

    #[test]
    fn quadratic_is_exact() {
        let r = estimate_derivatives(&data(|t| cplx(t * t, 0.0), 0.25, 12), 0.25).unwrap();
        let xd = r.xi_dot.unwrap();
        for (j, t) in r.times.iter().enumerate() {
            assert!((xd[(0, j)].re - 2.0 * t).abs() < 1e-13);
        }
    }

    #[test]
    fn too_few_snapshots() {
        assert!(estimate_derivatives(&data(|t| cplx(t, 0.0), 0.1, 4), 0.1).is_err());
    }
}
