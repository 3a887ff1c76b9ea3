use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

/// Tolerances and limits for [`dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T: Real> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-10),
            atol: lit(1e-13),
            max_steps: 5_000_000,
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn with_rtol(rtol: T) -> Self {
        Self {
            rtol,
            atol: rtol * lit(1e-3),
            ..Self::default()
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the 5th- and embedded 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<T: Real>(y: &DVector<T>, h: T, terms: &[(f64, &DVector<T>)]) -> DVector<T> {
    let mut out = y.clone();
    for (c, k) in terms {
        out.axpy(h * lit::<T>(*c), k, T::one());
    }
    out
}

/// Dormand–Prince 5(4) integration of `ẋ = f(t, x)` from `times[0]`,
/// reporting the state at every entry of `times` (ascending).
///
/// Steps are clipped so that output times are hit exactly.
pub fn dopri5<T, F>(mut f: F, x0: &DVector<T>, times: &[T], tol: Tolerances<T>) -> Result<Vec<DVector<T>>>
where
    T: Real,
    F: FnMut(T, &DVector<T>) -> DVector<T>,
{
    let Some(&t0) = times.first() else {
        return Ok(Vec::new());
    };
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("output times must be ascending".into()));
    }
    let mut out = Vec::with_capacity(times.len());
    out.push(x0.clone());
    let mut t = t0;
    let mut x = x0.clone();
    let mut k1 = f(t, &x);
    let span = *times.last().unwrap() - t0;
    let mut h = initial_step(&x, &k1, tol, span);
    let mut steps = 0usize;
    let safety = lit::<T>(0.9);
    for &target in &times[1..] {
        while t < target {
            steps += 1;
            if steps > tol.max_steps {
                return Err(Error::StepUnderflow(to_f64(t)));
            }
            let remaining = target - t;
            let clipped = h >= remaining;
            let step = if clipped { remaining } else { h };
            let k2 = f(t + step * lit(C2), &axpy(&x, step, &[(A21, &k1)]));
            let k3 = f(t + step * lit(C3), &axpy(&x, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + step * lit(C4), &axpy(&x, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + step * lit(C5),
                &axpy(&x, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + step,
                &axpy(&x, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let x_new = axpy(&x, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + step, &x_new);
            let mut err = T::zero();
            for i in 0..x.len() {
                let e = step
                    * (lit::<T>(E1) * k1[i]
                        + lit::<T>(E3) * k3[i]
                        + lit::<T>(E4) * k4[i]
                        + lit::<T>(E5) * k5[i]
                        + lit::<T>(E6) * k6[i]
                        + lit::<T>(E7) * k7[i]);
                let sc = tol.atol + tol.rtol * x[i].abs().max(x_new[i].abs());
                err = err.max(e.abs() / sc);
            }
            if !err.is_finite() {
                return Err(Error::StepUnderflow(to_f64(t)));
            }
            let factor = if err == T::zero() {
                lit(5.0)
            } else {
                (safety * err.powf(lit(-0.2))).max(lit(0.2)).min(lit(5.0))
            };
            if err <= T::one() {
                t = if clipped { target } else { t + step };
                x = x_new;
                k1 = k7;
                // A clipped step says nothing about the natural step size.
                if !clipped || factor < T::one() {
                    h = step * factor;
                }
            } else {
                h = step * factor.min(T::one());
            }
            let floor = lit::<T>(1e-14) * t.abs().max(span.abs()).max(T::one());
            if h < floor {
                return Err(Error::StepUnderflow(to_f64(t)));
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

fn initial_step<T: Real>(x: &DVector<T>, dx: &DVector<T>, tol: Tolerances<T>, span: T) -> T {
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..x.len() {
        let sc = tol.atol + tol.rtol * x[i].abs();
        d0 = d0.max(x[i].abs() / sc);
        d1 = d1.max(dx[i].abs() / sc);
    }
    let h = if d0 < lit(1e-5) || d1 < lit(1e-5) {
        lit(1e-6)
    } else {
        lit::<T>(0.01) * d0 / d1
    };
    let span = if span > T::zero() { span } else { T::one() };
    h.min(span).max(lit::<T>(1e-12) * span)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let xs = dopri5(|_, x| -x, &DVector::from_element(1, 1.0), &times, Tolerances::default()).unwrap();
        assert!((xs[10][0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_energy_is_conserved() {
        let period = 2.0 * std::f64::consts::PI;
        let times: Vec<f64> = (0..=1000).map(|i| i as f64 * period / 10.0).collect();
        let f = |_: f64, x: &DVector<f64>| DVector::from_vec(vec![x[1], -x[0]]);
        let xs = dopri5(f, &DVector::from_vec(vec![1.0, 0.0]), &times, Tolerances::default()).unwrap();
        let e = |x: &DVector<f64>| 0.5 * (x[0] * x[0] + x[1] * x[1]);
        assert!(((e(xs.last().unwrap()) - 0.5) / 0.5).abs() < 1e-6);
    }

    #[test]
    fn equilibrium_stays_put() {
        let times: Vec<f64> = (0..=5).map(|i| i as f64).collect();
        let xs = dopri5(|_, x| -x * 3.0, &DVector::zeros(2), &times, Tolerances::default()).unwrap();
        assert!(xs.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let times = [0.0, 5.0];
        let exact = (-5.0f64).exp();
        let mut last = f64::INFINITY;
        for rtol in [1e-4, 1e-6, 1e-8, 1e-10] {
            let xs = dopri5(|_, x| -x, &DVector::from_element(1, 1.0), &times, Tolerances::with_rtol(rtol)).unwrap();
            let e = (xs[1][0] - exact).abs();
            assert!(e <= last);
            last = e;
        }
    }
}
