use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vandermonde::vandermonde_raw;
use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::scalar::{creal, lit, CMatrix, Real, C};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DelayCandidate<T: Real> {
    pub kappa: usize,
    pub p: usize,
    pub objective: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DelaySearch<T: Real> {
    pub best: DelayCandidate<T>,
    /// Every evaluated grid point, kappa-major.
    pub table: Vec<DelayCandidate<T>>,
}

impl<T: Real> DelaySearch<T> {
    pub fn objective_at(&self, kappa: usize, p: usize) -> Option<T> {
        self.table
            .iter()
            .find(|c| c.kappa == kappa && c.p == p)
            .map(|c| c.objective)
    }
}

/// `‖V̂ᴴ V̂ − I‖_F` with `V̂` the column-normalized Vandermonde matrix.
pub fn orthogonality_defect<T: Real>(lambdas: &[C<T>], tau: T, p: usize) -> Result<T> {
    let mut v = vandermonde_raw(lambdas, tau, p)?;
    for mut col in v.column_iter_mut() {
        let n = col.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        col.iter_mut().for_each(|z| *z /= creal(n));
    }
    let d = v.ncols();
    let gram = v.adjoint() * &v - CMatrix::<T>::identity(d, d);
    Ok(frobenius(&gram))
}

// Objectives this close are considered tied and fall through to the window
// tie-break.
const TIE_RTOL: f64 = 1e-12;

fn better<T: Real>(a: &DelayCandidate<T>, b: &DelayCandidate<T>) -> bool {
    let tol = lit::<T>(TIE_RTOL) * a.objective.abs().max(b.objective.abs()).max(T::one());
    if a.objective < b.objective - tol {
        return true;
    }
    if a.objective > b.objective + tol {
        return false;
    }
    (a.p * a.kappa, a.kappa) < (b.p * b.kappa, b.kappa)
}

/// Brute-force minimization of the Vandermonde orthogonality defect over an
/// integer grid of timelag multipliers and embedding dimensions.
///
/// Ties are broken by the smallest total window `p·kappa`, then the smallest
/// `kappa`. Grid points are evaluated in parallel; the reduction runs in grid
/// order so the result does not depend on scheduling.
pub fn optimize_delays<T: Real>(
    lambdas: &[C<T>],
    dt: T,
    kappa_range: RangeInclusive<usize>,
    p_range: RangeInclusive<usize>,
) -> Result<DelaySearch<T>> {
    if lambdas.is_empty() {
        return Err(Error::Empty("eigenvalue list".into()));
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidConfig("dt must be positive".into()));
    }
    let d = lambdas.len();
    let kappa_lo = (*kappa_range.start()).max(1);
    let kappas: Vec<usize> = (kappa_lo..=*kappa_range.end()).collect();
    let ps: Vec<usize> = p_range.clone().collect();
    if kappas.is_empty() || ps.is_empty() {
        return Err(Error::Empty("delay search grid".into()));
    }
    if *p_range.start() < d {
        return Err(Error::InvalidArgument(format!(
            "smallest embedding dimension {} is below the number of modes {}",
            p_range.start(),
            d
        )));
    }
    let grid: Vec<(usize, usize)> = kappas
        .iter()
        .flat_map(|&k| ps.iter().map(move |&p| (k, p)))
        .collect();
    let table: Vec<DelayCandidate<T>> = grid
        .par_iter()
        .map(|&(kappa, p)| {
            let tau = T::from_usize(kappa).unwrap() * dt;
            orthogonality_defect(lambdas, tau, p).map(|objective| DelayCandidate {
                kappa,
                p,
                objective,
            })
        })
        .collect::<Result<_>>()?;
    let best = table
        .iter()
        .copied()
        .reduce(|acc, c| if better(&c, &acc) { c } else { acc })
        .expect("non-empty grid");
    Ok(DelaySearch { best, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn single_mode_is_always_orthonormal() {
        let r = optimize_delays::<f64>(&[cplx(-0.3, 0.0)], 0.1, 1..=4, 2..=6).unwrap();
        assert!(r.table.iter().all(|c| c.objective.abs() < 1e-14));
        assert_eq!((r.best.kappa, r.best.p), (1, 2));
    }

    #[test]
    fn matches_exhaustive_evaluation() {
        let lam = [cplx(0.0, 1.0), cplx(0.0, -1.0)];
        let dt = 0.1;
        let r = optimize_delays(&lam, dt, 1..=6, 2..=9).unwrap();
        // Independent evaluation: closed-form Gram entries of normalized
        // Vandermonde columns.
        let mut best = (f64::INFINITY, 0usize, 0usize);
        for kappa in 1..=6usize {
            for p in 2..=9usize {
                let tau = kappa as f64 * dt;
                let mut g = cplx(0.0, 0.0);
                for j in 0..p {
                    // conj(e^{i j τ}) · e^{-i j τ} = e^{-2 i j τ}
                    g += cplx(0.0, -2.0 * j as f64 * tau).exp();
                }
                let off = g.norm() / p as f64;
                let obj = (2.0 * off * off).sqrt();
                let got = r.objective_at(kappa, p).unwrap();
                assert!((got - obj).abs() < 1e-12, "kappa {kappa} p {p}: {got} vs {obj}");
                if obj < best.0 - 1e-12 || ((obj - best.0).abs() <= 1e-12 && (p * kappa, kappa) < (best.2 * best.1, best.1)) {
                    best = (obj, kappa, p);
                }
            }
        }
        assert_eq!((r.best.kappa, r.best.p), (best.1, best.2));
    }

    #[test]
    fn empty_grid_is_an_error() {
        #[allow(clippy::reversed_empty_ranges)]
        let e = optimize_delays(&[cplx(-1.0, 0.0)], 0.1, 3..=2, 1..=4);
        assert!(e.is_err());
    }
}
