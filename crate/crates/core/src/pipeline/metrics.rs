use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Normalized mean trajectory error: the mean over snapshots of
/// `‖ŷ_j − y_j‖` divided by `max_j ‖y_j‖` (columns are snapshots).
pub fn nmte<T: Real>(truth: &DMatrix<T>, pred: &DMatrix<T>) -> Result<T> {
    if truth.shape() != pred.shape() {
        return Err(Error::DimensionMismatch(format!(
            "truth is {:?}, prediction is {:?}",
            truth.shape(),
            pred.shape()
        )));
    }
    let n = truth.ncols();
    if n == 0 {
        return Err(Error::Empty("trajectory".into()));
    }
    let peak = truth.column_iter().map(|c| c.norm()).fold(T::zero(), |a, b| a.max(b));
    if !(peak > T::zero()) {
        return Err(Error::InvalidArgument("NMTE undefined for an all-zero reference".into()));
    }
    let total = truth
        .column_iter()
        .zip(pred.column_iter())
        .fold(T::zero(), |a, (t, p)| a + (p - t).norm());
    Ok(total / (T::from_usize(n).unwrap() * peak))
}

/// Per-trajectory mean and pooled NMTE over several trajectories. The
/// pooled value normalizes by the peak over all of them.
pub fn nmte_summary<T: Real>(pairs: &[(DMatrix<T>, DMatrix<T>)]) -> Result<(T, T)> {
    if pairs.is_empty() {
        return Err(Error::Empty("no trajectories".into()));
    }
    let mut mean = T::zero();
    let mut err = T::zero();
    let mut count = 0usize;
    let mut peak = T::zero();
    for (t, p) in pairs {
        mean += nmte(t, p)?;
        for (a, b) in t.column_iter().zip(p.column_iter()) {
            err += (b - a).norm();
            peak = peak.max(a.norm());
        }
        count += t.ncols();
    }
    let k = T::from_usize(pairs.len()).unwrap();
    Ok((mean / k, err / (T::from_usize(count).unwrap() * peak)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_is_zero() {
        let a = DMatrix::from_fn(2, 5, |i, j| (i + j) as f64);
        assert_eq!(nmte(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn zero_prediction() {
        // Norms 0, 2, 1, 1: peak 2, mean 1.
        let t = DMatrix::from_row_slice(1, 4, &[0.0, 2.0, -1.0, 1.0]);
        assert_eq!(nmte(&t, &DMatrix::zeros(1, 4)).unwrap(), 0.5);
        assert!(nmte(&DMatrix::<f64>::zeros(1, 4), &t).is_err());
    }
}
