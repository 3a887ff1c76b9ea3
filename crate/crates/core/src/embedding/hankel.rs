use nalgebra::DMatrix;

use super::config::DelayConfig;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Delay-embeds a `q × N` signal into a `p·q × (N − (p−1)·kappa)` snapshot
/// matrix.
///
/// Rows are channel-major: block `ℓ` (rows `ℓ·p .. (ℓ+1)·p`) holds the `p`
/// delayed samples of channel `ℓ`, and row `i` of that block in column `j`
/// is `signal[ℓ, j + i·kappa]`.
pub fn hankel_embed<T: Real>(signal: &DMatrix<T>, config: &DelayConfig<T>) -> Result<DMatrix<T>> {
    config.validate()?;
    let q = signal.nrows();
    let n = signal.ncols();
    if q == 0 {
        return Err(Error::Empty("signal has no channels".into()));
    }
    let required = config.window();
    if n < required {
        return Err(Error::SignalTooShort { required, got: n });
    }
    let p = config.p;
    let kappa = config.kappa;
    let n_emb = n - (p - 1) * kappa;
    Ok(DMatrix::from_fn(p * q, n_emb, |row, j| {
        let channel = row / p;
        let i = row % p;
        signal[(channel, j + i * kappa)]
    }))
}

/// Inverse of [`hankel_embed`]: reads the first delay of every column, then
/// recovers the trailing samples from the delayed rows of the final columns.
pub fn de_embed<T: Real>(embedded: &DMatrix<T>, q: usize, config: &DelayConfig<T>) -> Result<DMatrix<T>> {
    config.validate()?;
    let p = config.p;
    if q == 0 || embedded.nrows() != p * q {
        return Err(Error::DimensionMismatch(format!(
            "embedded matrix has {} rows, expected p·q = {}",
            embedded.nrows(),
            p * q
        )));
    }
    let n_emb = embedded.ncols();
    if n_emb == 0 {
        return Err(Error::Empty("embedded matrix has no columns".into()));
    }
    let kappa = config.kappa;
    if p > 1 && n_emb < kappa {
        // Samples between the delays of the only columns were never embedded.
        return Err(Error::InvalidArgument(format!(
            "{n_emb} embedded columns cannot cover a timelag of {kappa} samples"
        )));
    }
    let n = n_emb + (p - 1) * kappa;
    let last = n_emb - 1;
    Ok(DMatrix::from_fn(q, n, |channel, t| {
        if t < n_emb {
            embedded[(channel * p, t)]
        } else {
            // Smallest delay index that reaches sample t from a valid column.
            let i = (t - last).div_ceil(kappa);
            embedded[(channel * p + i, t - i * kappa)]
        }
    }))
}
