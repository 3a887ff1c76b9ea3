use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embedding::{Spectrum, TangentBasis};
use crate::error::{Error, Result};
use crate::linalg::{pinv, DEFAULT_RCOND};
use crate::scalar::{lit, to_complex_matrix, CMatrix, Real};

/// Reduced coordinates `Ξ` of a set of embedded snapshots, with derivative
/// estimates once [`estimate_derivatives`](super::estimate_derivatives) has
/// run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ReducedData<T: Real> {
    /// `d × N` modal coordinates.
    pub xi: CMatrix<T>,
    /// `d × N` time derivatives of `xi`, aligned column by column.
    pub xi_dot: Option<CMatrix<T>>,
    /// Time stamp of every column of `xi`.
    pub times: Vec<T>,
    /// Embedded fixed point (length `p·q`).
    pub q_fix: DVector<T>,
}

impl<T: Real> ReducedData<T> {
    pub fn dim(&self) -> usize {
        self.xi.nrows()
    }

    pub fn len(&self) -> usize {
        self.xi.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.ncols() == 0
    }

    /// Joins several trajectories in input order. All parts must share the
    /// fixed point and either all carry derivatives or none.
    pub fn concat(parts: &[ReducedData<T>]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Empty("no reduced trajectories".into()))?;
        let d = first.dim();
        let with_dot = first.xi_dot.is_some();
        let mut total = 0;
        for p in parts {
            if p.dim() != d || p.q_fix != first.q_fix {
                return Err(Error::DimensionMismatch(
                    "reduced trajectories disagree in dimension or fixed point".into(),
                ));
            }
            if p.xi_dot.is_some() != with_dot {
                return Err(Error::InvalidArgument("derivatives missing on some trajectories".into()));
            }
            total += p.len();
        }
        let mut xi = CMatrix::zeros(d, total);
        let mut xi_dot = with_dot.then(|| CMatrix::zeros(d, total));
        let mut times = Vec::with_capacity(total);
        let mut at = 0;
        for p in parts {
            xi.columns_mut(at, p.len()).copy_from(&p.xi);
            if let (Some(dst), Some(src)) = (xi_dot.as_mut(), p.xi_dot.as_ref()) {
                dst.columns_mut(at, p.len()).copy_from(src);
            }
            times.extend_from_slice(&p.times);
            at += p.len();
        }
        Ok(Self {
            xi,
            xi_dot,
            times,
            q_fix: first.q_fix.clone(),
        })
    }
}

/// Projects embedded snapshots `Y` (`p·q × N`) onto the tangent basis:
/// `Ξ = T†(Y − q_fix·1ᵀ)`.
///
/// Rows of conjugate eigenvalue pairs are symmetrized so that they are
/// exact conjugates of each other.
pub fn reduced_coords<T: Real>(
    y: &DMatrix<T>,
    basis: &TangentBasis<T>,
    q_fix: &DVector<T>,
    times: Option<&[T]>,
) -> Result<ReducedData<T>> {
    if y.nrows() != basis.rows() {
        return Err(Error::DimensionMismatch(format!(
            "embedded data has {} rows, tangent basis has {}",
            y.nrows(),
            basis.rows()
        )));
    }
    if q_fix.len() != y.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "fixed point has length {}, data has {} rows",
            q_fix.len(),
            y.nrows()
        )));
    }
    let n = y.ncols();
    let times = match times {
        Some(t) if t.len() != n => {
            return Err(Error::DimensionMismatch(format!("{} time stamps for {n} snapshots", t.len())))
        }
        Some(t) => t.to_vec(),
        None => {
            let dt = basis.config.dt;
            (0..n).map(|j| T::from_usize(j).unwrap() * dt).collect()
        }
    };
    let mut centered = y.clone();
    for mut col in centered.column_iter_mut() {
        col -= q_fix;
    }
    let t_pinv = pinv(&basis.matrix, lit(DEFAULT_RCOND))?;
    let mut xi = t_pinv * to_complex_matrix(&centered);
    enforce_conjugate_rows(&mut xi, &basis.spectrum);
    Ok(ReducedData {
        xi,
        xi_dot: None,
        times,
        q_fix: q_fix.clone(),
    })
}

/// Replaces each conjugate row pair `(k, k′)` by `(row_k + conj(row_k′))/2`
/// and its conjugate.
pub fn enforce_conjugate_rows<T: Real>(xi: &mut CMatrix<T>, spectrum: &Spectrum<T>) {
    let half = lit::<T>(0.5);
    for (a, b) in spectrum.pairs() {
        for j in 0..xi.ncols() {
            let avg = (xi[(a, j)] + xi[(b, j)].conj()).scale(half);
            xi[(a, j)] = avg;
            xi[(b, j)] = avg.conj();
        }
    }
    for g in spectrum.groups() {
        if let crate::embedding::ModeGroup::Real(k) = *g {
            for j in 0..xi.ncols() {
                xi[(k, j)].im = T::zero();
            }
        }
    }
}

/// Embedded fixed point for a known equilibrium observable value: each
/// channel value repeated `p` times, channel-major.
pub fn embedded_fixed_point<T: Real>(equilibrium: &[T], p: usize) -> DVector<T> {
    DVector::from_iterator(
        equilibrium.len() * p,
        equilibrium.iter().flat_map(|&v| std::iter::repeat_n(v, p)),
    )
}

/// Per-channel mean of the final `fraction` of the samples of a `q × N`
/// signal (at least one sample).
pub fn tail_mean<T: Real>(signal: &DMatrix<T>, fraction: T) -> Result<Vec<T>> {
    let n = signal.ncols();
    if n == 0 {
        return Err(Error::Empty("signal".into()));
    }
    if !(fraction > T::zero() && fraction <= T::one()) {
        return Err(Error::InvalidArgument("tail fraction must lie in (0, 1]".into()));
    }
    let take = (fraction * T::from_usize(n).unwrap())
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, n);
    let denom = T::from_usize(take).unwrap();
    Ok(signal
        .row_iter()
        .map(|r| r.columns(n - take, take).iter().fold(T::zero(), |a, &b| a + b) / denom)
        .collect())
}

/// Drops the samples before `start_time`. Returns the trimmed signal and its
/// time stamps.
pub fn trim_start<T: Real>(signal: &DMatrix<T>, times: &[T], start_time: T) -> Result<(DMatrix<T>, Vec<T>)> {
    if times.len() != signal.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} time stamps for {} samples",
            times.len(),
            signal.ncols()
        )));
    }
    // Allow for roundoff in the time column.
    let slack = lit::<T>(1e-9) * start_time.abs().max(T::one());
    let first = times.iter().position(|&t| t >= start_time - slack).unwrap_or(times.len());
    if first == times.len() {
        return Err(Error::Empty(format!(
            "no samples after start time {}",
            crate::scalar::to_f64(start_time)
        )));
    }
    let n = signal.ncols() - first;
    Ok((signal.columns(first, n).into_owned(), times[first..].to_vec()))
}
