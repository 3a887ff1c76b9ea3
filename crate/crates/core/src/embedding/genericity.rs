use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::config::ModeGroup;
use super::vandermonde::TangentBasis;
use crate::error::{Error, Result};
use crate::linalg::{pinv, DEFAULT_RCOND};
use crate::scalar::{lit, to_complex_matrix, CMatrix, Real};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GenericityOptions<T: Real> {
    /// Relative modal content below which a mode group is flagged.
    pub threshold: T,
    /// Minimum share of low-amplitude signal energy that must lie in the
    /// predicted tangent space.
    pub alignment_threshold: T,
    /// Fraction of snapshots (smallest `‖y − q‖` first) used for the
    /// alignment check.
    pub low_amplitude_fraction: T,
}

impl<T: Real> Default for GenericityOptions<T> {
    fn default() -> Self {
        Self {
            threshold: lit(1e-3),
            alignment_threshold: lit(0.5),
            low_amplitude_fraction: lit(0.25),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ModeContent<T: Real> {
    pub group: ModeGroup,
    /// Root-mean-square norm of the group's share `T_g ξ_g` of each snapshot.
    pub rms: T,
    /// `rms` relative to the largest group.
    pub relative: T,
    pub flagged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GenericityReport<T: Real> {
    pub modes: Vec<ModeContent<T>>,
    /// Share of the low-amplitude snapshot energy captured by the tangent
    /// space (1 when the observable sees every modelled mode linearly).
    pub tangent_alignment: T,
    pub aligned: bool,
    pub degenerate: bool,
    pub note: Option<String>,
    pub options: GenericityOptions<T>,
}

impl<T: Real> GenericityReport<T> {
    pub fn is_generic(&self) -> bool {
        !self.degenerate && self.aligned && self.modes.iter().all(|m| !m.flagged)
    }

    pub fn flagged_groups(&self) -> Vec<ModeGroup> {
        self.modes.iter().filter(|m| m.flagged).map(|m| m.group).collect()
    }

    /// Human-readable explanation of why the observable failed, if it did.
    pub fn describe_failure(&self) -> Option<String> {
        if self.is_generic() {
            return None;
        }
        let mut parts = Vec::new();
        if self.degenerate {
            parts.push("degenerate (zero) signal".to_string());
        }
        for m in self.modes.iter().filter(|m| m.flagged) {
            parts.push(format!(
                "mode group {:?} has relative content {:.3e} below {:.1e}",
                m.group.members(),
                crate::scalar::to_f64(m.relative),
                crate::scalar::to_f64(self.options.threshold)
            ));
        }
        if !self.aligned {
            parts.push(format!(
                "only {:.1}% of low-amplitude signal energy lies in the predicted tangent space",
                100.0 * crate::scalar::to_f64(self.tangent_alignment)
            ));
        }
        Some(parts.join("; "))
    }
}

/// Checks whether an observable sees every modelled mode, by projecting
/// embedded data (`p·q × N`, real) on the tangent basis.
///
/// Per mode group the content is the RMS norm of `T_g ξ_g`, reported
/// relative to the strongest group. Independently, the lowest-amplitude
/// snapshots must lie mostly in the tangent space: an observable with zero
/// linear response to a mode produces only higher harmonics there.
pub fn genericity_report<T: Real>(
    embedded: &DMatrix<T>,
    basis: &TangentBasis<T>,
    q_fix: Option<&DVector<T>>,
    options: GenericityOptions<T>,
) -> Result<GenericityReport<T>> {
    if embedded.nrows() != basis.rows() {
        return Err(Error::DimensionMismatch(format!(
            "embedded data has {} rows, tangent basis has {}",
            embedded.nrows(),
            basis.rows()
        )));
    }
    if let Some(q) = q_fix {
        if q.len() != embedded.nrows() {
            return Err(Error::DimensionMismatch("fixed point length".into()));
        }
    }
    let n = embedded.ncols();
    if n == 0 {
        return Err(Error::Empty("embedded data".into()));
    }
    let centered = match q_fix {
        Some(q) => {
            let mut c = embedded.clone();
            for mut col in c.column_iter_mut() {
                col -= q;
            }
            c
        }
        None => embedded.clone(),
    };
    let yc = to_complex_matrix(&centered);
    let t = &basis.matrix;
    let xi = pinv(t, lit(DEFAULT_RCOND))? * &yc;
    let groups = basis.spectrum.groups();
    let nf = T::from_usize(n).unwrap();
    let mut rms = Vec::with_capacity(groups.len());
    for g in groups {
        let members = g.members();
        let tg = CMatrix::from_fn(t.nrows(), members.len(), |r, c| t[(r, members[c])]);
        let xg = CMatrix::from_fn(members.len(), n, |r, c| xi[(members[r], c)]);
        let share = tg * xg;
        let e = share.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        rms.push((e / nf).sqrt());
    }
    let largest = rms.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let degenerate = !(largest > T::zero());
    let modes = groups
        .iter()
        .zip(&rms)
        .map(|(g, &r)| {
            let relative = if degenerate { T::zero() } else { r / largest };
            ModeContent {
                group: *g,
                rms: r,
                relative,
                flagged: degenerate || relative < options.threshold,
            }
        })
        .collect();

    // Low-amplitude alignment.
    let norms: Vec<T> = centered.column_iter().map(|c| c.norm()).collect();
    let mut order: Vec<usize> = (0..n).filter(|&j| norms[j] > T::zero()).collect();
    order.sort_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap());
    let take = ((options.low_amplitude_fraction * T::from_usize(order.len()).unwrap())
        .ceil()
        .to_usize()
        .unwrap_or(0))
    .max(basis.dim() + 1)
    .min(order.len());
    let tangent_alignment = if take == 0 {
        T::zero()
    } else {
        let low = CMatrix::from_fn(yc.nrows(), take, |r, c| yc[(r, order[c])]);
        let proj = t * (pinv(t, lit(DEFAULT_RCOND))? * &low);
        let num = proj.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        let den = low.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        (num / den).sqrt()
    };
    let aligned = !degenerate && tangent_alignment >= options.alignment_threshold;
    let note = if degenerate {
        Some("degenerate signal: no content in any mode".to_string())
    } else {
        None
    };
    Ok(GenericityReport {
        modes,
        tangent_alignment,
        aligned,
        degenerate,
        note,
        options,
    })
}
