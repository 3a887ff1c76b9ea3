use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cabs, lit, CMatrix, Real, C};

/// Delay-embedding parameters: `p` delays spaced `kappa` samples apart, with
/// `dt` seconds per sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DelayConfig<T: Real> {
    pub kappa: usize,
    pub dt: T,
    pub p: usize,
}

impl<T: Real> DelayConfig<T> {
    pub fn new(kappa: usize, dt: T, p: usize) -> Result<Self> {
        let cfg = Self { kappa, dt, p };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa == 0 {
            return Err(Error::InvalidConfig("kappa must be ≥ 1".into()));
        }
        if self.p == 0 {
            return Err(Error::InvalidConfig("p must be ≥ 1".into()));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        Ok(())
    }

    /// Timelag `τ = kappa·dt`.
    pub fn tau(&self) -> T {
        T::from_usize(self.kappa).unwrap() * self.dt
    }

    /// Samples spanned by one embedded column, `(p − 1)·kappa + 1`.
    pub fn window(&self) -> usize {
        (self.p - 1) * self.kappa + 1
    }

    /// Whether `p·q ≥ 2d + 1`, the dimension count that guarantees a
    /// diffeomorphic copy of a `d`-dimensional manifold. Logs a warning when
    /// violated; the tangent space alone only needs `p·q ≥ d`.
    pub fn check_embedding_dimension(&self, q: usize, d: usize) -> bool {
        let ok = self.p * q >= 2 * d + 1;
        if !ok {
            log::warn!(
                "embedding dimension p·q = {} is below 2d + 1 = {}; the manifold may not embed",
                self.p * q,
                2 * d + 1
            );
        }
        ok
    }
}

/// How the columns of a spectrum group together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeGroup {
    /// Complex-conjugate pair; `primary` carries the eigenvalue with
    /// positive imaginary part.
    Pair { primary: usize, conjugate: usize },
    Real(usize),
    /// Complex eigenvalue without its conjugate in the list.
    Unpaired(usize),
}

impl ModeGroup {
    pub fn members(&self) -> Vec<usize> {
        match *self {
            ModeGroup::Pair { primary, conjugate } => vec![primary, conjugate],
            ModeGroup::Real(k) | ModeGroup::Unpaired(k) => vec![k],
        }
    }

    pub fn lead(&self) -> usize {
        match *self {
            ModeGroup::Pair { primary, .. } => primary,
            ModeGroup::Real(k) | ModeGroup::Unpaired(k) => k,
        }
    }
}

/// Continuous-time eigenvalues of the modelled modes, optionally with their
/// mode shapes as seen through a `q`-channel observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real", try_from = "RawSpectrum<T>", into = "RawSpectrum<T>")]
pub struct Spectrum<T: Real> {
    lambdas: Vec<C<T>>,
    mode_shapes: Option<CMatrix<T>>,
    groups: Vec<ModeGroup>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct RawSpectrum<T: Real> {
    lambdas: Vec<C<T>>,
    mode_shapes: Option<CMatrix<T>>,
}

impl<T: Real> TryFrom<RawSpectrum<T>> for Spectrum<T> {
    type Error = Error;
    fn try_from(r: RawSpectrum<T>) -> Result<Self> {
        Spectrum::new(r.lambdas, r.mode_shapes)
    }
}

impl<T: Real> From<Spectrum<T>> for RawSpectrum<T> {
    fn from(s: Spectrum<T>) -> Self {
        RawSpectrum {
            lambdas: s.lambdas,
            mode_shapes: s.mode_shapes,
        }
    }
}

const DISTINCT_RTOL: f64 = 1e-12;
const PAIR_RTOL: f64 = 1e-9;

impl<T: Real> Spectrum<T> {
    pub fn new(lambdas: Vec<C<T>>, mode_shapes: Option<CMatrix<T>>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::Empty("eigenvalue list".into()));
        }
        if lambdas.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite eigenvalue".into()));
        }
        check_distinct(&lambdas)?;
        if let Some(s) = &mode_shapes {
            if s.ncols() != lambdas.len() {
                return Err(Error::DimensionMismatch(format!(
                    "mode shapes have {} columns for {} eigenvalues",
                    s.ncols(),
                    lambdas.len()
                )));
            }
            if s.nrows() == 0 {
                return Err(Error::Empty("mode shapes".into()));
            }
        }
        let groups = group_modes(&lambdas);
        if let Some(s) = &mode_shapes {
            for g in &groups {
                if let ModeGroup::Pair { primary, conjugate } = *g {
                    let scale = s.column(primary).norm().max(s.column(conjugate).norm());
                    let diff = (s.column(conjugate) - s.column(primary).map(|z| z.conj())).norm();
                    if diff > lit::<T>(1e-8) * scale.max(T::one()) {
                        return Err(Error::InvalidArgument(format!(
                            "mode shapes of conjugate eigenvalues {primary} and {conjugate} are not conjugate"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            lambdas,
            mode_shapes,
            groups,
        })
    }

    pub fn scalar(lambdas: Vec<C<T>>) -> Result<Self> {
        Self::new(lambdas, None)
    }

    pub fn lambdas(&self) -> &[C<T>] {
        &self.lambdas
    }

    pub fn mode_shapes(&self) -> Option<&CMatrix<T>> {
        self.mode_shapes.as_ref()
    }

    pub fn groups(&self) -> &[ModeGroup] {
        &self.groups
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.groups.iter().filter_map(|g| match *g {
            ModeGroup::Pair { primary, conjugate } => Some((primary, conjugate)),
            _ => None,
        })
    }

    /// Number of modes `d`.
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Observable channel count implied by the mode shapes (1 without).
    pub fn channels(&self) -> usize {
        self.mode_shapes.as_ref().map_or(1, |s| s.nrows())
    }

    /// Index permutation mapping each mode to its conjugate partner (real
    /// and unpaired modes map to themselves).
    pub fn conjugation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.dim()).collect();
        for (a, b) in self.pairs() {
            perm[a] = b;
            perm[b] = a;
        }
        perm
    }
}

pub(crate) fn check_distinct<T: Real>(lambdas: &[C<T>]) -> Result<()> {
    for i in 0..lambdas.len() {
        for j in (i + 1)..lambdas.len() {
            let scale = cabs(lambdas[i]).max(cabs(lambdas[j]));
            if cabs(lambdas[i] - lambdas[j]) <= lit::<T>(DISTINCT_RTOL) * scale {
                return Err(Error::DuplicateEigenvalues(i, j));
            }
        }
    }
    Ok(())
}

fn group_modes<T: Real>(lambdas: &[C<T>]) -> Vec<ModeGroup> {
    let n = lambdas.len();
    let mut used = vec![false; n];
    let mut groups = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        let li = lambdas[i];
        let tol = lit::<T>(PAIR_RTOL) * cabs(li).max(T::one());
        if li.im.abs() <= tol {
            used[i] = true;
            groups.push(ModeGroup::Real(i));
            continue;
        }
        let partner = ((i + 1)..n).find(|&j| !used[j] && cabs(lambdas[j] - li.conj()) <= tol);
        used[i] = true;
        match partner {
            Some(j) => {
                used[j] = true;
                let (primary, conjugate) = if li.im > T::zero() { (i, j) } else { (j, i) };
                groups.push(ModeGroup::Pair { primary, conjugate });
            }
            None => groups.push(ModeGroup::Unpaired(i)),
        }
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn zero_kappa_or_p_rejected() {
        assert!(DelayConfig::new(0, 0.1, 3).is_err());
        assert!(DelayConfig::new(1, 0.1, 0).is_err());
        assert!(DelayConfig::new(1, -0.1, 2).is_err());
        let c = DelayConfig::<f64>::new(15, 0.1, 5).unwrap();
        assert!((c.tau() - 1.5).abs() < 1e-15);
        assert_eq!(c.window(), 61);
    }

    #[test]
    fn pairs_are_detected_with_positive_primary() {
        let s = Spectrum::scalar(vec![
            cplx(-0.1, -2.0),
            cplx(-0.5, 0.0),
            cplx(-0.1, 2.0),
        ])
        .unwrap();
        assert_eq!(
            s.groups(),
            &[
                ModeGroup::Pair {
                    primary: 2,
                    conjugate: 0
                },
                ModeGroup::Real(1)
            ]
        );
        assert_eq!(s.conjugation(), vec![2, 1, 0]);
    }

    #[test]
    fn duplicates_rejected() {
        let e = Spectrum::scalar(vec![cplx(-0.1, 1.0), cplx(-0.1, 1.0)]);
        assert!(matches!(e, Err(Error::DuplicateEigenvalues(0, 1))));
    }

    #[test]
    fn unpaired_complex_mode_kept_as_such() {
        let s = Spectrum::scalar(vec![cplx(-0.1, 1.0)]).unwrap();
        assert_eq!(s.groups(), &[ModeGroup::Unpaired(0)]);
    }

    #[test]
    fn non_conjugate_shapes_rejected() {
        let shapes = CMatrix::from_row_slice(1, 2, &[cplx(1.0, 0.5), cplx(1.0, 0.5)]);
        let e = Spectrum::new(vec![cplx(-0.1, 1.0), cplx(-0.1, -1.0)], Some(shapes));
        assert!(e.is_err());
    }
}
