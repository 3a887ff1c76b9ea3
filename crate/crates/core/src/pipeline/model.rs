use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bench::Trajectory;
use crate::embedding::{
    genericity_report, hankel_embed, tangent_basis, DelayConfig, GenericityOptions, GenericityReport, Spectrum,
    TangentBasis,
};
use crate::error::{Error, Result};
use crate::normalform::{
    compute_normal_form, integrate_nf, invert_transform, nf_to_polar, NormalForm, NormalFormOptions, PolarModel,
    ResonanceTolerance,
};
use crate::polyalg::ORDERING_TAG;
use crate::scalar::{cabs, lit, CMatrix, CVector, Real, C};
use crate::ssmfit::{
    embedded_fixed_point, estimate_derivatives, fit_dynamics, fit_geometry, reduced_coords, tail_mean, trim_start,
    DynamicsFit, GeometryFit, ReducedData,
};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// How the embedded fixed point is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub enum FixedPoint<T: Real> {
    /// Observable value at the equilibrium, one entry per channel.
    Equilibrium(Vec<T>),
    /// Per-channel mean of the final fraction of the longest trajectory.
    TailMean(T),
}

impl<T: Real> FixedPoint<T> {
    pub fn origin(channels: usize) -> Self {
        FixedPoint::Equilibrium(vec![T::zero(); channels])
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions<T: Real> {
    pub config: DelayConfig<T>,
    pub spectrum: Spectrum<T>,
    /// Orders of the manifold geometry, reduced dynamics and normal form.
    pub m: u32,
    pub r: u32,
    pub h: u32,
    /// Samples before this time are discarded from every trajectory.
    pub start_time: T,
    pub fixed_point: FixedPoint<T>,
    pub tolerance: ResonanceTolerance<T>,
    pub genericity: GenericityOptions<T>,
    /// Continue past a failed genericity check.
    pub force: bool,
}

impl<T: Real> FitOptions<T> {
    pub fn new(config: DelayConfig<T>, spectrum: Spectrum<T>, order: u32) -> Self {
        let q = spectrum.channels();
        Self {
            config,
            spectrum,
            m: order,
            r: order,
            h: order,
            start_time: T::zero(),
            fixed_point: FixedPoint::origin(q),
            tolerance: ResonanceTolerance::default(),
            genericity: GenericityOptions::default(),
            force: false,
        }
    }
}

/// Fitted reduced-order model, serialized as versioned JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SsmModel<T: Real> {
    pub version: u32,
    pub ordering: String,
    pub config: DelayConfig<T>,
    pub spectrum: Spectrum<T>,
    pub basis: TangentBasis<T>,
    pub q_fix: DVector<T>,
    pub geometry: GeometryFit<T>,
    pub dynamics: DynamicsFit<T>,
    pub normal_form: NormalForm<T>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TrajectorySummary<T: Real> {
    pub samples: usize,
    pub embedded: usize,
    pub with_derivatives: usize,
    pub start_time: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FitReport<T: Real> {
    pub trajectories: Vec<TrajectorySummary<T>>,
    pub genericity: GenericityReport<T>,
    pub geometry_residual: T,
    pub dynamics_residual: T,
    /// Eigenvalues of the linear part of the fitted reduced dynamics.
    pub linear_eigenvalues: Vec<C<T>>,
    pub resonant_terms: usize,
    pub polar: Option<PolarModel<T>>,
    /// Printed polar normal form, absent when some mode is real.
    pub polar_text: Option<String>,
    pub embedding_dimension_ok: bool,
}

struct Prepared<T: Real> {
    embedded: DMatrix<T>,
    reduced: ReducedData<T>,
    with_derivatives: ReducedData<T>,
    summary: TrajectorySummary<T>,
}

fn fixed_point<T: Real>(trajs: &[Trajectory<T>], options: &FitOptions<T>) -> Result<DVector<T>> {
    let q = options.spectrum.channels();
    let p = options.config.p;
    match &options.fixed_point {
        FixedPoint::Equilibrium(v) => {
            if v.len() != q {
                return Err(Error::DimensionMismatch(format!("equilibrium has {} entries for {q} channels", v.len())));
            }
            Ok(embedded_fixed_point(v, p))
        }
        FixedPoint::TailMean(fraction) => {
            // First longest trajectory, so ties resolve by input order.
            let longest = trajs
                .iter()
                .reduce(|a, b| if b.len() > a.len() { b } else { a })
                .ok_or_else(|| Error::Empty("no trajectories".into()))?;
            Ok(embedded_fixed_point(&tail_mean(&longest.data, *fraction)?, p))
        }
    }
}

fn prepare<T: Real>(
    traj: &Trajectory<T>,
    basis: &TangentBasis<T>,
    q_fix: &DVector<T>,
    options: &FitOptions<T>,
) -> Result<Prepared<T>> {
    let cfg = &options.config;
    if traj.channels() != options.spectrum.channels() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory has {} channels, spectrum expects {}",
            traj.channels(),
            options.spectrum.channels()
        )));
    }
    if let Some(dt) = traj.dt() {
        let slack = lit::<T>(1e-6) * cfg.dt;
        if (dt - cfg.dt).abs() > slack {
            return Err(Error::InvalidConfig(format!(
                "trajectory sampled at dt = {}, configuration has {}",
                crate::scalar::to_f64(dt),
                crate::scalar::to_f64(cfg.dt)
            )));
        }
    }
    let (signal, times) = trim_start(&traj.data, &traj.times, options.start_time)?;
    let embedded = hankel_embed(&signal, cfg)?;
    let times = &times[..embedded.ncols()];
    let reduced = reduced_coords(&embedded, basis, q_fix, Some(times))?;
    let with_derivatives = estimate_derivatives(&reduced, cfg.dt)?;
    let summary = TrajectorySummary {
        samples: signal.ncols(),
        embedded: embedded.ncols(),
        with_derivatives: with_derivatives.len(),
        start_time: times[0],
    };
    Ok(Prepared {
        embedded,
        reduced,
        with_derivatives,
        summary,
    })
}

fn hcat<T: Real>(parts: &[&DMatrix<T>]) -> DMatrix<T> {
    let rows = parts[0].nrows();
    let cols = parts.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in parts {
        out.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    out
}

/// Fits a model to one or more trajectories (`q` channels each).
///
/// Every trajectory is trimmed, embedded and projected on its own; the
/// snapshots are then pooled without weighting.
pub fn fit_model<T: Real>(trajs: &[Trajectory<T>], options: &FitOptions<T>) -> Result<(SsmModel<T>, FitReport<T>)> {
    if trajs.is_empty() {
        return Err(Error::Empty("no trajectories".into()));
    }
    let d = options.spectrum.dim();
    let q = options.spectrum.channels();
    let dim_ok = options.config.check_embedding_dimension(q, d);
    let basis = tangent_basis(&options.spectrum, &options.config)?;
    let q_fix = fixed_point(trajs, options)?;

    let prepared = trajs
        .par_iter()
        .map(|t| prepare(t, &basis, &q_fix, options))
        .collect::<Result<Vec<_>>>()?;

    let embedded = hcat(&prepared.iter().map(|p| &p.embedded).collect::<Vec<_>>());
    let genericity = genericity_report(&embedded, &basis, Some(&q_fix), options.genericity)?;
    if let Some(why) = genericity.describe_failure() {
        if options.force {
            log::warn!("continuing despite failed genericity check: {why}");
        } else {
            return Err(Error::NonGeneric(why));
        }
    }

    let reduced = ReducedData::concat(&prepared.iter().map(|p| p.reduced.clone()).collect::<Vec<_>>())?;
    let with_derivatives =
        ReducedData::concat(&prepared.iter().map(|p| p.with_derivatives.clone()).collect::<Vec<_>>())?;
    let mut centered = embedded;
    for mut col in centered.column_iter_mut() {
        col -= &q_fix;
    }
    let geometry = fit_geometry(&centered, &reduced, options.m)?;
    let dynamics = fit_dynamics(&with_derivatives, options.r)?;
    let nf_options = NormalFormOptions {
        tolerance: options.tolerance,
        conjugation: Some(options.spectrum.conjugation()),
    };
    let normal_form = compute_normal_form(&dynamics.map, options.h, &nf_options)?;
    let polar = nf_to_polar(&normal_form).ok();

    let report = FitReport {
        trajectories: prepared.into_iter().map(|p| p.summary).collect(),
        genericity,
        geometry_residual: geometry.residual,
        dynamics_residual: dynamics.residual,
        linear_eigenvalues: normal_form.lambdas.clone(),
        resonant_terms: normal_form.resonant_set.len(),
        polar_text: polar.as_ref().map(|p| p.format(4)),
        polar,
        embedding_dimension_ok: dim_ok,
    };
    let model = SsmModel {
        version: MODEL_FORMAT_VERSION,
        ordering: ORDERING_TAG.to_string(),
        config: options.config,
        spectrum: options.spectrum.clone(),
        basis,
        q_fix,
        geometry,
        dynamics,
        normal_form,
    };
    Ok((model, report))
}

/// Solver settings for [`SsmModel::predict`].
#[derive(Debug, Clone, Copy)]
pub struct PredictOptions<T: Real> {
    pub inversion_tol: T,
    pub inversion_max_iter: usize,
    pub rtol: T,
}

impl<T: Real> Default for PredictOptions<T> {
    fn default() -> Self {
        Self {
            inversion_tol: lit(1e-10),
            inversion_max_iter: 200,
            rtol: lit(1e-10),
        }
    }
}

impl<T: Real> SsmModel<T> {
    pub fn channels(&self) -> usize {
        self.spectrum.channels()
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Self = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<()> {
        if self.version != MODEL_FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                self.version
            )));
        }
        if self.ordering != ORDERING_TAG {
            return Err(Error::Parse(format!("unsupported monomial ordering {:?}", self.ordering)));
        }
        self.config.validate()?;
        let d = self.dim();
        let rows = self.config.p * self.channels();
        if self.basis.matrix.shape() != (rows, d)
            || self.q_fix.len() != rows
            || self.geometry.map.n_out() != rows
            || self.geometry.map.dim() != d
            || self.dynamics.map.dim() != d
            || self.normal_form.dim() != d
        {
            return Err(Error::DimensionMismatch("inconsistent model dimensions".into()));
        }
        Ok(())
    }

    /// Reduced coordinates of embedded snapshots.
    pub fn project(&self, embedded: &DMatrix<T>) -> Result<ReducedData<T>> {
        reduced_coords(embedded, &self.basis, &self.q_fix, None)
    }

    /// Normal-form coordinates of the first snapshot of an observation
    /// window (`q × ≥ window` samples).
    pub fn initial_condition(&self, window: &DMatrix<T>, options: &PredictOptions<T>) -> Result<CVector<T>> {
        let need = self.config.window();
        if window.ncols() < need {
            return Err(Error::SignalTooShort {
                required: need,
                got: window.ncols(),
            });
        }
        let first = window.columns(0, need).into_owned();
        let embedded = hankel_embed(&first, &self.config)?;
        let xi = self.project(&embedded)?.xi.column(0).into_owned();
        invert_transform(&self.normal_form, &xi, options.inversion_tol, options.inversion_max_iter)
    }

    /// Maps normal-form states (`d × N`) to embedded observables.
    pub fn lift(&self, zeta: &CMatrix<T>) -> Result<DMatrix<T>> {
        let nf = &self.normal_form;
        let xi = &nf.modal_basis * nf.h.eval_columns(zeta)?;
        let mut y = self.geometry.map.eval_columns(&xi)?.map(|z| z.re);
        for mut col in y.column_iter_mut() {
            col += &self.q_fix;
        }
        Ok(y)
    }

    /// Predicts the physical channels from the start of `window` onward at
    /// `times` (relative to the first sample of the window).
    pub fn predict(&self, window: &DMatrix<T>, times: &[T], options: &PredictOptions<T>) -> Result<DMatrix<T>> {
        let zeta0 = self.initial_condition(window, options)?;
        let zeta = integrate_nf(&self.normal_form.n, zeta0.as_slice(), times, Some(options.rtol))?;
        let y = self.lift(&zeta)?;
        let p = self.config.p;
        Ok(DMatrix::from_fn(self.channels(), times.len(), |l, j| y[(l * p, j)]))
    }

    /// Predicts a trajectory over the time span of `truth`, started from its
    /// first window.
    pub fn predict_trajectory(&self, truth: &Trajectory<T>, options: &PredictOptions<T>) -> Result<Trajectory<T>> {
        let t0 = truth.times.first().copied().ok_or_else(|| Error::Empty("trajectory".into()))?;
        let rel: Vec<T> = truth.times.iter().map(|&t| t - t0).collect();
        let data = self.predict(&truth.data, &rel, options)?;
        Trajectory::new(truth.times.clone(), data)
    }
}

/// `|ξ_k(t)|` for the lead mode of every group (one row per conjugate pair
/// or real mode), from projection onto the tangent basis. Manifold
/// curvature is ignored, so contents are linear estimates.
pub fn modal_content<T: Real>(
    signal: &DMatrix<T>,
    basis: &TangentBasis<T>,
    q_fix: &DVector<T>,
) -> Result<DMatrix<T>> {
    let embedded = hankel_embed(signal, &basis.config)?;
    let reduced = reduced_coords(&embedded, basis, q_fix, None)?;
    let groups = basis.spectrum.groups();
    Ok(DMatrix::from_fn(groups.len(), reduced.len(), |g, j| {
        cabs(reduced.xi[(groups[g].lead(), j)])
    }))
}

/// Embedded fixed point with every channel at zero.
pub fn zero_fixed_point<T: Real>(basis: &TangentBasis<T>) -> DVector<T> {
    DVector::zeros(basis.rows())
}
