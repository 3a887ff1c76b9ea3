use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use delay_ssm::bench::{
    modal_initial_condition, multimode_synthetic, oscillator_2dof, sloshing_spectrum, verify_theorem1,
    verify_theorem2, verify_theorem3, MultimodeParams, OdeSystem, SuiteReport, Trajectory,
};
use delay_ssm::embedding::{optimize_delays as search_delays, ModeGroup};
use delay_ssm::normalform::nf_to_polar;
use delay_ssm::pipeline::{
    fit_model, load_trajectory, modal_content as content, nmte, parse_channel_expr, parse_complex_list,
    read_mode_shapes, save_trajectory, FitOptions, FixedPoint, PredictOptions,
};
use delay_ssm::normalform::ResonanceTolerance;
use delay_ssm::{DelayConfig, SsmModel, Spectrum};

use crate::output::{report_path, write_json, write_records, write_table};
use crate::{
    BackboneArgs, EmbedArgs, FitArgs, ModalContentArgs, OptimizeArgs, PredictArgs, SimulateArgs, Suite, SystemName,
    VerifyArgs,
};

fn parse_reals(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("invalid number {t:?}")))
        .collect()
}

/// Loads a trajectory and applies an optional channel expression.
fn load(path: &Path, channels: Option<&str>) -> Result<Trajectory<f64>> {
    let traj: Trajectory<f64> = load_trajectory(path).with_context(|| format!("reading {}", path.display()))?;
    match channels {
        None => Ok(traj),
        Some(expr) => {
            let sel: DMatrix<f64> = parse_channel_expr(expr, traj.channels())?;
            Ok(Trajectory::new(traj.times.clone(), sel * &traj.data)?)
        }
    }
}

#[derive(Serialize)]
struct SimulateReport {
    system: String,
    initial_state: Vec<f64>,
    t_end: f64,
    dt: f64,
    samples: usize,
    channels: usize,
    eigenvalues: Vec<[f64; 2]>,
}

pub fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let system: OdeSystem<f64> = match a.system {
        SystemName::Osc2dof => oscillator_2dof(),
        SystemName::Multimode => multimode_synthetic(&MultimodeParams {
            coupling: a.coupling,
            seed: a.seed,
            ..Default::default()
        })?,
        SystemName::SloshingSpectrum => return sloshing(&a),
    };
    let x0 = match &a.x0 {
        Some(s) => DVector::from_vec(parse_reals(s)?),
        None if a.ic == "zero" => DVector::zeros(system.dim()),
        None => {
            let w = a
                .ic
                .strip_prefix("modal:")
                .ok_or_else(|| anyhow!("initial condition must be `modal:w1,…` or `zero`"))?;
            modal_initial_condition(&system, &parse_reals(w)?)?
        }
    };
    if x0.len() != system.dim() {
        bail!("initial state has {} entries, system has {}", x0.len(), system.dim());
    }
    let traj = system.integrate(&x0, a.t_end, a.dt, Some(a.rtol))?;
    let traj = match &a.observe {
        // States are (q, q̇); the default output is the displacements.
        None => Trajectory::new(traj.times.clone(), traj.data.rows(0, system.dim() / 2).into_owned())?,
        Some(expr) => {
            let sel: DMatrix<f64> = parse_channel_expr(expr, system.dim())?;
            Trajectory::new(traj.times.clone(), sel * &traj.data)?
        }
    };
    save_trajectory(&traj, &a.out)?;
    let (lam, _) = system.linear_spectrum()?;
    let report = SimulateReport {
        system: system.description.clone(),
        initial_state: x0.iter().copied().collect(),
        t_end: a.t_end,
        dt: a.dt,
        samples: traj.len(),
        channels: traj.channels(),
        eigenvalues: lam.iter().map(|z| [z.re, z.im]).collect(),
    };
    write_json(&report_path(&a.out), &report)?;
    println!(
        "{}: {} samples × {} channels written to {}",
        report.system,
        report.samples,
        report.channels,
        a.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn sloshing(a: &SimulateArgs) -> Result<ExitCode> {
    let grid: Vec<f64> = (0..=20).map(|i| a.width * i as f64 / 20.0).collect();
    let modes = sloshing_spectrum(a.width, a.depth, a.gravity, a.modes, &grid)?;
    let rows: Vec<Vec<f64>> = modes.iter().map(|m| vec![m.k as f64, m.omega]).collect();
    write_table(&a.out, &["k".into(), "omega".into()], &rows)?;
    write_json(&report_path(&a.out), &modes)?;
    for m in &modes {
        println!("k = {}  ω = {:.4} rad/s", m.k, m.omega);
    }
    Ok(ExitCode::SUCCESS)
}

/// Delay configuration, spectrum and fixed-point rule from shared flags.
fn embedding(e: &EmbedArgs, dt_fallback: Option<f64>) -> Result<(DelayConfig<f64>, Spectrum<f64>, FixedPoint<f64>)> {
    let dt = e
        .dt
        .or(dt_fallback)
        .ok_or_else(|| anyhow!("sampling step unknown; pass --dt"))?;
    let config = DelayConfig::new(e.kappa, dt, e.p)?;
    let lambdas = parse_complex_list(&e.eigs)?;
    let shapes = match &e.shapes {
        Some(p) => Some(read_mode_shapes(std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?)?),
        None => None,
    };
    let spectrum = Spectrum::new(lambdas, shapes)?;
    let fixed = match (&e.equilibrium, e.tail_fraction) {
        (Some(s), _) => FixedPoint::Equilibrium(parse_reals(s)?),
        (None, Some(f)) => FixedPoint::TailMean(f),
        (None, None) => FixedPoint::origin(spectrum.channels()),
    };
    Ok((config, spectrum, fixed))
}

pub fn fit(a: FitArgs) -> Result<ExitCode> {
    let trajs = a
        .trajectories
        .iter()
        .map(|p| load(p, a.embed.channels.as_deref()))
        .collect::<Result<Vec<_>>>()?;
    let (config, spectrum, fixed_point) = embedding(&a.embed, trajs[0].dt())?;
    let mut options = FitOptions::new(config, spectrum, a.order_m);
    options.r = a.order_r;
    options.h = a.order_h;
    options.start_time = a.start_time;
    options.fixed_point = fixed_point;
    options.tolerance = ResonanceTolerance::new(a.tol_res);
    options.force = a.force;
    let (model, report) = fit_model(&trajs, &options)?;
    model.save(&a.out)?;
    write_json(&report_path(&a.out), &report)?;
    println!(
        "fitted {}D model from {} trajectories",
        model.dim(),
        report.trajectories.len()
    );
    println!("geometry residual {:.3e}", report.geometry_residual);
    println!("dynamics residual {:.3e}", report.dynamics_residual);
    for (k, l) in report.linear_eigenvalues.iter().enumerate() {
        println!("λ{} = {:.6} {:+.6}i", k + 1, l.re, l.im);
    }
    if let Some(why) = report.genericity.describe_failure() {
        println!("genericity check failed (forced): {why}");
    }
    if let Some(text) = &report.polar_text {
        print!("{text}");
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct PredictReport {
    samples: usize,
    compared: usize,
    nmte: Option<f64>,
}

pub fn predict(a: PredictArgs) -> Result<ExitCode> {
    let model = SsmModel::<f64>::load(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let traj = load(&a.traj, a.channels.as_deref())?;
    let (data, times) = delay_ssm::ssmfit::trim_start(&traj.data, &traj.times, a.start_time)?;
    if data.nrows() != model.channels() {
        bail!("model expects {} channels, trajectory has {}", model.channels(), data.nrows());
    }
    let dt = model.config.dt;
    let t0 = times[0];
    let horizon = a.t_end.unwrap_or(times[times.len() - 1] - t0);
    let steps = (horizon / dt + 1e-9).floor() as usize + 1;
    let rel: Vec<f64> = (0..steps).map(|j| j as f64 * dt).collect();
    let pred = model.predict(&data, &rel, &PredictOptions::default())?;
    let out = Trajectory::new(rel.iter().map(|t| t0 + t).collect(), pred.clone())?;
    save_trajectory(&out, &a.out)?;
    let compared = steps.min(data.ncols());
    let error = if compared > 0 {
        nmte(&data.columns(0, compared).into_owned(), &pred.columns(0, compared).into_owned()).ok()
    } else {
        None
    };
    let report = PredictReport {
        samples: steps,
        compared,
        nmte: error,
    };
    write_json(&report_path(&a.out), &report)?;
    match error {
        Some(e) => println!("NMTE {:.4}% over {compared} samples", 100.0 * e),
        None => println!("no reference samples for NMTE"),
    }
    Ok(ExitCode::SUCCESS)
}

fn group_label(g: &ModeGroup) -> String {
    match g {
        ModeGroup::Pair { .. } => format!("pair{}", g.lead() + 1),
        _ => format!("mode{}", g.lead() + 1),
    }
}

#[derive(Serialize)]
struct ContentReport {
    groups: Vec<String>,
    initial: Vec<f64>,
    note: &'static str,
}

pub fn modal_content(a: ModalContentArgs) -> Result<ExitCode> {
    let traj = load(&a.traj, a.embed.channels.as_deref())?;
    let (config, spectrum, fixed) = embedding(&a.embed, traj.dt())?;
    let basis = delay_ssm::embedding::tangent_basis(&spectrum, &config)?;
    let q_fix = match fixed {
        FixedPoint::Equilibrium(v) => delay_ssm::ssmfit::embedded_fixed_point(&v, config.p),
        FixedPoint::TailMean(f) => {
            delay_ssm::ssmfit::embedded_fixed_point(&delay_ssm::ssmfit::tail_mean(&traj.data, f)?, config.p)
        }
    };
    let c = content(&traj.data, &basis, &q_fix)?;
    let labels: Vec<String> = spectrum.groups().iter().map(group_label).collect();
    let mut header = vec!["t".to_string()];
    header.extend(labels.iter().cloned());
    let rows: Vec<Vec<f64>> = (0..c.ncols())
        .map(|j| std::iter::once(traj.times[j]).chain(c.column(j).iter().copied()).collect())
        .collect();
    write_table(&a.out, &header, &rows)?;
    let report = ContentReport {
        initial: c.column(0).iter().copied().collect(),
        groups: labels,
        note: "linear projection; manifold curvature is not taken into account",
    };
    write_json(&report_path(&a.out), &report)?;
    for (l, v) in report.groups.iter().zip(&report.initial) {
        println!("{l}: |ξ(t0)| = {v:.4e}");
    }
    Ok(ExitCode::SUCCESS)
}

pub fn optimize_delays(a: OptimizeArgs) -> Result<ExitCode> {
    let lambdas = parse_complex_list(&a.eigs)?;
    let search = search_delays(&lambdas, a.dt, a.kappa_min..=a.kappa_max, a.p_min..=a.p_max)?;
    if let Some(out) = &a.out {
        let rows: Vec<Vec<String>> = search
            .table
            .iter()
            .map(|c| vec![c.kappa.to_string(), c.p.to_string(), format!("{:?}", c.objective)])
            .collect();
        write_records(out, &["kappa".into(), "p".into(), "objective".into()], &rows)?;
        write_json(&report_path(out), &search)?;
    }
    println!(
        "optimum kappa = {}, p = {} (tau = {:.6}), objective {:.6e}",
        search.best.kappa,
        search.best.p,
        search.best.kappa as f64 * a.dt,
        search.best.objective
    );
    Ok(ExitCode::SUCCESS)
}

pub fn backbone(a: BackboneArgs) -> Result<ExitCode> {
    let model = SsmModel::<f64>::load(&a.model)?;
    let polar = nf_to_polar(&model.normal_form)?;
    if a.pair == 0 || a.pair > polar.n_pairs() {
        bail!("pair must lie in 1..={}", polar.n_pairs());
    }
    if a.points < 2 {
        bail!("need at least two grid points");
    }
    let grid: Vec<f64> = (0..a.points)
        .map(|i| a.rho_max * i as f64 / (a.points - 1) as f64)
        .collect();
    let others = vec![0.0; polar.n_pairs()];
    let curve = polar.backbone(a.pair - 1, &grid, &others)?;
    let rows: Vec<Vec<f64>> = curve
        .iter()
        .map(|p| vec![p.rho, p.frequency, p.damping, p.frequency_band, p.damping_band])
        .collect();
    let header = ["rho", "frequency", "damping", "frequency_band", "damping_band"].map(String::from);
    write_table(&a.out, &header, &rows)?;
    write_json(&report_path(&a.out), &curve)?;
    print!("{}", polar.format(4));
    Ok(ExitCode::SUCCESS)
}

pub fn verify(a: VerifyArgs) -> Result<ExitCode> {
    let suites: Vec<SuiteReport> = match a.suite {
        Suite::Theorem1 => vec![verify_theorem1(a.count, a.seed, a.tol)?],
        Suite::Theorem2 => vec![verify_theorem2(a.count, a.seed, a.tol)?],
        Suite::Theorem3 => vec![verify_theorem3(a.count, a.seed, a.tol)?],
        Suite::All => vec![
            verify_theorem1(a.count, a.seed, a.tol)?,
            verify_theorem2(a.count, a.seed, a.tol)?,
            verify_theorem3(a.count, a.seed, a.tol)?,
        ],
    };
    let mut ok = true;
    for s in &suites {
        let worst = s.checks.iter().fold(0.0f64, |m, c| m.max(c.value / c.tolerance));
        println!(
            "{}: {} ({} cases, {} checks, worst {:.2}× tolerance)",
            s.suite,
            if s.passed() { "PASS" } else { "FAIL" },
            s.cases,
            s.checks.len(),
            worst
        );
        for f in s.failures() {
            println!("  {} = {:.3e} (tolerance {:.1e})", f.name, f.value, f.tolerance);
        }
        ok &= s.passed();
    }
    if let Some(out) = &a.out {
        write_json(out, &suites)?;
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
