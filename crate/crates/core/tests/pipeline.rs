use delay_ssm::bench::{modal_initial_condition, oscillator_2dof, OdeSystem, Trajectory};
use delay_ssm::embedding::{genericity_report, hankel_embed, tangent_basis, GenericityOptions};
use delay_ssm::normalform::{compute_normal_form, diagonal_map, NormalFormOptions};
use delay_ssm::pipeline::{fit_model, modal_content, nmte, zero_fixed_point, FitOptions, PredictOptions};
use delay_ssm::{DelayConfig, Error, Spectrum, SsmModel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DT: f64 = 0.1;

fn slow_pair(sys: &OdeSystem<f64>) -> Vec<Complex64> {
    let (lam, _) = sys.linear_spectrum().unwrap();
    let mut pos: Vec<Complex64> = lam.into_iter().filter(|z| z.im > 0.0).collect();
    pos.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
    vec![pos[0], pos[0].conj()]
}

fn linear_oscillator() -> OdeSystem<f64> {
    let full = oscillator_2dof::<f64>();
    OdeSystem::linear(full.a.clone(), "linear two-mass oscillator").unwrap()
}

fn signal(sys: &OdeSystem<f64>, weights: &[f64], observe: fn(&DVector<f64>) -> f64, t_end: f64) -> Trajectory<f64> {
    let x0 = modal_initial_condition(sys, weights).unwrap();
    sys.integrate(&x0, t_end, DT, None)
        .unwrap()
        .observe(|x| DVector::from_element(1, observe(x)))
        .unwrap()
}

fn options(sys: &OdeSystem<f64>) -> FitOptions<f64> {
    let cfg = DelayConfig::new(15, DT, 5).unwrap();
    let mut opts = FitOptions::new(cfg, Spectrum::scalar(slow_pair(sys)).unwrap(), 3);
    opts.start_time = 62.83;
    opts
}

#[test]
fn linear_data_gives_linear_model() {
    let sys = linear_oscillator();
    let traj = signal(&sys, &[0.3], |x| x[1], 200.0);
    let (model, report) = fit_model(&[traj.clone()], &options(&sys)).unwrap();

    let nf = &model.normal_form;
    let nonlinear = nf.n.coeffs().columns(2, nf.n.coeffs().ncols() - 2).norm();
    assert!(nonlinear < 1e-6, "nonlinear normal form terms {nonlinear:e}");
    let lam = slow_pair(&sys);
    for (got, want) in report.linear_eigenvalues.iter().zip(&lam) {
        assert!((got - want).norm() < 1e-5, "{got} vs {want}");
    }

    // Replacing the finite-difference dynamics by the exact spectrum leaves
    // a model that reproduces linear data to integration accuracy.
    let mut exact = model.clone();
    exact.dynamics.map = diagonal_map(&lam, 3).unwrap();
    exact.normal_form = compute_normal_form(&exact.dynamics.map, 3, &NormalFormOptions::default()).unwrap();
    let test = signal(&sys, &[0.2], |x| x[1], 120.0).skip(629).unwrap();
    let fitted = model.predict_trajectory(&test, &PredictOptions::default()).unwrap();
    assert!(nmte(&test.data, &fitted.data).unwrap() < 1e-3);
    let pred = exact.predict_trajectory(&test, &PredictOptions::default()).unwrap();
    let err = nmte(&test.data, &pred.data).unwrap();
    assert!(err < 1e-6, "NMTE {err:e}");
}

#[test]
fn nmte_matches_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let q = rng.random_range(1..4);
        let n = rng.random_range(1..50);
        let truth: DMatrix<f64> = DMatrix::from_fn(q, n, |_, _| rng.random_range(-2.0..2.0));
        let pred: DMatrix<f64> = DMatrix::from_fn(q, n, |_, _| rng.random_range(-2.0..2.0));
        let mut num = 0.0f64;
        let mut den: f64 = 0.0;
        for j in 0..n {
            let mut e = 0.0f64;
            let mut y = 0.0f64;
            for i in 0..q {
                e += (truth[(i, j)] - pred[(i, j)]).powi(2);
                y += truth[(i, j)].powi(2);
            }
            num += e.sqrt();
            den = den.max(y.sqrt());
        }
        let want = num / n as f64 / den;
        let got = nmte(&truth, &pred).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }
}

#[test]
fn modal_content_separates_modes() {
    let sys = linear_oscillator();
    let (lam, _) = sys.linear_spectrum().unwrap();
    let mut pos: Vec<Complex64> = lam.into_iter().filter(|z| z.im > 0.0).collect();
    pos.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
    let both: Vec<Complex64> = pos.iter().flat_map(|z| [*z, z.conj()]).collect();
    let cfg = DelayConfig::new(3, DT, 8).unwrap();
    let basis = tangent_basis(&Spectrum::scalar(both).unwrap(), &cfg).unwrap();
    let q = zero_fixed_point(&basis);

    let pure = signal(&sys, &[0.1, 0.0], |x| x[1], 30.0);
    let c = modal_content(&pure.data, &basis, &q).unwrap();
    for j in 0..c.ncols() {
        assert!(c[(0, j)] >= 100.0 * c[(1, j)], "column {j}: {} vs {}", c[(0, j)], c[(1, j)]);
    }

    let zero = DMatrix::zeros(1, 200);
    let c = modal_content(&zero, &basis, &q).unwrap();
    assert_eq!(c.norm(), 0.0);

    let second = signal(&sys, &[0.0, 0.05], |x| x[1], 5.0);
    let c2 = modal_content(&second.data, &basis, &q).unwrap();
    let mixed = signal(&sys, &[0.1, 0.05], |x| x[1], 5.0);
    let c = modal_content(&mixed.data, &basis, &q).unwrap();
    let c1 = modal_content(&pure.data, &basis, &q).unwrap();
    let r = c[(1, 0)] / c[(0, 0)];
    let expected = c2[(1, 0)] / c1[(0, 0)];
    assert!((r / expected - 1.0).abs() < 0.2, "ratio {r} vs {expected}");
}

#[test]
fn genericity_flags_blind_observables() {
    let sys = oscillator_2dof::<f64>();
    let opts = options(&sys);
    let basis = tangent_basis(&opts.spectrum, &opts.config).unwrap();

    let zero = DMatrix::zeros(1, 500);
    let rep = genericity_report(&hankel_embed(&zero, &opts.config).unwrap(), &basis, None, GenericityOptions::default())
        .unwrap();
    assert!(rep.degenerate && !rep.is_generic());

    let blind = signal(&sys, &[0.3], |x| x[1] - x[0], 300.0).skip(629).unwrap();
    let rep = genericity_report(&hankel_embed(&blind.data, &opts.config).unwrap(), &basis, None, GenericityOptions::default())
        .unwrap();
    assert!(!rep.is_generic());
    assert!(rep.describe_failure().is_some());

    let good = signal(&sys, &[0.3], |x| x[0], 300.0).skip(629).unwrap();
    let rep = genericity_report(&hankel_embed(&good.data, &opts.config).unwrap(), &basis, None, GenericityOptions::default())
        .unwrap();
    assert!(rep.is_generic(), "{:?}", rep.describe_failure());
}

#[test]
fn non_generic_fit_needs_force() {
    let sys = oscillator_2dof::<f64>();
    let mut opts = options(&sys);
    let blind = signal(&sys, &[0.3], |x| x[1] - x[0], 300.0);
    assert!(matches!(fit_model(&[blind.clone()], &opts), Err(Error::NonGeneric(_))));
    opts.force = true;
    let (_, report) = fit_model(&[blind], &opts).unwrap();
    assert!(!report.genericity.is_generic());
}

#[test]
fn short_window_is_rejected() {
    let sys = oscillator_2dof::<f64>();
    let traj = signal(&sys, &[0.3], |x| x[1], 200.0);
    let (model, _) = fit_model(&[traj], &options(&sys)).unwrap();
    let window = DMatrix::zeros(1, model.config.window() - 1);
    assert!(matches!(
        model.initial_condition(&window, &PredictOptions::default()),
        Err(Error::SignalTooShort { .. })
    ));
}

#[test]
fn saved_model_predicts_identically() {
    let sys = oscillator_2dof::<f64>();
    let traj = signal(&sys, &[0.3], |x| x[1], 200.0);
    let (model, _) = fit_model(&[traj.clone()], &options(&sys)).unwrap();
    let back = SsmModel::<f64>::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(model, back);
    let test = traj.skip(700).unwrap();
    let a = model.predict_trajectory(&test, &PredictOptions::default()).unwrap();
    let b = back.predict_trajectory(&test, &PredictOptions::default()).unwrap();
    assert_eq!(a.data, b.data);
}

#[test]
fn fit_is_deterministic() {
    let sys = oscillator_2dof::<f64>();
    let trajs = [signal(&sys, &[0.3], |x| x[1], 200.0), signal(&sys, &[-0.2], |x| x[1], 200.0)];
    let (a, _) = fit_model(&trajs, &options(&sys)).unwrap();
    let (b, _) = fit_model(&trajs, &options(&sys)).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
}
