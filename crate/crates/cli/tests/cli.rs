use std::path::Path;
use std::process::{Command, Output};

const EMBED: [&str; 7] = ["--eigs=-0.0149+1i,-0.0149-1i", "--kappa", "15", "--p", "5", "--dt", "0.1"];

fn dssm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dssm"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("running dssm")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = dssm(dir, args);
    assert!(
        out.status.success(),
        "dssm {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn simulate(dir: &Path, ic: &str, observe: &str, out: &str) {
    ok(
        dir,
        &["simulate", "--system", "osc2dof", "--ic", ic, "--t-end", "300", "--dt", "0.1", "--observe", observe, "--out", out],
    );
}

fn fit(dir: &Path, inputs: &[&str], extra: &[&str]) -> Output {
    let mut args = vec!["fit"];
    args.extend_from_slice(inputs);
    args.extend_from_slice(&EMBED);
    args.extend_from_slice(&["--start-time", "62.83"]);
    args.extend_from_slice(extra);
    dssm(dir, &args)
}

#[test]
fn simulate_fit_predict() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "modal:0.3", "ch1", "a.csv");
    simulate(d, "modal:-0.2", "ch1", "b.csv");
    let out = fit(d, &["a.csv", "b.csv"], &["--out", "model.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let model: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("model.json")).unwrap()).unwrap();
    assert_eq!(model["ordering"], "graded-lex");
    assert_eq!(model["version"], 1);
    assert!(d.join("model.report.json").exists());

    ok(d, &["predict", "--model", "model.json", "--traj", "b.csv", "--start-time", "62.83", "--out", "pred.csv"]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("pred.json")).unwrap()).unwrap();
    let nmte = report["nmte"].as_f64().unwrap();
    assert!(nmte < 0.05, "NMTE {nmte}");
    let pred = std::fs::read_to_string(d.join("pred.csv")).unwrap();
    assert!(pred.starts_with("t,ch0\n"));
}

#[test]
fn blind_observable_needs_force() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d, "modal:0.3", "ch1-ch0", "bad.csv");
    let out = fit(d, &["bad.csv"], &["--out", "m.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-generic"));
    assert!(!d.join("m.json").exists());
    let out = fit(d, &["bad.csv"], &["--force", "--out", "m.json"]);
    assert!(out.status.success());
    assert!(d.join("m.json").exists());
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for run in ["1", "2"] {
        simulate(d, "modal:0.3", "ch1", &format!("s{run}.csv"));
        let out = fit(d, &[&format!("s{run}.csv")], &["--out", &format!("m{run}.json")]);
        assert!(out.status.success());
    }
    let read = |name: &str| std::fs::read(d.join(name)).unwrap();
    assert_eq!(read("s1.csv"), read("s2.csv"));
    assert_eq!(read("m1.json"), read("m2.json"));
}

#[test]
fn default_output_is_displacements() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--system", "osc2dof", "--ic", "modal:0.3", "--t-end", "300", "--out", "x.csv"]);
    let text = std::fs::read_to_string(d.join("x.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,ch0,ch1"));
    // Decaying envelope: peak |x2| over successive 50 s windows shrinks.
    let x2: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap().abs()).collect();
    let peaks: Vec<f64> = x2.chunks(500).map(|c| c.iter().cloned().fold(0.0, f64::max)).collect();
    assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
}

#[test]
fn zero_initial_condition_stays_zero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--system", "osc2dof", "--ic", "zero", "--t-end", "5", "--out", "z.csv"]);
    let text = std::fs::read_to_string(d.join("z.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,ch0,ch1"));
    let mut rows = 0;
    for line in lines {
        let values: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(values[1..].iter().all(|&v| v == 0.0), "{line}");
        rows += 1;
    }
    assert_eq!(rows, 51);
}

#[test]
fn fit_on_zero_data_fails() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["simulate", "--system", "osc2dof", "--ic", "zero", "--t-end", "300", "--observe", "ch1", "--out", "z.csv"]);
    let out = fit(d, &["z.csv"], &["--out", "m.json"]);
    assert!(!out.status.success());
}

#[test]
fn verify_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["verify", "all", "--count", "5", "--seed", "3", "--out", "v.json"]);
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("v.json").exists());
}

#[test]
fn linear_backbone_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // First-order fits give a linear model whatever the data.
    ok(
        d,
        &["simulate", "--system", "osc2dof", "--ic", "modal:0.3", "--t-end", "300", "--observe", "ch1", "--out", "a.csv"],
    );
    let out = fit(d, &["a.csv"], &["--order-m", "1", "--order-r", "1", "--order-h", "1", "--out", "lin.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    ok(d, &["backbone", "--model", "lin.json", "--rho-max", "0.5", "--points", "11", "--out", "bb.csv"]);
    let text = std::fs::read_to_string(d.join("bb.csv")).unwrap();
    let freqs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(freqs.len(), 11);
    assert!(freqs.iter().all(|&f| f == freqs[0]), "{freqs:?}");
}

#[test]
fn optimize_delays_table() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stdout = ok(
        d,
        &["optimize-delays", "--eigs=-0.05+7.8i,-0.05-7.8i", "--dt", "0.01", "--kappa-max", "4", "--p-min", "6", "--p-max", "20", "--out", "grid.csv"],
    );
    assert!(stdout.contains("optimum"));
    let text = std::fs::read_to_string(d.join("grid.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("kappa,p,objective"));
    assert_eq!(text.lines().count(), 1 + 4 * 15);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("grid.json")).unwrap()).unwrap();
    let best = report["best"]["objective"].as_f64().unwrap();
    for line in text.lines().skip(1) {
        let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(v >= best);
    }
}

#[test]
fn bad_arguments_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dssm(dir.path(), &["predict", "--model", "missing.json", "--traj", "missing.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
