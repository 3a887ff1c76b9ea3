//! Randomized checks of the tangent-space theorems, shared by the `verify`
//! command and the acceptance tests.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::oracles::{
    estimate_tangent_space, linearize_embedded_flow, random_observable, random_stable_system, random_subspace_point,
    simulate_linear, Observable,
};
use super::system::OdeSystem;
use crate::embedding::{hankel_embed, tangent_basis, vandermonde, DelayConfig, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::{max_principal_angle, vector_angle};
use crate::scalar::{cabs, to_complex_matrix, CMatrix, C};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: String, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value < tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub seconds: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest value of every check whose name starts with `prefix`.
    pub fn worst(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .fold(0.0, |m, c| m.max(c.value))
    }
}

/// Randomly drawn linear system, observable and delay configuration.
pub struct Case {
    pub system: OdeSystem<f64>,
    pub observable: Observable<f64>,
    pub config: DelayConfig<f64>,
    /// Slow eigenvalues, conjugate pairs adjacent.
    pub slow: Vec<C<f64>>,
}

impl Case {
    pub fn random(rng: &mut ChaCha8Rng, q: usize) -> Result<Self> {
        let n = [2, 4, 6][rng.random_range(0..3)];
        let d: usize = if n == 2 { 2 } else { [2, 4][rng.random_range(0..2)] };
        let system = random_stable_system(rng, n)?;
        let observable = random_observable(rng, n, q, 0.5);
        let tau = rng.random_range(0.05..0.5);
        let p = rng.random_range(d.div_ceil(q) + 1..=d + 6);
        let config = DelayConfig::new(1, tau, p)?;
        let slow = slowest_pairs(&system, d / 2)?;
        Ok(Self {
            system,
            observable,
            config,
            slow,
        })
    }

    /// Mode shapes `Dμ(0)·w_k` of the slow modes.
    pub fn spectrum(&self) -> Result<Spectrum<f64>> {
        let (lam, w) = self.system.linear_spectrum()?;
        let grad = to_complex_matrix(&self.observable.gradient(&DVector::zeros(self.system.dim())));
        let cols: Vec<usize> = self.slow.iter().map(|s| nearest(&lam, *s)).collect();
        let shapes = CMatrix::from_fn(grad.nrows(), cols.len(), |i, k| (grad.row(i) * w.column(cols[k]))[0]);
        if self.observable.channels() == 1 {
            Spectrum::scalar(self.slow.clone())
        } else {
            Spectrum::new(self.slow.clone(), Some(shapes))
        }
    }
}

fn nearest(lam: &[C<f64>], s: C<f64>) -> usize {
    (0..lam.len())
        .min_by(|&a, &b| cabs(lam[a] - s).total_cmp(&cabs(lam[b] - s)))
        .expect("non-empty spectrum")
}

/// The `pairs` least damped conjugate pairs, each as `(λ, λ̄)`.
fn slowest_pairs(system: &OdeSystem<f64>, pairs: usize) -> Result<Vec<C<f64>>> {
    let (lam, _) = system.linear_spectrum()?;
    let mut upper: Vec<C<f64>> = lam.into_iter().filter(|z| z.im > 0.0).collect();
    upper.sort_by(|a, b| b.re.total_cmp(&a.re));
    if upper.len() < pairs {
        return Err(Error::InvalidArgument("not enough oscillatory modes".into()));
    }
    Ok(upper[..pairs].iter().flat_map(|&z| [z, z.conj()]).collect())
}

/// Tangent space estimated from low-amplitude data on the slow subspace.
fn data_tangent(case: &Case, rng: &mut ChaCha8Rng, amplitude: f64) -> Result<CMatrix<f64>> {
    let x0 = random_subspace_point(rng, &case.system, &case.slow, amplitude)?;
    let n = case.config.window() + 60;
    let states = simulate_linear(&case.system.a, &x0, case.config.dt, n);
    let q = case.observable.channels();
    let mut signal = DMatrix::zeros(q, n);
    for j in 0..n {
        signal.set_column(j, &case.observable.eval(&states.column(j).into_owned()));
    }
    let y = hankel_embed(&signal, &case.config)?;
    estimate_tangent_space(&y, None, case.slow.len())
}

const EPS: f64 = 1e-4;
const DATA_AMPLITUDE: f64 = 1e-8;

/// Scalar observables: the embedded image of the slow subspace, both from
/// the sampling-map Jacobian and from low-amplitude data, is `range(V)`.
pub fn verify_theorem1(count: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for i in 0..count {
        let case = Case::random(&mut rng, 1)?;
        let v = vandermonde(&case.spectrum()?, &case.config)?;
        let lin = linearize_embedded_flow(&case.system, &case.observable, &case.config, &case.slow, EPS)?;
        let jac = max_principal_angle(&to_complex_matrix(&lin.tangent), &v)?;
        checks.push(Check::new(format!("jacobian-angle/{i}"), jac, tol));
        let est = data_tangent(&case, &mut rng, DATA_AMPLITUDE)?;
        checks.push(Check::new(format!("data-angle/{i}"), max_principal_angle(&est, &v)?, tol));
    }
    Ok(report("theorem1", seed, count, checks, start))
}

/// The linearized embedded flow has the slow eigenvalues, with the
/// Vandermonde columns as eigenvectors.
pub fn verify_theorem2(count: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for i in 0..count {
        let case = Case::random(&mut rng, 1)?;
        let v = vandermonde(&case.spectrum()?, &case.config)?;
        let lin = linearize_embedded_flow(&case.system, &case.observable, &case.config, &case.slow, EPS)?;
        let mut eig_err: f64 = 0.0;
        let mut vec_err: f64 = 0.0;
        for (k, &lam) in case.slow.iter().enumerate() {
            let j = nearest(&lin.eigenvalues, lam);
            eig_err = eig_err.max(cabs(lin.eigenvalues[j] - lam));
            let u = lin.eigenvectors.column(j).into_owned();
            vec_err = vec_err.max(vector_angle(&u, &v.column(k).into_owned()));
        }
        checks.push(Check::new(format!("eigenvalue-error/{i}"), eig_err, tol));
        checks.push(Check::new(format!("eigenvector-angle/{i}"), vec_err, tol));
    }
    Ok(report("theorem2", seed, count, checks, start))
}

/// Vector observables: the embedded tangent space is the range of the
/// mode-shape-weighted Vandermonde stack, including the repeated-channel
/// case `(V; V)`.
pub fn verify_theorem3(count: usize, seed: u64, tol: f64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();
    for i in 0..count {
        let q = rng.random_range(2..=3);
        let mut case = Case::random(&mut rng, q)?;
        if i % 4 == 3 {
            // Two copies of one scalar channel.
            let row = case.observable.map.coeffs().row(0).into_owned();
            let mut coeffs = case.observable.map.coeffs().clone().rows(0, 2).into_owned();
            coeffs.set_row(1, &row);
            case.observable.map = crate::polyalg::PolyMap::new(coeffs, case.observable.map.basis().clone())?;
        }
        let spectrum = case.spectrum()?;
        let t = tangent_basis(&spectrum, &case.config)?;
        if i % 4 == 3 {
            let v = vandermonde(&spectrum, &case.config)?;
            let mut vv = CMatrix::zeros(2 * v.nrows(), v.ncols());
            vv.rows_mut(0, v.nrows()).copy_from(&v);
            vv.rows_mut(v.nrows(), v.nrows()).copy_from(&v);
            checks.push(Check::new(format!("stack-vs-VV/{i}"), max_principal_angle(&t.matrix, &vv)?, tol));
        }
        let lin = linearize_embedded_flow(&case.system, &case.observable, &case.config, &case.slow, EPS)?;
        let jac = max_principal_angle(&to_complex_matrix(&lin.tangent), &t.matrix)?;
        checks.push(Check::new(format!("jacobian-angle/{i}"), jac, tol));
        let est = data_tangent(&case, &mut rng, DATA_AMPLITUDE)?;
        checks.push(Check::new(format!("data-angle/{i}"), max_principal_angle(&est, &t.matrix)?, tol));
    }
    Ok(report("theorem3", seed, count, checks, start))
}

fn report(suite: &str, seed: u64, cases: usize, checks: Vec<Check>, start: Instant) -> SuiteReport {
    SuiteReport {
        suite: suite.to_string(),
        seed,
        cases,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for r in [
            verify_theorem1(5, 1, 1e-6).unwrap(),
            verify_theorem2(5, 2, 1e-6).unwrap(),
            verify_theorem3(8, 3, 1e-6).unwrap(),
        ] {
            let bad: Vec<_> = r.failures().collect();
            assert!(bad.is_empty(), "{}: {bad:?}", r.suite);
        }
    }
}
