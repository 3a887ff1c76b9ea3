use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::compute::NormalForm;
use crate::bench::{dopri5, Tolerances};
use crate::error::{Error, Result};
use crate::polyalg::PolyMap;
use crate::scalar::{cabs, cexp, cplx, lit, to_f64, Real, C};

/// One term `c·ρ^a·e^{iψ}` of `ρ̇_k + iρ_k θ̇_k`, where `ψ = Σ_j n_j θ_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PolarTerm<T: Real> {
    pub coeff: C<T>,
    /// Amplitude exponent per pair.
    pub rho_powers: Vec<u32>,
    /// Phase multiplier `n_j` per pair (all zero for amplitude-only terms).
    pub phase: Vec<i32>,
}

impl<T: Real> PolarTerm<T> {
    pub fn is_phase_free(&self) -> bool {
        self.phase.iter().all(|&n| n == 0)
    }

    fn rotated(&self, theta: &[T]) -> C<T> {
        let psi = self
            .phase
            .iter()
            .zip(theta)
            .fold(T::zero(), |a, (&n, &th)| a + T::from_i32(n).unwrap() * th);
        self.coeff * cexp(cplx(T::zero(), psi))
    }

    /// `ρ^a` with the exponent of pair `skip` lowered by one.
    fn amplitude(&self, rho: &[T], skip: Option<usize>) -> T {
        self.rho_powers.iter().enumerate().fold(T::one(), |acc, (j, &a)| {
            let e = a as i32 - i32::from(skip == Some(j));
            acc * rho[j].powi(e)
        })
    }
}

/// Amplitude–phase form of a normal form whose modes are conjugate pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PolarModel<T: Real> {
    /// `(primary, conjugate)` mode indices; pair `j` has amplitude `ρ_j`.
    pub pairs: Vec<(usize, usize)>,
    /// Eigenvalue of each pair's primary mode.
    pub lambdas: Vec<C<T>>,
    /// Terms of `ρ̇_j + iρ_j θ̇_j` for every pair.
    pub equations: Vec<Vec<PolarTerm<T>>>,
}

/// Polar form of a normal form.
pub fn nf_to_polar<T: Real>(nf: &NormalForm<T>) -> Result<PolarModel<T>> {
    polar_from_map(&nf.n, &nf.lambdas, &nf.conjugation)
}

/// Polar form of `ζ̇ = N(ζ)` given the mode eigenvalues and conjugation.
pub fn polar_from_map<T: Real>(n: &PolyMap<T>, lambdas: &[C<T>], conjugation: &[usize]) -> Result<PolarModel<T>> {
    let d = lambdas.len();
    if n.dim() != d || n.n_out() != d || conjugation.len() != d {
        return Err(Error::DimensionMismatch("normal form and spectrum sizes differ".into()));
    }
    let mut pairs = Vec::new();
    let mut pair_of = vec![(usize::MAX, true); d];
    for k in 0..d {
        let c = conjugation[k];
        if c == k {
            if lambdas[k].im == T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "mode {k} is real; the polar form needs conjugate pairs"
                )));
            }
            return Err(Error::UnpairedMode(k));
        }
        if lambdas[k].im > T::zero() {
            pair_of[k] = (pairs.len(), true);
            pair_of[c] = (pairs.len(), false);
            pairs.push((k, c));
        }
    }
    let np = pairs.len();
    let mut equations = Vec::with_capacity(np);
    for (pi, &(k, _)) in pairs.iter().enumerate() {
        let mut acc: BTreeMap<(Vec<u32>, Vec<i32>), C<T>> = BTreeMap::new();
        for (t, e) in n.basis().exponents().iter().enumerate() {
            let c = n.coeffs()[(k, t)];
            if cabs(c) == T::zero() {
                continue;
            }
            let mut a = vec![0u32; np];
            let mut ph = vec![0i32; np];
            for (j, &ej) in e.iter().enumerate() {
                let (p, primary) = pair_of[j];
                a[p] += ej;
                ph[p] += if primary { ej as i32 } else { -(ej as i32) };
            }
            ph[pi] -= 1;
            *acc.entry((a, ph)).or_insert_with(|| cplx(T::zero(), T::zero())) += c;
        }
        equations.push(
            acc.into_iter()
                .map(|((rho_powers, phase), coeff)| PolarTerm {
                    coeff,
                    rho_powers,
                    phase,
                })
                .collect(),
        );
    }
    Ok(PolarModel {
        lambdas: pairs.iter().map(|&(k, _)| lambdas[k]).collect(),
        pairs,
        equations,
    })
}

impl<T: Real> PolarModel<T> {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    /// `(ρ̇, θ̇)` at the given amplitudes and phases.
    pub fn rhs(&self, rho: &[T], theta: &[T]) -> (Vec<T>, Vec<T>) {
        let mut rdot = vec![T::zero(); self.n_pairs()];
        let mut tdot = vec![T::zero(); self.n_pairs()];
        for (k, eq) in self.equations.iter().enumerate() {
            for term in eq {
                let z = term.rotated(theta);
                rdot[k] += z.re * term.amplitude(rho, None);
                tdot[k] += z.im * term.amplitude(rho, Some(k));
            }
        }
        (rdot, tdot)
    }

    /// Instantaneous frequency and damping `ρ̇_k/ρ_k` of pair `k` along a
    /// grid of its amplitude, other amplitudes held at `others`.
    ///
    /// Phase-free terms give the `frequency` and `damping` columns. Phase
    /// coupled terms are excluded from those and reported as the worst-case
    /// band they can add. At `ρ_k = 0` the damping is the limit value.
    pub fn backbone(&self, k: usize, rho_grid: &[T], others: &[T]) -> Result<Vec<BackbonePoint<T>>> {
        if k >= self.n_pairs() {
            return Err(Error::InvalidArgument(format!("pair {k} out of range")));
        }
        if others.len() != self.n_pairs() {
            return Err(Error::DimensionMismatch("one amplitude per pair required".into()));
        }
        let mut out = Vec::with_capacity(rho_grid.len());
        for &r in rho_grid {
            let mut rho = others.to_vec();
            rho[k] = r;
            let mut p = BackbonePoint {
                rho: r,
                frequency: T::zero(),
                damping: T::zero(),
                frequency_band: T::zero(),
                damping_band: T::zero(),
            };
            for term in &self.equations[k] {
                let amp = term.amplitude(&rho, Some(k));
                if term.is_phase_free() {
                    p.frequency += term.coeff.im * amp;
                    p.damping += term.coeff.re * amp;
                } else {
                    let b = cabs(term.coeff) * amp.abs();
                    p.frequency_band += b;
                    p.damping_band += b;
                }
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Human-readable equations, e.g. `ρ̇1 = -0.0148 ρ1 - 0.0014 ρ1^3`.
    pub fn format(&self, precision: usize) -> String {
        let mut psis: Vec<Vec<i32>> = Vec::new();
        let mut s = String::new();
        for (k, eq) in self.equations.iter().enumerate() {
            let mut rho_terms = Vec::new();
            let mut theta_terms = Vec::new();
            for term in eq {
                let mut powers: Vec<i32> = term.rho_powers.iter().map(|&a| a as i32).collect();
                let rho_part = monomial_label(&powers);
                powers[k] -= 1;
                let theta_part = monomial_label(&powers);
                if term.is_phase_free() {
                    rho_terms.push((to_f64(term.coeff.re), rho_part, String::new()));
                    theta_terms.push((to_f64(term.coeff.im), theta_part, String::new()));
                } else {
                    let (phase, sign) = canonical_phase(&term.phase);
                    let idx = psis.iter().position(|p| *p == phase).unwrap_or_else(|| {
                        psis.push(phase.clone());
                        psis.len() - 1
                    });
                    // c·e^{iψ'} with ψ' = sign·ψ.
                    let mag = to_f64(cabs(term.coeff));
                    let arg = to_f64(term.coeff.im.atan2(term.coeff.re));
                    let (cos_mul, sin_mul, off) = if sign > 0 { (1.0, 1.0, arg) } else { (1.0, -1.0, -arg) };
                    let off = wrap_pi(off);
                    let shift = fmt_shift(off, precision);
                    rho_terms.push((mag * cos_mul, rho_part, format!("cos(ψ{}{shift})", idx + 1)));
                    theta_terms.push((mag * sin_mul, theta_part, format!("sin(ψ{}{shift})", idx + 1)));
                }
            }
            let _ = writeln!(s, "ρ̇{} = {}", k + 1, join_terms(&rho_terms, precision));
            let _ = writeln!(s, "θ̇{} = {}", k + 1, join_terms(&theta_terms, precision));
        }
        for (i, p) in psis.iter().enumerate() {
            let _ = writeln!(s, "ψ{} = {}", i + 1, phase_label(p));
        }
        s
    }
}

/// One row of [`PolarModel::backbone`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BackbonePoint<T: Real> {
    pub rho: T,
    pub frequency: T,
    pub damping: T,
    /// Largest shift of `frequency` the phase-coupled terms can produce.
    pub frequency_band: T,
    /// Largest shift of `damping` the phase-coupled terms can produce.
    pub damping_band: T,
}

fn wrap_pi(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    if y <= -std::f64::consts::PI {
        y += tau;
    }
    y
}

fn fmt_shift(off: f64, precision: usize) -> String {
    if off == 0.0 {
        String::new()
    } else if off > 0.0 {
        format!(" + {:.*}", precision, off)
    } else {
        format!(" - {:.*}", precision, -off)
    }
}

/// Phase vector with its last nonzero entry made positive, and the sign
/// that was applied.
fn canonical_phase(p: &[i32]) -> (Vec<i32>, i32) {
    let last = p.iter().rev().find(|&&n| n != 0).copied().unwrap_or(1);
    if last > 0 {
        (p.to_vec(), 1)
    } else {
        (p.iter().map(|&n| -n).collect(), -1)
    }
}

fn phase_label(p: &[i32]) -> String {
    let mut parts: Vec<(i32, usize)> = p.iter().enumerate().filter(|(_, &n)| n != 0).map(|(j, &n)| (n, j)).collect();
    parts.sort_by_key(|&(n, j)| (n < 0, j));
    let mut s = String::new();
    for (i, (n, j)) in parts.into_iter().enumerate() {
        let a = n.abs();
        let coef = if a == 1 { String::new() } else { a.to_string() };
        if i == 0 {
            if n < 0 {
                s.push('-');
            }
        } else {
            s.push_str(if n < 0 { " - " } else { " + " });
        }
        let _ = write!(s, "{coef}θ{}", j + 1);
    }
    s
}

fn monomial_label(powers: &[i32]) -> String {
    let mut s = String::new();
    for (j, &a) in powers.iter().enumerate() {
        match a {
            0 => {}
            1 => {
                let _ = write!(s, " ρ{}", j + 1);
            }
            _ => {
                let _ = write!(s, " ρ{}^{}", j + 1, a);
            }
        }
    }
    s
}

fn join_terms(terms: &[(f64, String, String)], precision: usize) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (c, mono, trig)) in terms.iter().enumerate() {
        let mag = format!("{:.*}", precision, c.abs());
        let body = if trig.is_empty() {
            format!("{mag}{mono}")
        } else {
            format!("{mag}{mono} {trig}")
        };
        if i == 0 {
            if *c < 0.0 {
                s.push('-');
            }
            s.push_str(&body);
        } else {
            s.push_str(if *c < 0.0 { " - " } else { " + " });
            s.push_str(&body);
        }
    }
    s
}

/// Integrates the polar equations; returns `(ρ, θ)` at every output time
/// (rows are pairs).
pub fn integrate_polar<T: Real>(
    model: &PolarModel<T>,
    rho0: &[T],
    theta0: &[T],
    times: &[T],
    rtol: Option<T>,
) -> Result<(nalgebra::DMatrix<T>, nalgebra::DMatrix<T>)> {
    let np = model.n_pairs();
    if rho0.len() != np || theta0.len() != np {
        return Err(Error::DimensionMismatch("one amplitude and phase per pair required".into()));
    }
    let mut x0 = DVector::zeros(2 * np);
    for k in 0..np {
        x0[k] = rho0[k];
        x0[np + k] = theta0[k];
    }
    let tol = Tolerances::with_rtol(rtol.unwrap_or_else(|| lit(1e-10)));
    let states = dopri5(
        |_, x| {
            let (r, t) = model.rhs(&x.as_slice()[..np], &x.as_slice()[np..]);
            DVector::from_iterator(2 * np, r.into_iter().chain(t))
        },
        &x0,
        times,
        tol,
    )?;
    let rho = nalgebra::DMatrix::from_fn(np, times.len(), |k, j| states[j][k]);
    let theta = nalgebra::DMatrix::from_fn(np, times.len(), |k, j| states[j][np + k]);
    Ok((rho, theta))
}
