use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::system::OdeSystem;
use crate::error::{Error, Result};
use crate::polyalg::{MonomialBasis, PolyMap};
use crate::scalar::{creal, lit, CMatrix, Real};

/// Two masses between walls, states `(x₁, x₂, ẋ₁, ẋ₂)`.
///
/// Unit masses and linear springs, so `K = ((2, −1), (−1, 2))` and damping
/// `0.03·K`. The left grounding spring exerts `x₁ + α x₁²` with `α = −2`,
/// and the coupling spring adds `β(x₂ − x₁)³`, `β = 1`, pulling the masses
/// together.
pub fn oscillator_2dof<T: Real>() -> OdeSystem<T> {
    let alpha = -2.0;
    let beta = 1.0;
    let k = [[2.0, -1.0], [-1.0, 2.0]];
    let a = DMatrix::from_fn(4, 4, |i, j| match (i, j) {
        (0, 2) | (1, 3) => T::one(),
        (2..=3, 0..=1) => lit(-k[i - 2][j]),
        (2..=3, 2..=3) => lit(-0.03 * k[i - 2][j - 2]),
        _ => T::zero(),
    });
    let basis = MonomialBasis::new(4, 2, 3).expect("valid basis");
    let mut g = CMatrix::zeros(4, basis.len());
    let mut set = |row: usize, e: [u32; 4], c: f64| {
        let t = basis.index_of(&e).expect("monomial in basis");
        g[(row, t)] += creal(lit::<T>(c));
    };
    set(2, [2, 0, 0, 0], -alpha);
    // (x₂ − x₁)³ = x₂³ − 3x₁x₂² + 3x₁²x₂ − x₁³
    for (e, c) in [([0, 3, 0, 0], 1.0), ([1, 2, 0, 0], -3.0), ([2, 1, 0, 0], 3.0), ([3, 0, 0, 0], -1.0)] {
        set(2, e, beta * c);
        set(3, e, -beta * c);
    }
    let g = PolyMap::new(g, basis).expect("consistent shapes");
    OdeSystem::new(a, Some(g), "two-mass oscillator, quadratic softening ground spring, cubic coupling")
        .expect("valid system")
}

/// Parameters of [`multimode_synthetic`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultimodeParams {
    /// Undamped natural frequencies (rad/s).
    pub frequencies: Vec<f64>,
    /// Decay rates `−Re λ` (1/s).
    pub decay_rates: Vec<f64>,
    /// Overall scale of the quartic potential couplings.
    pub coupling: f64,
    pub seed: u64,
}

impl Default for MultimodeParams {
    fn default() -> Self {
        Self {
            frequencies: vec![1.0, 2.8, 5.6],
            decay_rates: vec![0.01, 0.03, 0.06],
            coupling: 0.5,
            seed: 7,
        }
    }
}

/// Modal oscillators `q̈_k + 2δ_k q̇_k + ω_k² q_k + ∂V/∂q_k = 0` coupled
/// through the quartic potential `V = ¼ Σ_ij c_ij q_i² q_j²` with seeded
/// positive `c_ij`. Since `V ≥ 0` the energy decays and the origin attracts
/// every initial condition. States are `(q, q̇)`.
pub fn multimode_synthetic<T: Real>(params: &MultimodeParams) -> Result<OdeSystem<T>> {
    let n = params.frequencies.len();
    if n == 0 || params.decay_rates.len() != n {
        return Err(Error::InvalidArgument(
            "need one decay rate per frequency and at least one pair".into(),
        ));
    }
    for (&w, &d) in params.frequencies.iter().zip(&params.decay_rates) {
        if !(w > d && d >= 0.0) {
            return Err(Error::InvalidArgument(format!("mode ω = {w}, δ = {d} is not underdamped")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut c = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = params.coupling * rng.random_range(0.2..1.0);
            c[i][j] = v;
            c[j][i] = v;
        }
    }
    let a = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i < n {
            if j == n + i {
                T::one()
            } else {
                T::zero()
            }
        } else if j == i - n {
            lit(-params.frequencies[i - n].powi(2))
        } else if j == i {
            lit(-2.0 * params.decay_rates[i - n])
        } else {
            T::zero()
        }
    });
    if params.coupling == 0.0 {
        return OdeSystem::linear(a, "uncoupled modal oscillators");
    }
    let basis = MonomialBasis::new(2 * n, 3, 3)?;
    let mut g = CMatrix::zeros(2 * n, basis.len());
    // ∂V/∂q_k = Σ_j c_kj q_k q_j²
    for k in 0..n {
        for (j, cj) in c[k].iter().enumerate() {
            let mut e = vec![0u32; 2 * n];
            e[k] += 1;
            e[j] += 2;
            let t = basis.index_of(&e).expect("cubic monomial");
            g[(n + k, t)] -= creal(lit::<T>(*cj));
        }
    }
    OdeSystem::new(
        a,
        Some(PolyMap::new(g, basis)?),
        format!("{n} modal oscillators with quartic potential coupling (seed {})", params.seed),
    )
}

/// One sloshing mode of a rectangular tank.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SloshingMode {
    pub k: usize,
    /// Natural frequency (rad/s).
    pub omega: f64,
    /// `cos(kπx/w)` at the requested grid points.
    pub shape: Vec<f64>,
}

/// Linear potential-flow sloshing modes of a tank of width `w` filled to
/// depth `h`: `ω_k² = gπk/w · tanh(πkh/w)`, shapes `cos(kπx/w)`.
pub fn sloshing_spectrum(w: f64, h: f64, g: f64, k_max: usize, grid: &[f64]) -> Result<Vec<SloshingMode>> {
    if !(w > 0.0 && h > 0.0 && g > 0.0) {
        return Err(Error::InvalidArgument("tank dimensions and gravity must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    Ok((1..=k_max)
        .map(|k| {
            let kf = k as f64;
            SloshingMode {
                k,
                omega: (g * pi * kf / w * (pi * kf * h / w).tanh()).sqrt(),
                shape: grid.iter().map(|&x| (kf * pi * x / w).cos()).collect(),
            }
        })
        .collect())
}
