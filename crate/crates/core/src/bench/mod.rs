//! Benchmark systems, an adaptive integrator and brute-force oracles.

mod integrate;
pub mod oracles;
mod system;
mod systems;
pub mod verify;

pub use integrate::{dopri5, Tolerances};
pub use oracles::{linearize_embedded_flow, EmbeddedLinearization, Observable};
pub use system::{linear_observable, modal_initial_condition, OdeSystem, Trajectory};
pub use verify::{verify_theorem1, verify_theorem2, verify_theorem3, SuiteReport};
pub use systems::{multimode_synthetic, oscillator_2dof, sloshing_spectrum, MultimodeParams, SloshingMode};
