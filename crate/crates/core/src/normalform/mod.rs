//! Poincaré normal forms of fitted reduced dynamics, their polar form and
//! backbone curves.

mod check;
mod compute;
mod flow;
mod polar;
mod resonance;

pub use check::{conjugacy_residual, truncate_along_ray};
pub use compute::{compute_normal_form, conjugate_symmetrize, diagonal_map, NormalForm, NormalFormOptions};
pub use flow::{integrate_nf, invert_transform};
pub use polar::{integrate_polar, nf_to_polar, polar_from_map, BackbonePoint, PolarModel, PolarTerm};
pub use resonance::{resonant_monomials, ResonanceTolerance};
