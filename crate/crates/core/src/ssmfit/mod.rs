//! Reduced coordinates, manifold geometry and reduced dynamics fitted from
//! delay-embedded data.

mod derivatives;
mod fit;
mod reduced;

pub use derivatives::estimate_derivatives;
pub use fit::{fit_dynamics, fit_geometry, DynamicsFit, GeometryFit};
pub use reduced::{
    embedded_fixed_point, enforce_conjugate_rows, reduced_coords, tail_mean, trim_start, ReducedData,
};
