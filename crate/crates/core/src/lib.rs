//! Reduced-order models of nonlinear systems on spectral submanifolds,
//! identified from delay-embedded trajectory data.
//!
//! The tangent space of a delay-embedded invariant manifold at a fixed
//! point is spanned by the columns of a Vandermonde matrix built from the
//! continuous-time eigenvalues and the timelag (stacked with observable mode
//! shapes for vector observables). Projecting embedded data onto that basis
//! yields modal reduced coordinates, over which the manifold geometry and
//! reduced dynamics are fitted as polynomials and then brought into normal
//! form.
//!
//! All numeric code is generic over [`Real`]; the `*64` aliases at the crate
//! root fix the scalar to `f64`.

pub mod bench;
pub mod embedding;
pub mod error;
pub mod linalg;
pub mod normalform;
pub mod pipeline;
pub mod polyalg;
pub mod scalar;
pub mod ssmfit;

pub use error::{Error, Result};
pub use scalar::{Real, C, CMatrix, CVector};

pub use embedding::{DelayConfig, ModeGroup, Spectrum, TangentBasis};
pub use normalform::{NormalForm, PolarModel};
pub use pipeline::SsmModel;
pub use polyalg::{MonomialBasis, PolyMap};
pub use ssmfit::{DynamicsFit, GeometryFit, ReducedData};

pub type DelayConfig64 = DelayConfig<f64>;
pub type Spectrum64 = Spectrum<f64>;
pub type TangentBasis64 = TangentBasis<f64>;
pub type PolyMap64 = PolyMap<f64>;

pub type DelayConfig32 = DelayConfig<f32>;
pub type Spectrum32 = Spectrum<f32>;
pub type TangentBasis32 = TangentBasis<f32>;
pub type Trajectory64 = bench::Trajectory<f64>;
pub type OdeSystem64 = bench::OdeSystem<f64>;
pub type ReducedData64 = ReducedData<f64>;
pub type GeometryFit64 = GeometryFit<f64>;
pub type DynamicsFit64 = DynamicsFit<f64>;
pub type NormalForm64 = NormalForm<f64>;
pub type PolarModel64 = PolarModel<f64>;
pub type SsmModel64 = SsmModel<f64>;
