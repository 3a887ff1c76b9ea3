//! Delay embedding of signals and the predicted tangent bases of embedded
//! invariant manifolds.

mod config;
mod genericity;
mod hankel;
mod optimize;
mod vandermonde;

pub use config::{DelayConfig, ModeGroup, Spectrum};
pub use genericity::{genericity_report, GenericityOptions, GenericityReport, ModeContent};
pub use hankel::{de_embed, hankel_embed};
pub use optimize::{optimize_delays, orthogonality_defect, DelayCandidate, DelaySearch};
pub use vandermonde::{tangent_basis, vandermonde, vandermonde_raw, TangentBasis};
