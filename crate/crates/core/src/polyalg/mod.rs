//! Multivariate monomial bases, polynomial maps and least-squares solvers.

mod lstsq;
mod monomial;
mod polymap;
pub mod series;

pub use lstsq::{lstsq_min_norm, LstsqSolution};
pub use monomial::{eval_monomial, monomials_at_order, MonomialBasis, ORDERING_TAG};
pub use polymap::PolyMap;

use crate::error::Result;
use crate::scalar::{CVector, Real, C};

pub fn monomial_basis(dim: usize, l_min: u32, l_max: u32) -> Result<MonomialBasis> {
    if l_min < 1 {
        return Err(crate::error::Error::InvalidArgument(
            "lowest monomial order must be ≥ 1".into(),
        ));
    }
    MonomialBasis::new(dim, l_min, l_max)
}

pub fn eval_monomials<T: Real>(basis: &MonomialBasis, xi: &[C<T>]) -> Result<CVector<T>> {
    basis.eval(xi)
}

pub fn eval_polymap<T: Real>(map: &PolyMap<T>, xi: &[C<T>]) -> Result<CVector<T>> {
    map.eval(xi)
}

pub fn polymap_jacobian<T: Real>(map: &PolyMap<T>, xi: &[C<T>]) -> Result<crate::scalar::CMatrix<T>> {
    map.jacobian(xi)
}
