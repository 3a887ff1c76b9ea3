use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::reduced::ReducedData;
use crate::error::{Error, Result};
use crate::linalg::frobenius;
use crate::polyalg::{lstsq_min_norm, MonomialBasis, PolyMap};
use crate::scalar::{to_complex_matrix, Real};

/// Polynomial graph `y − q_fix ≈ M·ξ^{1:m}` of the embedded manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct GeometryFit<T: Real> {
    pub map: PolyMap<T>,
    pub order: u32,
    /// `‖M·Ξ^{1:m} − (Y − q_fix)‖_F / ‖Y − q_fix‖_F`.
    pub residual: T,
}

/// Reduced dynamics `ξ̇ ≈ G·ξ^{1:r}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DynamicsFit<T: Real> {
    pub map: PolyMap<T>,
    pub order: u32,
    /// `‖G·Ξ^{1:r} − Ξ̇‖_F / ‖Ξ̇‖_F` (0 for vanishing `Ξ̇`).
    pub residual: T,
}

fn relative<T: Real>(num: T, den: T) -> T {
    if den > T::zero() {
        num / den
    } else {
        num
    }
}

/// Least-squares manifold parametrization over monomials of orders `1..=m`.
/// `y` must hold the same snapshots (columns) as `reduced.xi`.
pub fn fit_geometry<T: Real>(y: &DMatrix<T>, reduced: &ReducedData<T>, m: u32) -> Result<GeometryFit<T>> {
    if m < 1 {
        return Err(Error::InvalidArgument("geometry order m must be ≥ 1".into()));
    }
    if y.ncols() != reduced.len() || y.nrows() != reduced.q_fix.len() {
        return Err(Error::DimensionMismatch(format!(
            "data is {}×{}, reduced coordinates cover {} snapshots of {} rows",
            y.nrows(),
            y.ncols(),
            reduced.len(),
            reduced.q_fix.len()
        )));
    }
    let basis = MonomialBasis::new(reduced.dim(), 1, m)?;
    if reduced.len() < basis.len() {
        log::warn!(
            "geometry fit underdetermined: {} snapshots for {} monomials",
            reduced.len(),
            basis.len()
        );
    }
    let mut centered = y.clone();
    for mut col in centered.column_iter_mut() {
        col -= &reduced.q_fix;
    }
    let target = to_complex_matrix(&centered);
    let design = basis.eval_columns(&reduced.xi)?;
    let sol = lstsq_min_norm(&design, &target, None)?;
    Ok(GeometryFit {
        map: PolyMap::new(sol.x, basis)?,
        order: m,
        residual: relative(sol.residual, frobenius(&target)),
    })
}

/// Least-squares reduced dynamics over monomials of orders `1..=r`.
pub fn fit_dynamics<T: Real>(reduced: &ReducedData<T>, r: u32) -> Result<DynamicsFit<T>> {
    if r < 1 {
        return Err(Error::InvalidArgument("dynamics order r must be ≥ 1".into()));
    }
    let xi_dot = reduced
        .xi_dot
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("derivatives not estimated".into()))?;
    let basis = MonomialBasis::new(reduced.dim(), 1, r)?;
    if reduced.len() < basis.len() {
        log::warn!(
            "dynamics fit underdetermined: {} snapshots for {} monomials",
            reduced.len(),
            basis.len()
        );
    }
    let design = basis.eval_columns(&reduced.xi)?;
    let sol = lstsq_min_norm(&design, xi_dot, None)?;
    Ok(DynamicsFit {
        map: PolyMap::new(sol.x, basis)?,
        order: r,
        residual: relative(sol.residual, frobenius(xi_dot)),
    })
}
