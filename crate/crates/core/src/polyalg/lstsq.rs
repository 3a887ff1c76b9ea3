use crate::error::{Error, Result};
use crate::linalg::{frobenius, pinv, DEFAULT_RCOND};
use crate::scalar::{lit, CMatrix, Real};

#[derive(Debug, Clone)]
pub struct LstsqSolution<T: Real> {
    /// Minimizer of `‖X·A − B‖_F` of minimum Frobenius norm.
    pub x: CMatrix<T>,
    /// `‖X·A − B‖_F`.
    pub residual: T,
}

/// Solves `X·A ≈ B` (A: k×n, B: m×n) in the least-squares sense through an
/// SVD pseudoinverse of `A` with relative cutoff `rcond` (default `1e-10`).
pub fn lstsq_min_norm<T: Real>(
    a: &CMatrix<T>,
    b: &CMatrix<T>,
    rcond: Option<T>,
) -> Result<LstsqSolution<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("least-squares operands".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "least squares: A has {} columns, B has {}",
            a.ncols(),
            b.ncols()
        )));
    }
    let a_pinv = pinv(a, rcond.unwrap_or_else(|| lit(DEFAULT_RCOND)))?;
    let x = b * a_pinv;
    let residual = frobenius(&(&x * a - b));
    Ok(LstsqSolution { x, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix<f64> {
        CMatrix::from_fn(r, c, |_, _| cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn identity_design_returns_rhs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random(&mut rng, 3, 5);
        let s = lstsq_min_norm(&CMatrix::identity(5, 5), &b, None).unwrap();
        assert!(frobenius(&(s.x - b)) < 1e-13);
    }

    #[test]
    fn overdetermined_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random(&mut rng, 4, 30);
        let b = random(&mut rng, 2, 30);
        let s = lstsq_min_norm(&a, &b, None).unwrap();
        // Normal equations: X (A Aᴴ) = B Aᴴ.
        let gram = &a * a.adjoint();
        let x_ne = &b * a.adjoint() * gram.try_inverse().unwrap();
        assert!(frobenius(&(s.x - x_ne)) < 1e-10);
    }

    #[test]
    fn mismatched_columns_rejected() {
        let a = CMatrix::<f64>::zeros(2, 3);
        let b = CMatrix::<f64>::zeros(2, 4);
        assert!(lstsq_min_norm(&a, &b, None).is_err());
    }
}
