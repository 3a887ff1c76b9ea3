use serde::{Deserialize, Serialize};

use super::monomial::MonomialBasis;
use crate::error::{Error, Result};
use crate::scalar::{creal, CMatrix, CVector, Real, C};

/// Vector-valued polynomial `x ↦ coeffs · x^{l_min:l_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PolyMap<T: Real> {
    coeffs: CMatrix<T>,
    basis: MonomialBasis,
}

impl<T: Real> PolyMap<T> {
    pub fn new(coeffs: CMatrix<T>, basis: MonomialBasis) -> Result<Self> {
        if coeffs.ncols() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient matrix has {} columns, basis has {} monomials",
                coeffs.ncols(),
                basis.len()
            )));
        }
        Ok(Self { coeffs, basis })
    }

    pub fn zeros(n_out: usize, basis: MonomialBasis) -> Self {
        Self {
            coeffs: CMatrix::zeros(n_out, basis.len()),
            basis,
        }
    }

    /// Identity map on `dim` variables, expressed over orders `1..=l_max`.
    pub fn identity(dim: usize, l_max: u32) -> Result<Self> {
        let basis = MonomialBasis::new(dim, 1, l_max.max(1))?;
        let mut coeffs = CMatrix::zeros(dim, basis.len());
        for k in 0..dim {
            coeffs[(k, k)] = creal(T::one());
        }
        Ok(Self { coeffs, basis })
    }

    pub fn coeffs(&self) -> &CMatrix<T> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut CMatrix<T> {
        &mut self.coeffs
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn n_out(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Coefficient columns belonging to total degree `order`.
    pub fn order_block(&self, order: u32) -> CMatrix<T> {
        let r = self.basis.order_range(order);
        self.coeffs.columns(r.start, r.len()).into_owned()
    }

    pub fn coefficient(&self, row: usize, exponents: &[u32]) -> C<T> {
        self.basis
            .index_of(exponents)
            .map(|i| self.coeffs[(row, i)])
            .unwrap_or_else(|| creal(T::zero()))
    }

    pub fn eval(&self, xi: &[C<T>]) -> Result<CVector<T>> {
        Ok(&self.coeffs * self.basis.eval(xi)?)
    }

    pub fn eval_vec(&self, xi: &CVector<T>) -> Result<CVector<T>> {
        self.eval(xi.as_slice())
    }

    /// Evaluates at each column of a `dim × N` matrix.
    pub fn eval_columns(&self, points: &CMatrix<T>) -> Result<CMatrix<T>> {
        Ok(&self.coeffs * self.basis.eval_columns(points)?)
    }

    /// Exact Jacobian (`n_out × dim`) at `xi`.
    pub fn jacobian(&self, xi: &[C<T>]) -> Result<CMatrix<T>> {
        let dim = self.basis.dim();
        if xi.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "polynomial map has {} variables, point has {}",
                dim,
                xi.len()
            )));
        }
        let l_max = self.basis.l_max() as usize;
        let powers: Vec<Vec<C<T>>> = xi
            .iter()
            .map(|&x| {
                let mut p = Vec::with_capacity(l_max + 1);
                let mut acc = creal(T::one());
                for _ in 0..=l_max {
                    p.push(acc);
                    acc *= x;
                }
                p
            })
            .collect();
        let pw = |k: usize, e: u32| -> C<T> {
            if e == 0 {
                creal(T::one())
            } else {
                powers[k][e as usize]
            }
        };
        // dm[t][k] = ∂(monomial t)/∂x_k
        let mut dmono = CMatrix::<T>::zeros(self.basis.len(), dim);
        for (t, e) in self.basis.exponents().iter().enumerate() {
            for k in 0..dim {
                if e[k] == 0 {
                    continue;
                }
                let mut v = creal(T::from_u32(e[k]).unwrap()) * pw(k, e[k] - 1);
                for (j, &ej) in e.iter().enumerate() {
                    if j != k {
                        v *= pw(j, ej);
                    }
                }
                dmono[(t, k)] = v;
            }
        }
        Ok(&self.coeffs * dmono)
    }

    /// Re-expresses the map over a wider order range (zero-padding).
    pub fn widen(&self, l_min: u32, l_max: u32) -> Result<Self> {
        if l_min > self.basis.l_min() || l_max < self.basis.l_max() {
            return Err(Error::InvalidArgument(
                "widened order range must contain the original".into(),
            ));
        }
        let basis = MonomialBasis::new(self.basis.dim(), l_min, l_max)?;
        let mut coeffs = CMatrix::zeros(self.n_out(), basis.len());
        for (t, e) in self.basis.exponents().iter().enumerate() {
            let j = basis.index_of(e).expect("widened basis contains exponent");
            coeffs.set_column(j, &self.coeffs.column(t));
        }
        Ok(Self { coeffs, basis })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn identity_map_and_jacobian() {
        let id = PolyMap::<f64>::identity(3, 3).unwrap();
        let x = [cplx(0.3, -0.1), cplx(1.5, 0.0), cplx(-2.0, 0.7)];
        let y = id.eval(&x).unwrap();
        for k in 0..3 {
            assert!((y[k] - x[k]).norm() < 1e-15);
        }
        let j = id.jacobian(&x).unwrap();
        assert!((j - CMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn single_product_monomial() {
        let b = MonomialBasis::new(2, 1, 2).unwrap();
        let mut m = PolyMap::<f64>::zeros(1, b);
        let i = m.basis().index_of(&[1, 1]).unwrap();
        m.coeffs_mut()[(0, i)] = cplx(1.0, 0.0);
        let x = [cplx(2.0, 0.0), cplx(3.0, 0.0)];
        assert!((m.eval(&x).unwrap()[0] - cplx(6.0, 0.0)).norm() < 1e-15);
        let j = m.jacobian(&x).unwrap();
        assert!((j[(0, 0)] - cplx(3.0, 0.0)).norm() < 1e-15);
        assert!((j[(0, 1)] - cplx(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mismatched_coefficients_rejected() {
        let b = MonomialBasis::new(2, 1, 2).unwrap();
        assert!(PolyMap::<f64>::new(CMatrix::zeros(2, 4), b).is_err());
    }
}
