use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{cpowi, creal, CVector, Real, C};

/// Tag written into model files to pin the monomial ordering.
pub const ORDERING_TAG: &str = "graded-lex";

/// Exponent vectors of all `dim`-variate monomials with total degree in
/// `[l_min, l_max]`, in graded-lexicographic order: ascending total degree,
/// and within a degree descending powers of the first variable, then the
/// second, and so on (for two variables at degree 2: x², xy, y²).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BasisSpec", into = "BasisSpec")]
pub struct MonomialBasis {
    dim: usize,
    l_min: u32,
    l_max: u32,
    exponents: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

#[derive(Serialize, Deserialize)]
struct BasisSpec {
    dim: usize,
    l_min: u32,
    l_max: u32,
}

impl TryFrom<BasisSpec> for MonomialBasis {
    type Error = Error;
    fn try_from(s: BasisSpec) -> Result<Self> {
        MonomialBasis::new(s.dim, s.l_min, s.l_max)
    }
}

impl From<MonomialBasis> for BasisSpec {
    fn from(b: MonomialBasis) -> Self {
        BasisSpec {
            dim: b.dim,
            l_min: b.l_min,
            l_max: b.l_max,
        }
    }
}

/// `binomial(i + dim - 1, dim - 1)`: how many `dim`-variate monomials have
/// total degree exactly `i`.
pub fn monomials_at_order(dim: usize, order: u32) -> usize {
    if dim == 0 {
        return usize::from(order == 0);
    }
    let n = order as u128 + dim as u128 - 1;
    let k = (dim as u128 - 1).min(order as u128);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc as usize
}

fn push_degree(dim: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if prefix.len() + 1 == dim {
        prefix.push(degree);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first);
        push_degree(dim, degree - first, prefix, out);
        prefix.pop();
    }
}

impl MonomialBasis {
    /// Builds the basis; `l_min` may be 0 to include the constant monomial
    /// (used internally by truncated series arithmetic).
    pub fn new(dim: usize, l_min: u32, l_max: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("monomial dimension must be ≥ 1".into()));
        }
        if l_min > l_max {
            return Err(Error::InvalidArgument(format!(
                "monomial orders [{l_min}, {l_max}] are empty"
            )));
        }
        let mut exponents = Vec::new();
        for deg in l_min..=l_max {
            push_degree(dim, deg, &mut Vec::with_capacity(dim), &mut exponents);
        }
        let index = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Ok(Self {
            dim,
            l_min,
            l_max,
            exponents,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn l_min(&self) -> u32 {
        self.l_min
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn exponent(&self, i: usize) -> &[u32] {
        &self.exponents[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.exponents[i].iter().sum()
    }

    pub fn index_of(&self, exponents: &[u32]) -> Option<usize> {
        self.index.get(exponents).copied()
    }

    /// Index range of the monomials of total degree `order`.
    pub fn order_range(&self, order: u32) -> std::ops::Range<usize> {
        if order < self.l_min || order > self.l_max {
            return 0..0;
        }
        let start: usize = (self.l_min..order)
            .map(|o| monomials_at_order(self.dim, o))
            .sum();
        start..start + monomials_at_order(self.dim, order)
    }

    /// Evaluates every monomial at `xi`.
    pub fn eval<T: Real>(&self, xi: &[C<T>]) -> Result<CVector<T>> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "monomial basis has {} variables, point has {}",
                self.dim,
                xi.len()
            )));
        }
        let mut powers: Vec<Vec<C<T>>> = xi
            .iter()
            .map(|&x| {
                let mut p = Vec::with_capacity(self.l_max as usize + 1);
                let mut acc = creal(T::one());
                for _ in 0..=self.l_max {
                    p.push(acc);
                    acc *= x;
                }
                p
            })
            .collect();
        // Guard against 0·inf style artefacts when a coordinate is exactly zero.
        for (k, &x) in xi.iter().enumerate() {
            if x.re == T::zero() && x.im == T::zero() {
                for (j, p) in powers[k].iter_mut().enumerate() {
                    *p = if j == 0 { creal(T::one()) } else { creal(T::zero()) };
                }
            }
        }
        Ok(CVector::from_iterator(
            self.exponents.len(),
            self.exponents.iter().map(|e| {
                e.iter()
                    .enumerate()
                    .fold(creal(T::one()), |acc, (k, &ek)| acc * powers[k][ek as usize])
            }),
        ))
    }

    /// Evaluates the monomials at every column of `points` (dim × N); the
    /// result is `len() × N`.
    pub fn eval_columns<T: Real>(
        &self,
        points: &nalgebra::DMatrix<C<T>>,
    ) -> Result<nalgebra::DMatrix<C<T>>> {
        if points.nrows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "monomial basis has {} variables, data has {} rows",
                self.dim,
                points.nrows()
            )));
        }
        let mut out = nalgebra::DMatrix::zeros(self.len(), points.ncols());
        let mut col = vec![creal(T::zero()); self.dim];
        for j in 0..points.ncols() {
            for k in 0..self.dim {
                col[k] = points[(k, j)];
            }
            out.set_column(j, &self.eval(&col)?);
        }
        Ok(out)
    }
}

/// Reference evaluation of a single monomial by direct power products.
pub fn eval_monomial<T: Real>(exponents: &[u32], xi: &[C<T>]) -> C<T> {
    exponents
        .iter()
        .zip(xi)
        .fold(creal(T::one()), |acc, (&e, &x)| acc * cpowi(x, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn two_variables_degree_two() {
        let b = MonomialBasis::new(2, 2, 2).unwrap();
        assert_eq!(b.exponents(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn univariate_orders() {
        let b = MonomialBasis::new(1, 1, 5).unwrap();
        let e: Vec<Vec<u32>> = (1..=5).map(|i| vec![i]).collect();
        assert_eq!(b.exponents(), e.as_slice());
    }

    #[test]
    fn three_variables_up_to_cubic_count_matches_enumeration() {
        // Brute force: every exponent triple with 1 ≤ |e| ≤ 3.
        let mut brute = 0;
        for a in 0..=3u32 {
            for b in 0..=3u32 {
                for c in 0..=3u32 {
                    let s = a + b + c;
                    if (1..=3).contains(&s) {
                        brute += 1;
                    }
                }
            }
        }
        assert_eq!(brute, 19);
        assert_eq!(MonomialBasis::new(3, 1, 3).unwrap().len(), brute);
    }

    #[test]
    fn invalid_bounds_rejected() {
        assert!(MonomialBasis::new(2, 3, 2).is_err());
        assert!(MonomialBasis::new(0, 1, 2).is_err());
    }

    #[test]
    fn eval_hand_arithmetic() {
        let b = MonomialBasis::new(2, 1, 2).unwrap();
        let v = b.eval(&[cplx(2.0, 0.0), cplx(3.0, 0.0)]).unwrap();
        let re: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![2.0, 3.0, 4.0, 6.0, 9.0]);
    }

    #[test]
    fn eval_at_zero_is_zero() {
        let b = MonomialBasis::new(3, 1, 4).unwrap();
        let v = b.eval(&[cplx(0.0, 0.0); 3]).unwrap();
        assert!(v.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn order_ranges_partition_the_basis() {
        let b = MonomialBasis::new(3, 1, 4).unwrap();
        let mut next = 0;
        for o in 1..=4 {
            let r = b.order_range(o);
            assert_eq!(r.start, next);
            for i in r.clone() {
                assert_eq!(b.degree(i), o);
            }
            next = r.end;
        }
        assert_eq!(next, b.len());
    }

    #[test]
    fn serde_round_trip_rebuilds_index() {
        let b = MonomialBasis::new(4, 1, 3).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        let back: MonomialBasis = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.index_of(&[1, 1, 1, 0]), b.index_of(&[1, 1, 1, 0]));
    }
}
