//! Dense multivariate polynomials truncated at a fixed total degree, with the
//! product, derivative and composition operations the normal-form recursion
//! needs.

use std::collections::HashMap;

use super::monomial::MonomialBasis;
use super::polymap::PolyMap;
use crate::error::{Error, Result};
use crate::scalar::{creal, Real, C};

/// Truncated polynomial ring in `dim` variables up to total degree `order`.
#[derive(Debug, Clone)]
pub struct SeriesRing {
    basis: MonomialBasis,
    order: u32,
    /// `partners[i]` lists `(j, k)` with `e_i + e_j = e_k` and degree ≤ order.
    partners: Vec<Vec<(usize, usize)>>,
    /// `lower[i][v]` is the index of `e_i − unit_v` when `e_i[v] > 0`.
    lower: Vec<Vec<Option<usize>>>,
}

pub type Series<T> = Vec<C<T>>;

impl SeriesRing {
    pub fn new(dim: usize, order: u32) -> Result<Self> {
        let basis = MonomialBasis::new(dim, 0, order)?;
        let n = basis.len();
        let mut partners = vec![Vec::new(); n];
        let mut sum = vec![0u32; dim];
        for i in 0..n {
            let di = basis.degree(i);
            for j in 0..n {
                if di + basis.degree(j) > order {
                    // Basis is graded, so later j only increase degree.
                    break;
                }
                for v in 0..dim {
                    sum[v] = basis.exponent(i)[v] + basis.exponent(j)[v];
                }
                let k = basis.index_of(&sum).expect("sum within order");
                partners[i].push((j, k));
            }
        }
        let lower = (0..n)
            .map(|i| {
                (0..dim)
                    .map(|v| {
                        let e = basis.exponent(i);
                        if e[v] == 0 {
                            None
                        } else {
                            let mut f = e.to_vec();
                            f[v] -= 1;
                            basis.index_of(&f)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            basis,
            order,
            partners,
            lower,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn zero<T: Real>(&self) -> Series<T> {
        vec![creal(T::zero()); self.len()]
    }

    pub fn constant<T: Real>(&self, c: C<T>) -> Series<T> {
        let mut s = self.zero();
        s[0] = c;
        s
    }

    pub fn variable<T: Real>(&self, k: usize) -> Series<T> {
        let mut e = vec![0u32; self.dim()];
        e[k] = 1;
        let mut s = self.zero();
        s[self.basis.index_of(&e).expect("linear monomial")] = creal(T::one());
        s
    }

    pub fn mul<T: Real>(&self, a: &[C<T>], b: &[C<T>]) -> Series<T> {
        let mut out = self.zero();
        let zero = creal(T::zero());
        for (i, &ai) in a.iter().enumerate() {
            if ai == zero {
                continue;
            }
            for &(j, k) in &self.partners[i] {
                let bj = b[j];
                if bj != zero {
                    out[k] += ai * bj;
                }
            }
        }
        out
    }

    pub fn add_assign<T: Real>(&self, a: &mut [C<T>], b: &[C<T>]) {
        for (x, &y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }

    pub fn scale<T: Real>(&self, a: &[C<T>], c: C<T>) -> Series<T> {
        a.iter().map(|&x| x * c).collect()
    }

    /// `∂a/∂x_v`, truncated to the ring order (degree drops by one).
    pub fn deriv<T: Real>(&self, a: &[C<T>], v: usize) -> Series<T> {
        let mut out = self.zero();
        for (i, &ai) in a.iter().enumerate() {
            if let Some(j) = self.lower[i][v] {
                let ev = self.basis.exponent(i)[v];
                out[j] += ai * creal(T::from_u32(ev).unwrap());
            }
        }
        out
    }

    /// Coefficients of a single output row of a [`PolyMap`] over this ring;
    /// terms above the ring order are dropped.
    pub fn from_polymap_row<T: Real>(&self, map: &PolyMap<T>, row: usize) -> Result<Series<T>> {
        if map.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "map has {} variables, ring has {}",
                map.dim(),
                self.dim()
            )));
        }
        let mut s = self.zero();
        for (t, e) in map.basis().exponents().iter().enumerate() {
            if let Some(i) = self.basis.index_of(e) {
                s[i] = map.coeffs()[(row, t)];
            }
        }
        Ok(s)
    }

    pub fn from_polymap<T: Real>(&self, map: &PolyMap<T>) -> Result<Vec<Series<T>>> {
        (0..map.n_out())
            .map(|r| self.from_polymap_row(map, r))
            .collect()
    }

    /// Keeps only the terms with total degree ≤ `order`.
    pub fn truncate<T: Real>(&self, a: &mut [C<T>], order: u32) {
        for (i, x) in a.iter_mut().enumerate() {
            if self.basis.degree(i) > order {
                *x = creal(T::zero());
            }
        }
    }

    /// Truncated composition `g(h(ζ))`, where `h` holds one series per input
    /// variable of `g`.
    pub fn compose<T: Real>(&self, g: &PolyMap<T>, h: &[Series<T>]) -> Result<Vec<Series<T>>> {
        if g.dim() != h.len() {
            return Err(Error::DimensionMismatch(format!(
                "outer map has {} variables, {} inner series supplied",
                g.dim(),
                h.len()
            )));
        }
        let no_constant = h.iter().all(|s| s[0] == creal(T::zero()));
        let mut memo: HashMap<Vec<u32>, Series<T>> = HashMap::new();
        memo.insert(vec![0; g.dim()], self.constant(creal(T::one())));
        let mut out = vec![self.zero(); g.n_out()];
        for (t, e) in g.basis().exponents().iter().enumerate() {
            let degree: u32 = e.iter().sum();
            if no_constant && degree > self.order {
                continue;
            }
            let col = g.coeffs().column(t);
            if col.iter().all(|z| *z == creal(T::zero())) {
                continue;
            }
            let p = power_product(self, e, h, &mut memo);
            for r in 0..g.n_out() {
                let c = col[r];
                if c != creal(T::zero()) {
                    for (o, &pi) in out[r].iter_mut().zip(p.iter()) {
                        *o += c * pi;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Converts series (one per output) back into a [`PolyMap`] over orders
    /// `l_min..=l_max`.
    pub fn to_polymap<T: Real>(&self, rows: &[Series<T>], l_min: u32, l_max: u32) -> Result<PolyMap<T>> {
        let basis = MonomialBasis::new(self.dim(), l_min, l_max)?;
        let mut coeffs = crate::scalar::CMatrix::zeros(rows.len(), basis.len());
        for (t, e) in basis.exponents().iter().enumerate() {
            if let Some(i) = self.basis.index_of(e) {
                for (r, s) in rows.iter().enumerate() {
                    coeffs[(r, t)] = s[i];
                }
            }
        }
        PolyMap::new(coeffs, basis)
    }
}

fn power_product<T: Real>(
    ring: &SeriesRing,
    e: &[u32],
    h: &[Series<T>],
    memo: &mut HashMap<Vec<u32>, Series<T>>,
) -> Series<T> {
    if let Some(p) = memo.get(e) {
        return p.clone();
    }
    let v = e.iter().position(|&x| x > 0).expect("non-constant exponent");
    let mut f = e.to_vec();
    f[v] -= 1;
    let lower = power_product(ring, &f, h, memo);
    let p = ring.mul(&lower, &h[v]);
    memo.insert(e.to_vec(), p.clone());
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn product_of_linear_terms() {
        let r = SeriesRing::new(2, 3).unwrap();
        let x = r.variable::<f64>(0);
        let y = r.variable::<f64>(1);
        let mut s = x.clone();
        r.add_assign(&mut s, &y);
        let sq = r.mul(&s, &s);
        assert_eq!(sq[r.basis().index_of(&[2, 0]).unwrap()], cplx(1.0, 0.0));
        assert_eq!(sq[r.basis().index_of(&[1, 1]).unwrap()], cplx(2.0, 0.0));
        assert_eq!(sq[r.basis().index_of(&[0, 2]).unwrap()], cplx(1.0, 0.0));
        // (x+y)^4 is truncated away at order 3.
        let q = r.mul(&sq, &sq);
        assert!(q.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn derivative_of_cubic() {
        let r = SeriesRing::new(2, 3).unwrap();
        let mut s = r.zero::<f64>();
        s[r.basis().index_of(&[2, 1]).unwrap()] = cplx(3.0, 0.0);
        let d = r.deriv(&s, 0);
        assert_eq!(d[r.basis().index_of(&[1, 1]).unwrap()], cplx(6.0, 0.0));
    }

    #[test]
    fn composition_matches_pointwise_evaluation() {
        let ring = SeriesRing::new(2, 6).unwrap();
        let b = MonomialBasis::new(2, 1, 2).unwrap();
        let mut g = PolyMap::<f64>::zeros(1, b.clone());
        g.coeffs_mut()[(0, 0)] = cplx(1.0, 0.5);
        g.coeffs_mut()[(0, 3)] = cplx(-0.7, 0.0);
        g.coeffs_mut()[(0, 4)] = cplx(0.2, 0.1);
        let mut h = PolyMap::<f64>::zeros(2, b);
        h.coeffs_mut()[(0, 0)] = cplx(1.0, 0.0);
        h.coeffs_mut()[(1, 1)] = cplx(1.0, 0.0);
        h.coeffs_mut()[(0, 2)] = cplx(0.3, 0.0);
        h.coeffs_mut()[(1, 4)] = cplx(-0.4, 0.2);
        let hs = ring.from_polymap(&h).unwrap();
        let comp = ring.compose(&g, &hs).unwrap();
        let cmap = ring.to_polymap(&comp, 1, 6).unwrap();
        let z = [cplx(0.11, -0.05), cplx(-0.07, 0.02)];
        let direct = g.eval(h.eval(&z).unwrap().as_slice()).unwrap();
        let via = cmap.eval(&z).unwrap();
        // g has degree 2 and h degree 2, so order 4 is exact within order 6.
        assert!((direct[0] - via[0]).norm() < 1e-15);
    }
}
