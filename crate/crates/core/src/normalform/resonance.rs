use serde::{Deserialize, Serialize};

use crate::polyalg::MonomialBasis;
use crate::scalar::{cabs, creal, lit, Real, C};

/// Resonance tolerances: `(k, m)` is resonant when
/// `|⟨m, λ⟩ − λ_k| ≤ tol_res·|Im λ_k| + tol_abs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct ResonanceTolerance<T: Real> {
    pub tol_res: T,
    pub tol_abs: T,
}

impl<T: Real> Default for ResonanceTolerance<T> {
    fn default() -> Self {
        Self {
            tol_res: lit(0.1),
            tol_abs: lit(1e-8),
        }
    }
}

impl<T: Real> ResonanceTolerance<T> {
    pub fn new(tol_res: T) -> Self {
        Self {
            tol_res,
            ..Self::default()
        }
    }

    pub fn divisor(lambdas: &[C<T>], k: usize, m: &[u32]) -> C<T> {
        let inner = m
            .iter()
            .zip(lambdas)
            .fold(creal(T::zero()), |acc, (&mj, &lj)| acc + lj * creal(T::from_u32(mj).unwrap()));
        inner - lambdas[k]
    }

    pub fn is_resonant(&self, lambdas: &[C<T>], k: usize, m: &[u32]) -> bool {
        cabs(Self::divisor(lambdas, k, m)) <= self.tol_res * lambdas[k].im.abs() + self.tol_abs
    }
}

/// Resonant `(mode, exponent)` pairs with `|m| = order`, in mode-major,
/// graded-lex order.
pub fn resonant_monomials<T: Real>(
    lambdas: &[C<T>],
    order: u32,
    tol: ResonanceTolerance<T>,
) -> Vec<(usize, Vec<u32>)> {
    if lambdas.is_empty() || order == 0 {
        return Vec::new();
    }
    let basis = MonomialBasis::new(lambdas.len(), order, order).expect("valid basis");
    let mut out = Vec::new();
    for k in 0..lambdas.len() {
        for e in basis.exponents() {
            if tol.is_resonant(lambdas, k, e) {
                out.push((k, e.clone()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn hopf_pair_cubic() {
        let lam = [cplx(-0.01, 1.0), cplx(-0.01, -1.0)];
        let r = resonant_monomials(&lam, 3, ResonanceTolerance::default());
        assert_eq!(r, vec![(0, vec![2, 1]), (1, vec![1, 2])]);
    }

    #[test]
    fn one_to_two_internal_resonance() {
        let lam = [cplx(-0.05, 7.78), cplx(-0.05, -7.78), cplx(-0.09, 15.9), cplx(-0.09, -15.9)];
        let r = resonant_monomials(&lam, 2, ResonanceTolerance::default());
        assert!(r.contains(&(2, vec![2, 0, 0, 0])));
        assert!(r.contains(&(3, vec![0, 2, 0, 0])));
        // Mode 1 is driven by ζ₃ζ̄₁ in the conjugate relation.
        assert!(r.contains(&(0, vec![0, 1, 1, 0])));
    }

    #[test]
    fn incommensurate_pairs_only_self_resonant() {
        let s2 = 2f64.sqrt();
        let lam = [cplx(0.0, 1.0), cplx(0.0, -1.0), cplx(0.0, s2), cplx(0.0, -s2)];
        let tol = ResonanceTolerance::new(1e-3);
        for order in 2..=4u32 {
            let r = resonant_monomials(&lam, order, tol);
            // Exhaustive scan: resonant iff the exponent balances every pair
            // except one extra factor of the target's own variable.
            let basis = MonomialBasis::new(4, order, order).unwrap();
            let mut expect = Vec::new();
            for k in 0..4 {
                for e in basis.exponents() {
                    let mut net = [e[0] as i32 - e[1] as i32, e[2] as i32 - e[3] as i32];
                    match k {
                        0 => net[0] -= 1,
                        1 => net[0] += 1,
                        2 => net[1] -= 1,
                        _ => net[1] += 1,
                    }
                    if net == [0, 0] {
                        expect.push((k, e.clone()));
                    }
                }
            }
            assert_eq!(r, expect, "order {order}");
            if order % 2 == 0 {
                assert!(r.is_empty());
            }
        }
    }
}
