use serde::{Deserialize, Serialize};

use super::config::{check_distinct, DelayConfig, Spectrum};
use crate::error::{Error, Result};
use crate::scalar::{cexp, creal, CMatrix, Real, C};

/// `p × d` Vandermonde matrix with entries `exp(λ_k · j · τ)`, `j = 0..p`.
pub fn vandermonde_raw<T: Real>(lambdas: &[C<T>], tau: T, p: usize) -> Result<CMatrix<T>> {
    if p == 0 {
        return Err(Error::InvalidConfig("p must be ≥ 1".into()));
    }
    check_distinct(lambdas)?;
    Ok(CMatrix::from_fn(p, lambdas.len(), |j, k| {
        cexp(lambdas[k] * creal(T::from_usize(j).unwrap() * tau))
    }))
}

pub fn vandermonde<T: Real>(spectrum: &Spectrum<T>, config: &DelayConfig<T>) -> Result<CMatrix<T>> {
    config.validate()?;
    vandermonde_raw(spectrum.lambdas(), config.tau(), config.p)
}

/// Predicted tangent space of the delay-embedded manifold at the fixed
/// point, as a `p·q × d` complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TangentBasis<T: Real> {
    pub matrix: CMatrix<T>,
    pub config: DelayConfig<T>,
    pub spectrum: Spectrum<T>,
}

impl<T: Real> TangentBasis<T> {
    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn channels(&self) -> usize {
        self.spectrum.channels()
    }

    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the tangent basis: the Vandermonde matrix itself for a scalar
/// observable, otherwise the channel-major stack of `V·diag(ê[ℓ, :])`
/// blocks, so entry `(ℓ·p + j, k)` is `ê_k[ℓ]·exp(λ_k j τ)`.
pub fn tangent_basis<T: Real>(spectrum: &Spectrum<T>, config: &DelayConfig<T>) -> Result<TangentBasis<T>> {
    let v = vandermonde(spectrum, config)?;
    let matrix = match spectrum.mode_shapes() {
        None => v,
        Some(shapes) => {
            for k in 0..shapes.ncols() {
                if shapes.column(k).iter().all(|z| z.re == T::zero() && z.im == T::zero()) {
                    return Err(Error::UnobservableMode(k));
                }
            }
            let p = config.p;
            let q = shapes.nrows();
            CMatrix::from_fn(p * q, spectrum.dim(), |row, k| {
                let channel = row / p;
                let j = row % p;
                shapes[(channel, k)] * v[(j, k)]
            })
        }
    };
    Ok(TangentBasis {
        matrix,
        config: *config,
        spectrum: spectrum.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::svd;
    use crate::scalar::cplx;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_eigenvalue_gives_ones() {
        let s = Spectrum::scalar(vec![cplx(0.0, 0.0)]).unwrap();
        let v = vandermonde(&s, &DelayConfig::new(3, 0.7, 4).unwrap()).unwrap();
        assert!(v.iter().all(|z| (*z - cplx(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn single_row_is_ones() {
        let s = Spectrum::scalar(vec![cplx(-0.2, 3.0), cplx(-0.2, -3.0), cplx(-1.0, 0.0)]).unwrap();
        let v = vandermonde(&s, &DelayConfig::new(2, 0.1, 1).unwrap()).unwrap();
        assert_eq!(v.nrows(), 1);
        assert!(v.iter().all(|z| (*z - cplx(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn quarter_turn_column() {
        // ωτ = π/2: successive powers of i.
        let omega = std::f64::consts::FRAC_PI_2 / 0.5;
        let s = Spectrum::scalar(vec![cplx(0.0, omega)]).unwrap();
        let v = vandermonde(&s, &DelayConfig::new(1, 0.5, 4).unwrap()).unwrap();
        let expect = [cplx(1.0, 0.0), cplx(0.0, 1.0), cplx(-1.0, 0.0), cplx(0.0, -1.0)];
        for (j, e) in expect.iter().enumerate() {
            let direct = (cplx(0.0, omega * 0.5 * j as f64)).exp();
            assert!((v[(j, 0)] - direct).norm() < 1e-15);
            assert!((v[(j, 0)] - e).norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_basis_is_vandermonde() {
        let s = Spectrum::scalar(vec![cplx(-0.1, 1.0), cplx(-0.1, -1.0)]).unwrap();
        let c = DelayConfig::new(3, 0.1, 6).unwrap();
        let t = tangent_basis(&s, &c).unwrap();
        assert_eq!(t.matrix, vandermonde(&s, &c).unwrap());
    }

    #[test]
    fn unit_shapes_stack_vandermonde_twice() {
        let lam = vec![cplx(-0.015, 0.99989), cplx(-0.015, -0.99989)];
        let shapes = CMatrix::from_element(2, 2, cplx(1.0, 0.0));
        let s = Spectrum::new(lam.clone(), Some(shapes)).unwrap();
        let c = DelayConfig::new(15, 0.1, 5).unwrap();
        let t = tangent_basis(&s, &c).unwrap();
        let v = vandermonde(&Spectrum::scalar(lam).unwrap(), &c).unwrap();
        assert_eq!(t.matrix.rows(0, 5).into_owned(), v);
        assert_eq!(t.matrix.rows(5, 5).into_owned(), v);
    }

    #[test]
    fn random_shapes_match_entrywise_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lam = vec![cplx(-0.05, 2.0), cplx(-0.05, -2.0)];
        let mut shapes = CMatrix::zeros(3, 2);
        for l in 0..3 {
            let z = cplx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            shapes[(l, 0)] = z;
            shapes[(l, 1)] = z.conj();
        }
        let s = Spectrum::new(lam.clone(), Some(shapes.clone())).unwrap();
        let c = DelayConfig::new(2, 0.05, 4).unwrap();
        let t = tangent_basis(&s, &c).unwrap();
        for l in 0..3 {
            for j in 0..4 {
                for k in 0..2 {
                    let e = shapes[(l, k)] * (lam[k] * (j as f64 * 0.1)).exp();
                    assert!((t.matrix[(l * 4 + j, k)] - e).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_shape_column_is_unobservable() {
        let shapes = CMatrix::from_row_slice(2, 1, &[cplx(0.0, 0.0), cplx(0.0, 0.0)]);
        let s = Spectrum::new(vec![cplx(-1.0, 0.0)], Some(shapes)).unwrap();
        let e = tangent_basis(&s, &DelayConfig::new(1, 0.1, 3).unwrap());
        assert!(matches!(e, Err(Error::UnobservableMode(0))));
    }

    #[test]
    fn distinct_spectra_give_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let d = rng.random_range(1..=4usize);
            let lam: Vec<_> = (0..d)
                .map(|_| cplx(-rng.random_range(0.01..1.0), rng.random_range(-5.0..5.0)))
                .collect();
            let s = Spectrum::scalar(lam).unwrap();
            let p = d + rng.random_range(0..4usize);
            let v = vandermonde(&s, &DelayConfig::new(1, rng.random_range(0.05..0.5), p).unwrap()).unwrap();
            let sig = svd(&v).unwrap().sigma;
            assert!(*sig.last().unwrap() > 0.0);
        }
    }
}
