use delay_ssm::bench::Trajectory;
use delay_ssm::embedding::{de_embed, hankel_embed};
use delay_ssm::linalg::pinv;
use delay_ssm::pipeline::{read_trajectory_csv, write_trajectory_csv};
use delay_ssm::polyalg::{monomials_at_order, MonomialBasis, PolyMap};
use delay_ssm::scalar::{CMatrix, CVector};
use delay_ssm::DelayConfig;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn complex_matrix(rows: usize, cols: usize, seed: Vec<f64>) -> CMatrix<f64> {
    CMatrix::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        Complex64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monomial_counts(dim in 1usize..6, lo in 0u32..3, extra in 0u32..4) {
        let hi = lo + extra;
        let basis = MonomialBasis::new(dim, lo, hi).unwrap();
        let want: usize = (lo..=hi).map(|k| binomial(k as usize + dim - 1, dim - 1)).sum();
        prop_assert_eq!(basis.len(), want);
        for k in lo..=hi {
            prop_assert_eq!(monomials_at_order(dim, k), binomial(k as usize + dim - 1, dim - 1));
        }
    }

    #[test]
    fn polymap_jacobian_matches_differences(
        dim in 1usize..4,
        coeffs in prop::collection::vec(-1.0f64..1.0, 8..64),
        point in prop::collection::vec(-0.5f64..0.5, 8),
    ) {
        let basis = MonomialBasis::new(dim, 1, 3).unwrap();
        let map = PolyMap::new(complex_matrix(2, basis.len(), coeffs), basis).unwrap();
        let x: Vec<Complex64> = (0..dim).map(|i| Complex64::new(point[2 * i], point[2 * i + 1])).collect();
        let jac = map.jacobian(&x).unwrap();
        let h = 1e-6;
        for k in 0..dim {
            let mut plus = x.clone();
            let mut minus = x.clone();
            plus[k] += h;
            minus[k] -= h;
            let fd: CVector<f64> = (map.eval(&plus).unwrap() - map.eval(&minus).unwrap()) / Complex64::new(2.0 * h, 0.0);
            prop_assert!((fd - jac.column(k)).norm() < 1e-7);
        }
    }

    #[test]
    fn pseudoinverse_axioms(rows in 1usize..7, cols in 1usize..7, seed in prop::collection::vec(-1.0f64..1.0, 16..100)) {
        let a = complex_matrix(rows, cols, seed);
        let p = pinv(&a, 1e-12).unwrap();
        let scale = 1.0 + a.norm() * p.norm();
        prop_assert!((&a * &p * &a - &a).norm() < 1e-10 * scale * a.norm().max(1.0));
        prop_assert!((&p * &a * &p - &p).norm() < 1e-10 * scale * p.norm().max(1.0));
        let ap = &a * &p;
        let pa = &p * &a;
        prop_assert!((ap.adjoint() - &ap).norm() < 1e-10 * scale);
        prop_assert!((pa.adjoint() - &pa).norm() < 1e-10 * scale);
    }

    #[test]
    fn embedding_round_trip(
        q in 1usize..4,
        kappa in 1usize..5,
        p in 1usize..6,
        extra in 0usize..20,
        values in prop::collection::vec(-10.0f64..10.0, 1..400),
    ) {
        let cfg = DelayConfig::new(kappa, 0.1, p).unwrap();
        let n = cfg.window() + kappa - 1 + extra;
        let signal = DMatrix::from_fn(q, n, |i, j| values[(i * n + j) % values.len()]);
        let embedded = hankel_embed(&signal, &cfg).unwrap();
        prop_assert_eq!(embedded.nrows(), q * p);
        prop_assert_eq!(embedded.ncols(), n - cfg.window() + 1);
        prop_assert_eq!(de_embed(&embedded, q, &cfg).unwrap(), signal);
    }

    #[test]
    fn csv_round_trip(q in 1usize..4, values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..60)) {
        let n = values.len();
        let times: Vec<f64> = (0..n).map(|j| j as f64 * 0.01).collect();
        let data = DMatrix::from_fn(q, n, |i, j| values[(j + i) % n]);
        let traj = Trajectory::new(times, data).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let back: Trajectory<f64> = read_trajectory_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.times, traj.times);
        prop_assert_eq!(back.data, traj.data);
    }
}
