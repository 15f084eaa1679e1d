use std::f64::consts::PI;

use laplacian_lab::empirical::{LaplacianVariant, OperatorBundle};
use laplacian_lab::kernel::KernelDescriptor;
use laplacian_lab::matrix::DenseMatrix;
use laplacian_lab::rates::{bernstein_bound, rate_constants, sum_tail_bound, RateInputs};
use laplacian_lab::reference::{circle_ball_spectrum, OperatorTag};
use laplacian_lab::space::unit_circle;
use laplacian_lab::spectral::{eig_sym, nystrom_extend_amv, nystrom_extend_identity, spectral_window_project, Window};
use proptest::prelude::*;

fn bundle(n: usize, seed: u64, r: f64) -> OperatorBundle {
    let kernel = KernelDescriptor::ball(r, 0.01, 1.0, 1.0).unwrap();
    OperatorBundle::build(&kernel, &unit_circle().sample_uniform(n, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn laplacians_are_symmetric_and_l_kills_constants(n in 2usize..48, seed in any::<u64>(), r in 0.05f64..3.0) {
        let b = bundle(n, seed, r);
        let l = b.amv_laplacian().unwrap();
        prop_assert!(l.symmetry_defect() <= 1e-15);
        prop_assert!(b.identity_laplacian().unwrap().symmetry_defect() <= 1e-15);
        prop_assert!(l.mul_vec(&vec![1.0; n]).iter().all(|v| v.abs() <= 1e-13));
    }

    #[test]
    fn amv_laplacian_is_positive_semidefinite(n in 2usize..40, seed in any::<u64>(), r in 0.05f64..3.0) {
        let b = bundle(n, seed, r);
        let s = eig_sym(b.amv_laplacian().unwrap()).unwrap();
        prop_assert!(s.eigenvalues()[0] >= -1e-12);
        prop_assert!(s.max_residual(b.amv_laplacian().unwrap()) <= 1e-12);
        prop_assert!(s.orthonormality_defect() <= 1e-12);
    }

    #[test]
    fn empirical_operators_agree_with_matrices(
        n in 2usize..40, seed in any::<u64>(), r in 0.05f64..3.0,
        values in prop::collection::vec(-5.0f64..5.0, 40),
    ) {
        let b = bundle(n, seed, r);
        let v = &values[..n];
        let kv = b.similarity().mul_vec(v);
        let lv = b.identity_laplacian().unwrap().mul_vec(v);
        for (i, x) in b.points().points().iter().enumerate() {
            prop_assert!((b.apply_p_values(v, x) - kv[i]).abs() <= 1e-12);
            let u = b.apply_u_values(v, v[i], x, LaplacianVariant::Identity).unwrap();
            prop_assert!((u - lv[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn nystrom_extensions_interpolate(n in 8usize..40, seed in any::<u64>()) {
        let b = bundle(n, seed, PI / 3.0);
        let s = eig_sym(b.identity_laplacian().unwrap()).unwrap();
        for k in 0..s.len() {
            let lambda = s.eigenvalues()[k];
            if (lambda - 1.0).abs() < 0.05 {
                continue;
            }
            let f = nystrom_extend_identity(&b, s.eigenvector(k).to_vec(), lambda).unwrap();
            for (i, x) in b.points().points().iter().enumerate() {
                prop_assert!((f.eval(x).unwrap() - s.eigenvector(k)[i]).abs() <= 1e-9);
            }
        }
        let s = eig_sym(b.amv_laplacian().unwrap()).unwrap();
        // λ = 0 lies below the range of m_n, so the AMV extension exists.
        let f = nystrom_extend_amv(&b, s.eigenvector(0).to_vec(), s.eigenvalues()[0]).unwrap();
        prop_assert!(f.residual(b.points().points()).unwrap() <= 1e-9);
    }

    #[test]
    fn window_projection_is_idempotent(n in 16usize..48, seed in any::<u64>(), values in prop::collection::vec(-1.0f64..1.0, 48)) {
        let b = bundle(n, seed, PI / 4.0);
        let s = eig_sym(b.identity_laplacian().unwrap()).unwrap();
        let window = Window::new(-0.5, 0.5).unwrap().with_margin(0.0);
        let once = spectral_window_project(&s, &window, &values[..n]).unwrap();
        let twice = spectral_window_project(&s, &window, &once).unwrap();
        for (a, c) in once.iter().zip(&twice) {
            prop_assert!((a - c).abs() <= 1e-12);
        }
    }

    #[test]
    fn matrix_csv_round_trip(rows in 1usize..6, cols in 1usize..6, data in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 36)) {
        let m = DenseMatrix::from_fn(rows, cols, |i, j| data[i * 6 + j]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        laplacian_lab::io::write_matrix_csv(&path, &m).unwrap();
        prop_assert_eq!(laplacian_lab::io::read_matrix_csv(&path).unwrap(), m);
    }

    #[test]
    fn bernstein_is_a_probability_decreasing_in_n(m in 0.1f64..5.0, v in 0.01f64..5.0, n in 1u64..10_000, eps in 0.0f64..3.0) {
        let b = bernstein_bound(m, v, n, eps).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!(bernstein_bound(m, v, n + 1, eps).unwrap() <= b);
    }

    #[test]
    fn sum_tail_dominates_partial_sums(sigma in 1.05f64..5.0, start in 2u64..100) {
        let partial: f64 = (start..start + 5000).map(|k| (k as f64).powf(-sigma)).sum();
        prop_assert!(sum_tail_bound(sigma, start).unwrap() >= partial);
    }

    #[test]
    fn rate_constants_grow_with_m(big_m in 1.0f64..10.0, a in 0.01f64..1.0) {
        let inputs = |big_m| RateInputs { m_upper: big_m, a, c_l: 2.0, m: 1.0, c_omega: 1.0, m_prime: 1.0, alpha: 1.0, n_start: 10 };
        let lo = rate_constants(&inputs(big_m)).unwrap();
        let hi = rate_constants(&inputs(big_m * 1.5)).unwrap();
        prop_assert!(hi.gamma > lo.gamma && hi.gamma_tilde > lo.gamma_tilde && hi.c_e < lo.c_e);
        prop_assert!(lo.c_e > 0.0 && lo.gamma_tilde >= lo.gamma);
    }

    #[test]
    fn reference_operators_are_consistent(r in 0.01f64..PI, k in 1usize..12) {
        let t = circle_ball_spectrum(r, k).unwrap();
        let u = t.for_operator(OperatorTag::U);
        prop_assert_eq!(u.for_operator(OperatorTag::T), t.clone());
        for (a, b) in t.groups().iter().zip(u.groups()) {
            prop_assert!((a.eigenvalue + b.eigenvalue - 1.0).abs() <= 1e-15);
            prop_assert!(a.eigenvalue.abs() <= 1.0);
        }
    }
}
