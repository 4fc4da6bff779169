//! Property-based checks of structural invariants.

use msm_spectra::analytic_eigenvectors::l1_normalize;
use msm_spectra::analytic_spectrum::{
    admissibility_residual, solve_omega_k, spiral_point, SpiralBranch,
};
use msm_spectra::bulk_analysis::{
    cavity_solve, lambda_grid, variance_profile, CavityOptions,
};
use msm_spectra::model::{
    coarse_grain, expected_matrix, gen_fitness, noise_matrix, sample_adjacency, ModelParams,
    Partition, WeightMode,
};
use msm_spectra::numerical_spectrum::eig_sym;
use msm_spectra::special_functions::{gamma_complex, log_gamma_complex};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_conjugate_symmetry(re in -6.0f64..12.0, im in -8.0f64..8.0) {
        let z = Complex64::new(re, im);
        prop_assume!((z - z.re.round()).norm() > 1e-3 || z.re > 0.5);
        let a = log_gamma_complex(z.conj()).unwrap();
        let b = log_gamma_complex(z).unwrap().conj();
        prop_assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
    }

    #[test]
    fn gamma_recurrence(re in -5.0f64..10.0, im in 0.05f64..6.0) {
        let z = Complex64::new(re, im);
        let lhs = gamma_complex(z + 1.0).unwrap();
        let rhs = z * gamma_complex(z).unwrap();
        prop_assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn gamma_reflection(re in -3.0f64..4.0, im in 0.05f64..3.0) {
        let z = Complex64::new(re, im);
        let lhs = gamma_complex(z).unwrap() * gamma_complex(1.0 - z).unwrap();
        let rhs = PI / (PI * z).sin();
        prop_assert!(rel(lhs, rhs) < 1e-10);
    }

    #[test]
    fn ladder_is_ordered(alpha in 0.1f64..0.9, log_n in 4.0f64..14.0) {
        let n = log_n.exp() as usize;
        let mut prev_omega = 0.0;
        let mut prev_mag = f64::INFINITY;
        for k in 1..=5 {
            match solve_omega_k(k, n, alpha) {
                Ok(p) => {
                    prop_assert!(p.residual.abs() < 1e-9);
                    prop_assert_eq!(p.lambda_k > 0.0, k % 2 == 1);
                    prop_assert!(p.lambda_k.abs() < prev_mag);
                    if k > 1 {
                        prop_assert!(p.omega_k > prev_omega);
                        prop_assert!(admissibility_residual(k, 0.0, n, alpha).unwrap() > 0.0);
                    }
                    prev_omega = p.omega_k;
                    prev_mag = p.lambda_k.abs();
                }
                Err(_) => break,
            }
        }
    }

    #[test]
    fn spiral_crosses_axis_at_roots(alpha in 0.15f64..0.85, log_n in 5.0f64..12.0, k in 2usize..6) {
        let n = log_n.exp() as usize;
        if let Ok(p) = solve_omega_k(k, n, alpha) {
            let s = spiral_point(alpha, n, p.omega_k, SpiralBranch::Plus).unwrap();
            prop_assert!(s.im.abs() <= 1e-8 * p.lambda_k.abs());
            prop_assert!((s.re - p.lambda_k).abs() <= 1e-8 * p.lambda_k.abs());
        }
    }

    #[test]
    fn spiral_branches_are_conjugate(alpha in 0.1f64..0.9, omega in 0.0f64..4.0) {
        let a = spiral_point(alpha, 1000, omega, SpiralBranch::Plus).unwrap();
        let b = spiral_point(alpha, 1000, omega, SpiralBranch::Minus).unwrap();
        prop_assert_eq!(a, b.conj());
    }

    #[test]
    fn model_matrices_keep_their_ranges(n in 2usize..60, alpha in 0.1f64..0.9, seed in any::<u64>(), iid in any::<bool>()) {
        let mode = if iid { WeightMode::IidPareto } else { WeightMode::Deterministic };
        let params = ModelParams::new(n, alpha, seed, mode).unwrap();
        let x = gen_fitness(&params).unwrap();
        prop_assert!(x.values().windows(2).all(|w| w[0] >= w[1]));
        let p = expected_matrix(&x, params.epsilon_n).unwrap();
        p.check_invariants().unwrap();
        let a = sample_adjacency(&p, seed).unwrap();
        a.check_invariants().unwrap();
        let h = noise_matrix(&a, &p).unwrap();
        h.check_invariants().unwrap();
        prop_assert!(h.trace().abs() < 1e-12);
        let vp = variance_profile(&p).unwrap();
        prop_assert!(vp.sigma_star <= 0.5);
        prop_assert!(vp.sigma * vp.sigma <= vp.d_max + 1e-12);
        prop_assert!(vp.sigma <= 0.5 * (n as f64).sqrt());
    }

    #[test]
    fn sampling_is_reproducible(n in 2usize..40, seed in any::<u64>()) {
        let params = ModelParams::new(n, 0.5, seed, WeightMode::IidPareto).unwrap();
        let x1 = gen_fitness(&params).unwrap();
        let x2 = gen_fitness(&params).unwrap();
        prop_assert_eq!(&x1, &x2);
        let p = expected_matrix(&x1, params.epsilon_n).unwrap();
        prop_assert_eq!(sample_adjacency(&p, seed).unwrap(), sample_adjacency(&p, seed).unwrap());
    }

    #[test]
    fn coarse_graining_is_exact(m in 1usize..12, b in 1usize..8, alpha in 0.1f64..0.9, seed in any::<u64>(), random in any::<bool>()) {
        let n = (m * b).max(2);
        let b = if n % b == 0 { b } else { 1 };
        let params = ModelParams::new(n, alpha, seed, WeightMode::IidPareto).unwrap();
        let x = gen_fitness(&params).unwrap();
        let partition = if random { Partition::Random { seed } } else { Partition::Contiguous };
        let cg = coarse_grain(&x, params.epsilon_n, b, partition).unwrap();
        prop_assert_eq!(cg.blocks.len(), n / b);
        prop_assert!(cg.max_invariance_violation() < 1e-12);
    }

    #[test]
    fn l1_normalize_is_scale_invariant(v in prop::collection::vec(-10.0f64..10.0, 1..20), c in 0.01f64..100.0) {
        prop_assume!(v.iter().any(|x| *x != 0.0));
        let a = l1_normalize(&v).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| x * c).collect();
        let b = l1_normalize(&scaled).unwrap();
        prop_assert!((a.iter().map(|x| x.abs()).sum::<f64>() - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigendecomposition_reconstructs(n in 2usize..50, alpha in 0.1f64..0.9, seed in any::<u64>()) {
        let params = ModelParams::new(n, alpha, seed, WeightMode::IidPareto).unwrap();
        let x = gen_fitness(&params).unwrap();
        let p = expected_matrix(&x, params.epsilon_n).unwrap();
        let h = noise_matrix(&sample_adjacency(&p, seed).unwrap(), &p).unwrap();
        for m in [&p, &h] {
            let d = eig_sym(m).unwrap();
            prop_assert!(d.reconstruction_residual(m).unwrap() < 1e-8);
            prop_assert!(d.orthonormality_error().unwrap() < 1e-8);
            prop_assert!(d.eigenvalues.windows(2).all(|w| w[0].abs() >= w[1].abs()));
        }
        let sum: f64 = eig_sym(&h).unwrap().eigenvalues.iter().sum();
        prop_assert!(sum.abs() < 1e-6 * n as f64);
    }

    #[test]
    fn cavity_solution_is_herglotz(n in 4usize..40, alpha in 0.2f64..0.8, eta in 0.05f64..0.5) {
        let params = ModelParams::deterministic(n, alpha).unwrap();
        let x = gen_fitness(&params).unwrap();
        let grid = lambda_grid(-1.0, 1.0, 9, eta).unwrap();
        let sol = cavity_solve(&x, params.epsilon_n, &grid, &CavityOptions::default()).unwrap();
        for (s, st) in sol.s.iter().zip(&sol.status) {
            if st.converged {
                prop_assert!(s.im > 0.0);
            }
        }
        prop_assert!(sol.density.iter().all(|d| *d >= -1e-9));
    }
}
