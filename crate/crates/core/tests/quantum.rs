use proptest::prelude::*;
use qfric_core::quantum::*;
use qfric_core::rng::stream_rng;
use qfric_core::snapshot::{read_density, write_density};
use qfric_core::ModelParams;

fn random_state(n_max: usize, support: i64, rank: usize, seed: u64) -> DensityMatrix {
    let h = HilbertSpec::new(n_max, 0.137).unwrap();
    random_density_matrix(h, -support, support, rank, &mut stream_rng(seed, 0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn channel_is_trace_preserving_and_positive(seed in 0u64..100_000, gamma in 0.01f64..1.0, rank in 1usize..6) {
        let rho = random_state(12, 12, rank, seed);
        let params = ModelParams::from_scaled_kick(4.0, gamma, 0.137).unwrap();
        let out = dissipative_channel(&rho, &params).unwrap();
        prop_assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(out.matrix().hermiticity_error() < 1e-10);
        prop_assert!(out.min_eigenvalue() >= -1e-8);
    }

    #[test]
    fn channel_contracts_mean_absolute_momentum(seed in 0u64..100_000, gamma in 0.01f64..1.0) {
        let rho = random_state(32, 20, 3, seed);
        let params = ModelParams::from_scaled_kick(4.0, gamma, 0.137).unwrap();
        let out = dissipative_channel(&rho, &params).unwrap();
        let before = rho.expectation_diagonal(|n| n.abs() as f64);
        let after = out.expectation_diagonal(|n| n.abs() as f64);
        prop_assert!((after - gamma * before).abs() < 1e-6);
    }

    #[test]
    fn unitary_steps_preserve_trace_and_hermiticity(seed in 0u64..100_000, k in 0.0f64..10.0) {
        let rho = random_state(10, 10, 4, seed);
        let params = ModelParams::from_scaled_kick(k, 0.5, 0.137).unwrap();
        for out in [apply_kick(&rho, &params), apply_free_rotation(&rho, 0.137), period_map(&rho, &params).unwrap()] {
            prop_assert!((out.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
            prop_assert!(out.matrix().hermiticity_error() < 1e-10);
        }
    }

    #[test]
    fn wigner_marginal_is_the_diagonal(seed in 0u64..100_000, rank in 1usize..5) {
        let rho = random_state(8, 8, rank, seed);
        let w = wigner_function(&rho).unwrap();
        prop_assert!((w.integral().re - 1.0).abs() < 1e-8);
        let dp = w.p_axis().step;
        let marginal = w.p_marginal();
        let probs = rho.momentum_marginal().unwrap();
        for (i, p) in probs.probabilities().iter().enumerate() {
            prop_assert!((marginal[2 * i + 1] * dp - p).abs() < 1e-8);
        }
    }
}

#[test]
fn unit_gamma_period_map_is_unitary() {
    let h = HilbertSpec::new(60, 0.137).unwrap();
    let amp: Vec<C64> = (0..h.dim())
        .map(|i| {
            let n = h.level(i) as f64;
            C64::from_polar((-n * n / 50.0).exp(), 0.3 * n)
        })
        .collect();
    let norm = amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amp: Vec<C64> = amp.iter().map(|a| a / norm).collect();
    let rho = DensityMatrix::pure(h, &amp).unwrap();
    let params = ModelParams::from_scaled_kick(1.0, 1.0, 0.137).unwrap();
    let guard = LeakageGuard { threshold: 1.0, edge_levels: 5 };
    let ev = evolve_periods(rho, &params, 50, guard).unwrap();
    assert!((ev.state.purity() - 1.0).abs() < 1e-10);
    assert!(ev.trace_drift < 1e-10);
}

#[test]
fn dissipative_evolution_keeps_trace() {
    let h = HilbertSpec::new(160, 0.137).unwrap();
    let rho = initial_band_state(h).unwrap();
    let params = ModelParams::from_scaled_kick(4.56, 0.56, 0.137).unwrap();
    let ev = evolve_periods(rho, &params, 50, LeakageGuard::default()).unwrap();
    assert!(ev.trace_drift < 1e-8);
    assert!(ev.max_leakage < 1e-6);
    assert!(ev.convergence.unwrap() > 0.9);
    ev.state.validate(true).unwrap();
}

#[test]
fn density_snapshot_round_trip() {
    let rho = random_state(6, 6, 2, 17);
    let mut buf = Vec::new();
    write_density(&mut buf, &rho).unwrap();
    assert_eq!(read_density(&buf[..]).unwrap(), rho);
}
