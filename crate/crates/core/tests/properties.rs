mod common;

use iad_core::chain::{invariance_residual, steady_state, time_reversal, ProbabilityVector, DEFAULT_KPOW};
use iad_core::coarse::{aggregate, coarse_matrix, disaggregate, Partition};
use iad_core::diagnostics::{
    error_operator, is_reversible, max_modulus, norm_bound, rho_j_direct, rho_j_exact_formula,
};
use iad_core::io::{read_matrix_market, write_matrix_market};
use iad_core::linalg::DenseMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn steady_state_is_invariant(seed in any::<u64>(), n in 2usize..30, density in 0.0f64..0.6) {
        let p = common::random_chain(&mut rng(seed), n, density);
        let mu = steady_state(&p, 1e-11, DEFAULT_KPOW).unwrap();
        prop_assert!((mu.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(mu.is_strictly_positive());
        prop_assert!(invariance_residual(&p, &mu) < 1e-10);
    }

    #[test]
    fn reversible_chains_are_detected(seed in any::<u64>(), n in 2usize..25) {
        let (p, mu) = common::random_reversible(&mut rng(seed), n, 0.3);
        prop_assert!(is_reversible(&p, &mu).unwrap());
        let rev = time_reversal(&p, &mu).unwrap();
        prop_assert!(rev.matrix().max_abs_diff(p.matrix()) < 1e-12);
    }

    #[test]
    fn disaggregation_inverts_aggregation(seed in any::<u64>(), n in 2usize..40, coarse in 1usize..6) {
        let mut r = rng(seed);
        let coarse = coarse.min(n);
        let part = common::random_partition(&mut r, n, coarse);
        let nu = ProbabilityVector::normalized((0..n).map(|i| 1.0 + (i * 7 % 5) as f64).collect()).unwrap();
        let z: Vec<f64> = (0..coarse).map(|i| 0.5 + i as f64).collect();
        let back = aggregate(&disaggregate(&z, &nu, &part).unwrap(), &part).unwrap();
        for (a, b) in back.iter().zip(&z) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_chain_keeps_aggregated_steady_state(seed in any::<u64>(), n in 3usize..30, coarse in 2usize..5) {
        let mut r = rng(seed);
        let p = common::random_chain(&mut r, n, 0.2);
        let part = common::random_partition(&mut r, n, coarse.min(n));
        let mu = steady_state(&p, 1e-11, DEFAULT_KPOW).unwrap();
        let c = coarse_matrix(&p, &mu, &part).unwrap();
        let z = ProbabilityVector::new(aggregate(mu.as_slice(), &part).unwrap()).unwrap();
        prop_assert!(invariance_residual(&c.matrix, &z) < 1e-10);
    }

    #[test]
    fn formula_radius_matches_direct(seed in any::<u64>(), n in 4usize..25, coarse in 2usize..4) {
        let mut r = rng(seed);
        let p = common::random_chain(&mut r, n, 0.3);
        let part = common::random_partition(&mut r, n, coarse);
        let mu = steady_state(&p, 1e-11, DEFAULT_KPOW).unwrap();
        let direct = rho_j_direct(&error_operator(&p, &mu, &part).unwrap()).unwrap();
        let formula = max_modulus(&rho_j_exact_formula(&p, &mu, &part).unwrap());
        prop_assert!((direct - formula).abs() < 1e-8, "{} vs {}", direct, formula);
        prop_assert!(direct <= norm_bound(&p, &mu, &part).unwrap() + 1e-8);
    }

    #[test]
    fn singleton_partition_has_zero_rate(seed in any::<u64>(), n in 2usize..20) {
        let p = common::random_chain(&mut rng(seed), n, 0.3);
        let mu = steady_state(&p, 1e-11, DEFAULT_KPOW).unwrap();
        let j = error_operator(&p, &mu, &Partition::singletons(n)).unwrap();
        prop_assert!(j.max_abs() < 1e-10);
    }

    #[test]
    fn matrix_market_round_trip(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let m = DenseMatrix::from_fn(rows, cols, |_, _| if r.gen_bool(0.5) { r.gen_range(-1e3..1e3) } else { 0.0 });
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        let back = read_matrix_market(buf.as_slice()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn partition_file_round_trip(seed in any::<u64>(), n in 1usize..50, coarse in 1usize..6) {
        let part = common::random_partition(&mut rng(seed), n, coarse.min(n));
        let mut buf = Vec::new();
        part.write(&mut buf).unwrap();
        prop_assert_eq!(Partition::read(buf.as_slice()).unwrap(), part);
    }
}
