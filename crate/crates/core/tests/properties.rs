use bistab_core::model::{rhs, validate};
use bistab_core::observables::physicality_check;
use bistab_core::steady_state::{random_physical_state, RESIDUAL_GATE};
use bistab_core::{find_all_roots, SystemParams};
use proptest::prelude::*;
use rand::SeedableRng;

fn params() -> impl Strategy<Value = SystemParams> {
    (1e-3..5.0f64, 1e-3..5.0f64, 5e3f64.log10()..6.0f64, 0.5..3.0f64, -20.0..-4.0f64, -0.5..0.5f64).prop_map(
        |(e1, e2, log_n, kappa, delta_a, delta_c)| {
            let mut p = SystemParams::baseline(10f64.powf(log_n), e1, e2);
            p.kappa1 = kappa;
            p.kappa2 = kappa;
            p.delta_a1 = delta_a;
            p.delta_a2 = delta_a;
            p.delta_c1 = delta_c;
            p.delta_c2 = delta_c;
            p
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn solution_sets_are_odd_refined_and_physical(p in params()) {
        prop_assert!(validate(&p).is_valid());
        let set = find_all_roots(&p).unwrap();
        prop_assert!(set.len() % 2 == 1 && set.len() <= 7);
        prop_assert!(set.stable_count() >= 1);
        for s in &set.solutions {
            prop_assert!(s.residual_norm < RESIDUAL_GATE);
            prop_assert!(physicality_check(&s.state, 1e-8).is_clean());
        }
        prop_assert!(set.solutions.windows(2).all(|w| w[0].x1 <= w[1].x1));
    }

    #[test]
    fn exchanging_modes_maps_solution_sets(p in params()) {
        let direct = find_all_roots(&p).unwrap();
        let mirrored = find_all_roots(&p.swapped()).unwrap();
        prop_assert_eq!(direct.len(), mirrored.len());
        for s in &direct.solutions {
            let (_, d) = mirrored.nearest(&s.swapped().state).unwrap();
            prop_assert!(d < 1e-10);
        }
    }

    #[test]
    fn population_flow_conserves_the_sum(p in params(), seed in 0u64..1000) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = random_physical_state(&p, &mut rng);
        prop_assert!(physicality_check(&s, 1e-12).is_clean());
        let d = rhs(&s, &p);
        let scale = 1.0 + d.ne1.abs() + d.ng1.abs() + d.ne2.abs() + d.ng2.abs();
        prop_assert!(d.population_sum().abs() < 1e-14 * scale);
    }
}
