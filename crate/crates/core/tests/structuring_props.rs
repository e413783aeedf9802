use bcr_core::corpus::spec_for;
use bcr_core::generators::{gen_random_halfintegral, RandomSpec};
use bcr_core::model::metric_closure;
use bcr_core::solution::verify_primal;
use bcr_core::structuring::{find_reduction, find_split, fully_reduce, normalize, split_off, steiner_roots_with_z, well_structure};
use proptest::prelude::*;

#[test]
fn split_off_regression_seed_82() {
    // A split-off once lowered a cut containing both outer endpoints but not the middle vertex.
    let (inst, sol) = gen_random_halfintegral(spec_for(82, &(6..=12))).unwrap();
    let g = metric_closure(&inst).unwrap().instance;
    let (out, log) = split_off(&sol, &g).unwrap();
    assert!(!log.is_empty());
    assert!(verify_primal(&out, &g).is_feasible(), "{}", verify_primal(&out, &g).describe(&g));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_is_safe_and_complete(seed in 0u64..100_000, n in 5usize..=10, pairs in 1usize..=4) {
        let (inst, sol) = gen_random_halfintegral(RandomSpec { seed, n, edge_density: 0.5, pairs }).unwrap();
        let g = metric_closure(&inst).unwrap().instance;
        let before = sol.cost(&g).unwrap();
        let (ws, _) = well_structure(&sol, &g).unwrap();
        prop_assert!(verify_primal(&ws, &g).is_feasible());
        prop_assert!(steiner_roots_with_z(&ws, &g).is_empty());
        prop_assert!(find_split(&ws, &g).is_none());
        prop_assert!(ws.cost(&g).unwrap() <= before);
        let (red, _) = fully_reduce(&ws, &g);
        prop_assert!(verify_primal(&red, &g).is_feasible());
        prop_assert!(find_reduction(&red, &g).is_none());
        prop_assert!(red.is_half_integral());
        let (norm, report) = normalize(&sol, &g).unwrap();
        prop_assert_eq!(norm, red);
        prop_assert!(report.cost_after <= report.cost_before);
    }
}
