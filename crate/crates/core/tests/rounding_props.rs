use bcr_core::forest::{brute_force_opt, check_forest, prune, forest_cost};
use bcr_core::generators::{gen_figure1, gen_lower_bound, gen_random_halfintegral, RandomSpec};
use bcr_core::rational::{int, ratio};
use bcr_core::rounding::{check_ratio, round};
use proptest::prelude::*;

#[test]
fn lower_bound_family_rounds_to_a_spanning_tree() {
    for q in 1..=8usize {
        let (inst, sol) = gen_lower_bound(q).unwrap();
        assert_eq!(sol.cost(&inst).unwrap(), int(2 * q as i64));
        let (forest, trace) = round(&sol, &inst).unwrap();
        assert!(check_forest(&forest, &inst).unwrap().is_feasible());
        assert_eq!(trace.total_cost, int(3 * q as i64 - 1));
        assert_eq!(forest.len(), 3 * q - 1);
    }
}

#[test]
fn lower_bound_optimum_small_q() {
    for q in 1..=3usize {
        let (inst, _) = gen_lower_bound(q).unwrap();
        assert_eq!(brute_force_opt(&inst, 20).unwrap().0, int(3 * q as i64 - 1));
    }
}

#[test]
fn figure1_rounds_within_bound() {
    let (inst, sol) = gen_figure1();
    let (lp, rounded, r, trace) = check_ratio(&sol, &inst).unwrap();
    assert_eq!(lp, int(5));
    assert!(r <= ratio(16, 9));
    assert!(check_forest(&trace.forest, &inst).unwrap().is_feasible());
    assert_eq!(forest_cost(&trace.forest, &inst).unwrap(), rounded);
    assert_eq!(trace.levels[0].set, vec!["b1".to_string(), "b2".to_string()]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rounding_is_feasible_bounded_and_above_opt(seed in 0u64..100_000, n in 4usize..=7, pairs in 1usize..=3) {
        let (inst, sol) = gen_random_halfintegral(RandomSpec { seed, n, edge_density: 0.45, pairs }).unwrap();
        let (lp, rounded, _, trace) = check_ratio(&sol, &inst).unwrap();
        prop_assert!(check_forest(&trace.forest, &inst).unwrap().is_feasible());
        prop_assert!(rounded <= ratio(16, 9) * &lp);
        for l in &trace.levels {
            prop_assert!(l.mst_bound_holds());
            prop_assert!(l.charge_split_holds());
        }
        if inst.num_edges() <= 16 {
            let (opt, _) = brute_force_opt(&inst, 16).unwrap();
            prop_assert!(opt <= rounded);
        }
        let pruned = prune(&trace.unpruned, &inst);
        prop_assert_eq!(&pruned, &trace.forest);
        prop_assert!(trace.total_cost <= trace.unpruned_cost);
    }
}
