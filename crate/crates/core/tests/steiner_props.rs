use bcr_core::generators::{gen_random_single_component, path_representation, star_representation, RandomSpec};
use bcr_core::lp::{solve_forest_bcr, solve_tree_bcr, LpOptions};
use bcr_core::solution::verify_tree_bcr;
use bcr_core::steiner::{default_root, to_tree_bcr};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reorientation_keeps_cost_and_feasibility(seed in 0u64..100_000, n in 4usize..=10, pairs in 1usize..=3) {
        let (inst, sol) = gen_random_single_component(RandomSpec { seed, n, edge_density: 0.5, pairs }).unwrap();
        let terms = inst.terminals();
        for r0 in terms.iter().copied() {
            let t = to_tree_bcr(&sol, &inst, r0).unwrap();
            prop_assert!(verify_tree_bcr(&t, &terms, &inst).is_feasible());
            prop_assert_eq!(t.cost(&inst).unwrap(), sol.cost(&inst).unwrap());
        }
    }
}

#[test]
fn forest_and_tree_optima_agree_across_representations() {
    for seed in 0..12u64 {
        let spec = RandomSpec { seed, n: 6 + (seed % 3) as usize, edge_density: 0.5, pairs: 2 + (seed % 2) as usize };
        let (inst, _) = gen_random_single_component(spec).unwrap();
        let opts = LpOptions::default();
        let star = solve_forest_bcr(&star_representation(&inst), opts).unwrap().value;
        let path = solve_forest_bcr(&path_representation(&inst), opts).unwrap().value;
        let given = solve_forest_bcr(&inst, opts).unwrap().value;
        let r0 = default_root(&inst).unwrap();
        let tree = solve_tree_bcr(&inst, &inst.terminals(), r0, opts).unwrap().value;
        assert_eq!(star, tree, "seed {seed}");
        assert_eq!(path, tree, "seed {seed}");
        assert_eq!(given, tree, "seed {seed}");
    }
}
