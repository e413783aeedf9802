use bcr_core::generators::{gadget_instance, gen_lower_bound, Representation};
use bcr_core::lp::{solve_forest_bcr, solve_tree_bcr, LpOptions};
use bcr_core::rational::int;
use bcr_core::solution::verify_primal;

#[test]
fn gadget_optima() {
    for (rep, want) in [(Representation::P1, 12), (Representation::P2, 13)] {
        let inst = gadget_instance(rep);
        let res = solve_forest_bcr(&inst, LpOptions::default()).unwrap();
        assert_eq!(res.value, int(want));
        assert!(verify_primal(&res.solution, &inst).is_feasible());
        assert_eq!(res.solution.cost(&inst).unwrap(), int(want));
    }
}

#[test]
fn gadget_a_component_as_steiner_tree() {
    // The a-component alone: both representations and the tree relaxation agree.
    let p1 = gadget_instance(Representation::P1);
    let p2 = gadget_instance(Representation::P2);
    let keep = |inst: &bcr_core::Instance| {
        let pairs: Vec<_> = inst.pairs().iter().filter(|p| inst.label(p.s).starts_with('a')).cloned().collect();
        inst.with_pairs(pairs)
    };
    let (a1, a2) = (keep(&p1), keep(&p2));
    let f1 = solve_forest_bcr(&a1, LpOptions::default()).unwrap().value;
    let f2 = solve_forest_bcr(&a2, LpOptions::default()).unwrap().value;
    let terms = a1.terminals();
    let r0 = *terms.iter().next().unwrap();
    let t = solve_tree_bcr(&a1, &terms, r0, LpOptions::default()).unwrap().value;
    assert_eq!(f1, f2);
    assert_eq!(f1, t);
}

#[test]
fn lower_bound_lp_is_at_most_2q() {
    for q in 1..=3 {
        let (inst, _) = gen_lower_bound(q).unwrap();
        let res = solve_forest_bcr(&inst, LpOptions::default()).unwrap();
        assert!(res.value <= int(2 * q as i64));
        assert!(verify_primal(&res.solution, &inst).is_feasible());
    }
}
