use bcr_core::density::{classify_vertices, degree_structure_violations, densest_subgraph, projection_multigraph, VertexClass};
use bcr_core::generators::{gen_figure1, gen_random_halfintegral, RandomSpec};
use bcr_core::model::metric_closure;
use bcr_core::rational::{int, ratio, Rational};
use bcr_core::structuring::normalize;
use num_traits::Zero;
use proptest::prelude::*;
use std::collections::BTreeSet;

/// Maximum of `x(E[W]) / (|W| - 1)` over all subsets of the support with at least two vertices.
fn densest_by_enumeration(proj: &[((usize, usize), Rational)]) -> Rational {
    let support: Vec<usize> = proj.iter().flat_map(|((a, b), _)| [*a, *b]).collect::<BTreeSet<_>>().into_iter().collect();
    let mut best = Rational::zero();
    for mask in 1u32..(1 << support.len()) {
        let set: BTreeSet<usize> = (0..support.len()).filter(|i| mask >> i & 1 == 1).map(|i| support[i]).collect();
        if set.len() < 2 {
            continue;
        }
        let mass = proj
            .iter()
            .filter(|((a, b), _)| set.contains(a) && set.contains(b))
            .fold(Rational::zero(), |acc, (_, v)| acc + v);
        let d = mass / int(set.len() as i64 - 1);
        if d > best {
            best = d;
        }
    }
    best
}

#[test]
fn figure1_density_and_degrees() {
    let (inst, sol) = gen_figure1();
    let best = densest_subgraph(&sol, &inst).unwrap();
    let b: BTreeSet<usize> = ["b1", "b2"].iter().map(|l| inst.vertex(l).unwrap()).collect();
    assert_eq!(best.density, int(1));
    assert_eq!(best.set, b);
    let pm = projection_multigraph(&sol).unwrap();
    let b1 = inst.vertex("b1").unwrap();
    let b2 = inst.vertex("b2").unwrap();
    assert_eq!(pm.multiplicity_of((b1.min(b2), b1.max(b2))), 2);
    let c2 = inst.vertex("c2").unwrap();
    assert_eq!(pm.degree_of(c2), 2);
    assert_eq!(classify_vertices(&pm, inst.num_vertices())[c2], VertexClass::LowDegree);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dinkelbach_matches_enumeration(seed in 0u64..100_000, n in 4usize..=10, pairs in 1usize..=4) {
        let (inst, sol) = gen_random_halfintegral(RandomSpec { seed, n, edge_density: 0.5, pairs }).unwrap();
        let proj: Vec<_> = sol.undirected_projection().into_iter().collect();
        let best = densest_subgraph(&sol, &inst).unwrap();
        prop_assert_eq!(&best.density, &densest_by_enumeration(&proj));
    }

    #[test]
    fn normalized_solutions_are_dense_and_well_shaped(seed in 0u64..100_000, n in 5usize..=10, pairs in 1usize..=4) {
        let (inst, sol) = gen_random_halfintegral(RandomSpec { seed, n, edge_density: 0.5, pairs }).unwrap();
        let g = metric_closure(&inst).unwrap().instance;
        let (norm, _) = normalize(&sol, &g).unwrap();
        let best = densest_subgraph(&norm, &g).unwrap();
        prop_assert!(best.density >= ratio(9, 16));
        let pm = projection_multigraph(&norm).unwrap();
        prop_assert!(degree_structure_violations(&pm, g.num_vertices()).is_empty());
        for v in g.vertices() {
            let d = pm.degree_of(v);
            prop_assert!(d == 0 || d >= 2);
        }
    }
}
