//! Maximum-density vertex sets and the projection multigraph of half-integral solutions.

use crate::flow::{min_cut_value, FlowNetwork};
use crate::model::{EdgeKey, Instance, VertexId};
use crate::rational::{common_denominator, int, Rational};
use crate::solution::BcrSolution;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DensityError {
    #[error("density needs at least two vertices")]
    TooSmall,
    #[error("the solution has no positive x value")]
    NoSupport,
    #[error("{0} support vertices exceed the brute-force limit")]
    TooLarge(usize),
    #[error("solution is not half-integral")]
    NotHalfIntegral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DensityResult {
    pub set: BTreeSet<VertexId>,
    pub density: Rational,
    /// Support edge contained in `set` whose search produced it.
    pub anchor: (VertexId, VertexId),
}

pub const BRUTE_FORCE_LIMIT: usize = 16;

/// `x(E[W])` from the undirected projection.
pub fn mass_inside(proj: &BTreeMap<EdgeKey, Rational>, set: &BTreeSet<VertexId>) -> Rational {
    proj.iter()
        .filter(|((a, b), _)| set.contains(a) && set.contains(b))
        .fold(Rational::zero(), |acc, (_, v)| acc + v)
}

pub fn density_of(sol: &BcrSolution, set: &BTreeSet<VertexId>) -> Result<Rational, DensityError> {
    if set.len() < 2 {
        return Err(DensityError::TooSmall);
    }
    Ok(mass_inside(&sol.undirected_projection(), set) / int(set.len() as i64 - 1))
}

/// Orders results by density, then smaller sets, then sorted labels.
fn better(inst: &Instance, a: &DensityResult, b: &DensityResult) -> bool {
    match a.density.cmp(&b.density) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match a.set.len().cmp(&b.set.len()) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => sorted_labels(inst, &a.set) < sorted_labels(inst, &b.set),
        },
    }
}

fn sorted_labels<'a>(inst: &'a Instance, set: &BTreeSet<VertexId>) -> Vec<&'a str> {
    let mut l: Vec<&str> = set.iter().map(|&v| inst.label(v)).collect();
    l.sort_unstable();
    l
}

/// Maximum density over sets containing both ends of `anchor`, by Dinkelbach
/// iteration. Each step minimises `γ(|U|−1) − x(E[U])` with one min cut over a
/// selection network: source → edge node (capacity = edge mass), edge node →
/// both endpoint nodes (unbounded), vertex node → sink (capacity γ).
pub fn densest_with_anchor(proj: &BTreeMap<EdgeKey, Rational>, anchor: EdgeKey) -> DensityResult {
    let verts: BTreeSet<VertexId> = proj.keys().flat_map(|&(a, b)| [a, b]).collect();
    let verts: Vec<VertexId> = verts.into_iter().collect();
    let local: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let k = verts.len();
    let edges: Vec<(&EdgeKey, &Rational)> = proj.iter().collect();
    let source = k + edges.len();
    let sink = source + 1;
    let total: Rational = proj.values().fold(Rational::zero(), |a, v| a + v);
    let unbounded = &total + int(1);

    let mut set = BTreeSet::from([anchor.0, anchor.1]);
    let mut gamma = proj.get(&anchor).cloned().unwrap_or_else(Rational::zero);
    loop {
        let mut net = FlowNetwork::new(sink + 1);
        for (i, ((a, b), w)) in edges.iter().enumerate() {
            net.add_arc(source, k + i, (*w).clone());
            net.add_arc(k + i, local[a], unbounded.clone());
            net.add_arc(k + i, local[b], unbounded.clone());
        }
        for i in 0..k {
            net.add_arc(i, sink, gamma.clone());
        }
        let forced = [source, local[&anchor.0], local[&anchor.1]];
        let (cut, side) = min_cut_value(&net, &forced, &[sink]).expect("disjoint terminals");
        // cut = Σ_{e ⊄ U} w_e + γ|U|, so h(U) = cut − total − γ.
        let h = cut - &total - &gamma;
        if !h.is_negative() {
            break;
        }
        let next: BTreeSet<VertexId> = side.iter().filter(|&&i| i < k).map(|&i| verts[i]).collect();
        let d = mass_inside(proj, &next) / int(next.len() as i64 - 1);
        debug_assert!(d > gamma);
        set = next;
        gamma = d;
    }
    DensityResult { set, density: gamma, anchor }
}

/// Best density found for every support-edge anchor.
pub fn anchor_densities(sol: &BcrSolution) -> Vec<(EdgeKey, Rational)> {
    let proj = sol.undirected_projection();
    proj.keys()
        .map(|&e| (e, densest_with_anchor(&proj, e).density))
        .collect()
}

/// Exact maximum of `x(E[W]) / (|W|−1)` over all `W` with `|W| ≥ 2`.
pub fn densest_subgraph(sol: &BcrSolution, inst: &Instance) -> Result<DensityResult, DensityError> {
    let proj = sol.undirected_projection();
    let mut best: Option<DensityResult> = None;
    for &e in proj.keys() {
        let cand = densest_with_anchor(&proj, e);
        if best.as_ref().map_or(true, |b| better(inst, &cand, b)) {
            best = Some(cand);
        }
    }
    best.ok_or(DensityError::NoSupport)
}

/// Exhaustive search over subsets of the support vertices.
pub fn densest_subgraph_bruteforce(sol: &BcrSolution, inst: &Instance) -> Result<DensityResult, DensityError> {
    let proj = sol.undirected_projection();
    let verts: Vec<VertexId> = proj
        .keys()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if verts.is_empty() {
        return Err(DensityError::NoSupport);
    }
    if verts.len() > BRUTE_FORCE_LIMIT {
        return Err(DensityError::TooLarge(verts.len()));
    }
    let scale = Rational::from_integer(common_denominator(proj.values()));
    let to_int = |v: &Rational| -> Option<i128> { (v * &scale).to_integer().to_i128() };
    let pos = |v: VertexId| verts.binary_search(&v).unwrap();
    let weighted: Vec<(u32, i128)> = proj
        .iter()
        .map(|(&(a, b), v)| Some(((1u32 << pos(a)) | (1u32 << pos(b)), to_int(v)?)))
        .collect::<Option<_>>()
        .ok_or(DensityError::TooLarge(verts.len()))?;
    let mut best: Option<DensityResult> = None;
    for mask in 1u32..(1u32 << verts.len()) {
        let size = mask.count_ones() as i64;
        if size < 2 {
            continue;
        }
        let mass: i128 = weighted.iter().filter(|(m, _)| mask & m == *m).map(|(_, w)| w).sum();
        let density = Rational::new(BigInt::from(mass), BigInt::from(size - 1)) / &scale;
        if let Some(b) = &best {
            if density < b.density {
                continue;
            }
        }
        let set: BTreeSet<VertexId> = (0..verts.len()).filter(|i| mask >> i & 1 == 1).map(|i| verts[i]).collect();
        let anchor = proj
            .keys()
            .find(|(a, b)| set.contains(a) && set.contains(b))
            .copied()
            .unwrap_or((verts[0], verts[0]));
        let cand = DensityResult { set, density, anchor };
        if best.as_ref().map_or(true, |b| better(inst, &cand, b)) {
            best = Some(cand);
        }
    }
    Ok(best.expect("at least one pair of support vertices"))
}

/// `2·Σ_r (x^r_(v,w) + x^r_(w,v))` parallel copies of each edge `{v,w}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProjectionMultigraph {
    pub multiplicity: BTreeMap<EdgeKey, u64>,
    pub degree: BTreeMap<VertexId, u64>,
}

impl ProjectionMultigraph {
    pub fn degree_of(&self, v: VertexId) -> u64 {
        self.degree.get(&v).copied().unwrap_or(0)
    }

    pub fn multiplicity_of(&self, e: EdgeKey) -> u64 {
        self.multiplicity.get(&e).copied().unwrap_or(0)
    }

    pub fn neighbours(&self, v: VertexId) -> impl Iterator<Item = (VertexId, u64)> + '_ {
        self.multiplicity.iter().filter_map(move |(&(a, b), &m)| {
            if a == v {
                Some((b, m))
            } else if b == v {
                Some((a, m))
            } else {
                None
            }
        })
    }

    pub fn num_edges(&self) -> u64 {
        self.multiplicity.values().sum()
    }

    /// Density of `set` recomputed as `|Ê[W]| / (2(|W|−1))`.
    pub fn density(&self, set: &BTreeSet<VertexId>) -> Result<Rational, DensityError> {
        if set.len() < 2 {
            return Err(DensityError::TooSmall);
        }
        let inside: u64 = self
            .multiplicity
            .iter()
            .filter(|((a, b), _)| set.contains(a) && set.contains(b))
            .map(|(_, m)| m)
            .sum();
        Ok(Rational::new(BigInt::from(inside), BigInt::from(2 * (set.len() as i64 - 1))))
    }
}

pub fn projection_multigraph(sol: &BcrSolution) -> Result<ProjectionMultigraph, DensityError> {
    let mut pm = ProjectionMultigraph::default();
    for (e, v) in sol.undirected_projection() {
        let twice = v * int(2);
        if !twice.is_integer() || twice.is_negative() {
            return Err(DensityError::NotHalfIntegral);
        }
        let m = twice.to_integer().to_u64().ok_or(DensityError::NotHalfIntegral)?;
        pm.multiplicity.insert(e, m);
        *pm.degree.entry(e.0).or_default() += m;
        *pm.degree.entry(e.1).or_default() += m;
    }
    Ok(pm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    NonSupport,
    LowDegree,
    HighDegree,
}

/// Class of every vertex `0..num_vertices`.
pub fn classify_vertices(pm: &ProjectionMultigraph, num_vertices: usize) -> Vec<VertexClass> {
    (0..num_vertices)
        .map(|v| match pm.degree_of(v) {
            0 => VertexClass::NonSupport,
            1 | 2 => VertexClass::LowDegree,
            _ => VertexClass::HighDegree,
        })
        .collect()
}

/// Support vertices with degree below two, or with neither a doubled incident
/// edge nor a high-degree vertex in their closed neighbourhood.
pub fn degree_structure_violations(pm: &ProjectionMultigraph, num_vertices: usize) -> Vec<VertexId> {
    let class = classify_vertices(pm, num_vertices);
    (0..num_vertices)
        .filter(|&v| {
            let d = pm.degree_of(v);
            if d == 0 {
                return false;
            }
            if d < 2 {
                return true;
            }
            let parallel = pm.neighbours(v).any(|(_, m)| m >= 2);
            let high = class[v] == VertexClass::HighDegree
                || pm.neighbours(v).any(|(w, _)| class[w] == VertexClass::HighDegree);
            !(parallel || high)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Arc;
    use crate::rational::{half, ratio};

    fn cycle4() -> (Instance, BcrSolution) {
        let inst = Instance::parse("vertices a b c d\nedge a b 1\nedge b c 1\nedge c d 1\nedge d a 1\n").unwrap();
        let mut sol = BcrSolution::new();
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            sol.set_x(0, Arc::new(u, v), half());
        }
        (inst, sol)
    }

    #[test]
    fn four_cycle_whole_set() {
        let (inst, sol) = cycle4();
        let b = densest_subgraph_bruteforce(&sol, &inst).unwrap();
        assert_eq!(b.density, ratio(2, 3));
        assert_eq!(b.set, BTreeSet::from([0, 1, 2, 3]));
        let d = densest_subgraph(&sol, &inst).unwrap();
        assert_eq!(d.density, ratio(2, 3));
        assert_eq!(d.set, b.set);
    }

    #[test]
    fn opposite_arcs_give_density_one() {
        let inst = Instance::parse("vertices u v w\nedge u v 1\nedge v w 1\n").unwrap();
        let mut sol = BcrSolution::new();
        sol.set_x(0, Arc::new(0, 1), half());
        sol.set_x(1, Arc::new(1, 0), half());
        sol.set_x(1, Arc::new(2, 1), half());
        let d = densest_subgraph(&sol, &inst).unwrap();
        assert_eq!((d.set, d.density), (BTreeSet::from([0, 1]), int(1)));
        assert_eq!(densest_subgraph_bruteforce(&sol, &inst).unwrap().density, int(1));
        assert_eq!(density_of(&sol, &BTreeSet::from([0, 2])).unwrap(), int(0));
        assert_eq!(density_of(&sol, &BTreeSet::from([0])), Err(DensityError::TooSmall));
    }

    #[test]
    fn empty_support() {
        let (inst, _) = cycle4();
        let sol = BcrSolution::new();
        assert_eq!(densest_subgraph(&sol, &inst), Err(DensityError::NoSupport));
        assert_eq!(densest_subgraph_bruteforce(&sol, &inst), Err(DensityError::NoSupport));
        assert_eq!(projection_multigraph(&sol).unwrap(), ProjectionMultigraph::default());
    }

    #[test]
    fn multigraph_and_classes() {
        let (_, mut sol) = cycle4();
        sol.set_x(1, Arc::new(0, 1), int(1));
        let pm = projection_multigraph(&sol).unwrap();
        assert_eq!(pm.multiplicity_of((0, 1)), 3);
        assert_eq!(pm.degree_of(0), 4);
        let classes = classify_vertices(&pm, 5);
        assert_eq!(
            classes,
            vec![
                VertexClass::HighDegree,
                VertexClass::HighDegree,
                VertexClass::LowDegree,
                VertexClass::LowDegree,
                VertexClass::NonSupport
            ]
        );
        assert!(degree_structure_violations(&pm, 5).is_empty());
        let all = BTreeSet::from([0, 1, 2, 3]);
        assert_eq!(pm.density(&all).unwrap(), density_of(&sol, &all).unwrap());

        sol.set_x(0, Arc::new(0, 1), ratio(1, 4));
        assert_eq!(projection_multigraph(&sol), Err(DensityError::NotHalfIntegral));
    }

    #[test]
    fn bare_cycle_violates_structure() {
        let (_, sol) = cycle4();
        let pm = projection_multigraph(&sol).unwrap();
        assert_eq!(degree_structure_violations(&pm, 4), vec![0, 1, 2, 3]);
    }
}
