//! Recursive densest-subgraph contraction rounding of Forest-BCR solutions.

use crate::density::{densest_subgraph, DensityError, DensityResult};
use crate::forest::{check_forest, forest_cost, prune};
use crate::model::{edge_key, metric_closure, Arc, EdgeKey, Instance, MetricClosure, ModelError, Pair, UnionFind, VertexId};
use crate::rational::{compact, is_half_integral, ratio, Rational};
use crate::solution::{verify_primal, BcrSolution, SolutionError};
use crate::structuring::{normalize, StructuringError};
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, Clone, thiserror::Error)]
pub enum RoundingError {
    #[error("input solution is infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Structuring(#[from] StructuringError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Solution(#[from] SolutionError),
    #[error("vertex set is not connected in the metric closure")]
    NotConnected,
    #[error("rounded cost {rounded} exceeds 16/9 of the LP cost {lp}")]
    RatioExceeded { lp: Rational, rounded: Rational, trace: Box<RoundingTrace> },
}

/// Minimum spanning tree of `inst[set]` (Kruskal; ties by cost, then edge labels).
pub fn mst_on(inst: &Instance, set: &BTreeSet<VertexId>) -> Result<(Vec<EdgeKey>, Rational), RoundingError> {
    let mut edges: Vec<(&Rational, (&str, &str), EdgeKey)> = inst
        .edges()
        .iter()
        .filter(|((a, b), _)| set.contains(a) && set.contains(b))
        .map(|(&(a, b), c)| {
            let (la, lb) = (inst.label(a), inst.label(b));
            (c, if la <= lb { (la, lb) } else { (lb, la) }, (a, b))
        })
        .collect();
    edges.sort();
    let mut uf = UnionFind::new(inst.num_vertices());
    let mut tree = Vec::new();
    let mut cost = Rational::zero();
    for (c, _, (a, b)) in edges {
        if uf.union(a, b) {
            tree.push((a, b));
            cost += c;
        }
    }
    if set.len() >= 1 && tree.len() + 1 != set.len() {
        return Err(RoundingError::NotConnected);
    }
    Ok((tree, cost))
}

/// Result of merging `W` into a single vertex `w*`.
#[derive(Debug, Clone)]
pub struct Contraction {
    pub instance: Instance,
    pub solution: BcrSolution,
    /// New id of every old vertex.
    pub map: Vec<VertexId>,
    pub merged: VertexId,
    /// For each new edge, the cheapest old edge it was built from.
    pub origin: BTreeMap<EdgeKey, EdgeKey>,
}

/// Merges `set` into a fresh vertex labelled `label`. Edges inside the set vanish,
/// parallel edges keep the cheaper cost, pairs inside the set are dropped and
/// the remaining ones are redirected. All x and z values are mapped through
/// the vertex map and summed.
pub fn contract(inst: &Instance, sol: &BcrSolution, set: &BTreeSet<VertexId>, label: &str) -> Result<Contraction, RoundingError> {
    let keep: Vec<VertexId> = inst.vertices().filter(|v| !set.contains(v)).collect();
    let mut labels: Vec<&str> = keep.iter().map(|&v| inst.label(v)).collect();
    labels.push(label);
    let mut out = Instance::new(labels)?;
    let merged = keep.len();
    let mut map = vec![merged; inst.num_vertices()];
    for (i, &v) in keep.iter().enumerate() {
        map[v] = i;
    }
    let mut origin: BTreeMap<EdgeKey, EdgeKey> = BTreeMap::new();
    for (&(a, b), c) in inst.edges() {
        let (na, nb) = (map[a], map[b]);
        if na == nb {
            continue;
        }
        let key = edge_key(na, nb);
        if out.cost(na, nb).map_or(true, |old| c < old) {
            out.add_edge(na, nb, c.clone())?;
            origin.insert(key, (a, b));
        }
    }
    let mut pair_map = vec![None; inst.pairs().len()];
    for (i, p) in inst.pairs().iter().enumerate() {
        let (s, t) = (map[p.s], map[p.t]);
        if s != t {
            pair_map[i] = Some(out.add_pair(s, t)?);
        }
    }
    let mut solution = BcrSolution::new();
    for (r, arc, v) in sol.x_entries() {
        let (a, b) = (map[arc.tail], map[arc.head]);
        if a != b {
            solution.add_x(map[r], Arc::new(a, b), v);
        }
    }
    for (r, p, v) in sol.z_entries() {
        if let Some(np) = pair_map[p] {
            solution.add_z(map[r], np, v);
        }
    }
    Ok(Contraction { instance: out, solution, map, merged, origin })
}

/// One recursion level of the rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTrace {
    pub level: usize,
    pub vertices: usize,
    pub pairs: usize,
    pub reroutes: usize,
    pub splitoffs: usize,
    pub reductions: usize,
    /// `c(x)` before and after structuring on the metric closure.
    pub cost_input: Rational,
    pub cost_x: Rational,
    pub set: Vec<String>,
    pub density: Rational,
    pub mst_cost: Rational,
    pub mst_edges: Vec<(String, String)>,
    /// `c(x|E[W])`.
    pub inside_cost: Rational,
    /// `c(x_W)`: cost of the contracted solution on the contracted instance.
    pub contracted_cost: Rational,
    pub merged_label: String,
}

impl LevelTrace {
    /// `mst(W) · density ≤ c(x|E[W])`.
    pub fn mst_bound_holds(&self) -> bool {
        &self.mst_cost * &self.density <= self.inside_cost
    }

    /// `c(x_W) + c(x|E[W]) ≤ c(x)`.
    pub fn charge_split_holds(&self) -> bool {
        &self.contracted_cost + &self.inside_cost <= self.cost_x
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingTrace {
    pub levels: Vec<LevelTrace>,
    pub unpruned: BTreeSet<EdgeKey>,
    pub unpruned_cost: Rational,
    pub forest: BTreeSet<EdgeKey>,
    pub total_cost: Rational,
    pub input_half_integral: bool,
}

impl RoundingTrace {
    pub fn min_density(&self) -> Option<&Rational> {
        self.levels.iter().map(|l| &l.density).min()
    }

    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for l in &self.levels {
            let _ = writeln!(out, "level {}", l.level);
            let _ = writeln!(out, "  vertices {} pairs {}", l.vertices, l.pairs);
            let _ = writeln!(
                out,
                "  structuring reroutes {} splitoffs {} reductions {} cost {} -> {}",
                l.reroutes,
                l.splitoffs,
                l.reductions,
                compact(&l.cost_input),
                compact(&l.cost_x)
            );
            let _ = writeln!(out, "  W {{{}}} density {}", l.set.join(","), compact(&l.density));
            let edges: Vec<String> = l.mst_edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
            let _ = writeln!(out, "  mst {} cost {}", edges.join(" "), compact(&l.mst_cost));
            let _ = writeln!(
                out,
                "  c(x|E[W]) {} c(x_W) {} merged into {}",
                compact(&l.inside_cost),
                compact(&l.contracted_cost),
                l.merged_label
            );
        }
        let _ = writeln!(out, "expanded {} edges cost {}", self.unpruned.len(), compact(&self.unpruned_cost));
        let _ = writeln!(out, "pruned {} edges cost {}", self.forest.len(), compact(&self.total_cost));
        for &(a, b) in &self.forest {
            let _ = writeln!(out, "  {}-{}", inst.label(a), inst.label(b));
        }
        out
    }
}

struct Level {
    closure: MetricClosure,
    /// Edges of the next level's graph mapped to closure edges of this level.
    origin: BTreeMap<EdgeKey, EdgeKey>,
}

fn expand_edge(levels: &[Level], k: usize, e: EdgeKey, out: &mut BTreeSet<EdgeKey>) {
    if k == 0 {
        out.insert(e);
        return;
    }
    let (a, b) = levels[k - 1].origin[&e];
    for pe in levels[k - 1].closure.expand(a, b) {
        expand_edge(levels, k - 1, pe, out);
    }
}

/// Rounds a feasible solution into a Steiner forest of the original graph.
pub fn round(sol: &BcrSolution, inst: &Instance) -> Result<(BTreeSet<EdgeKey>, RoundingTrace), RoundingError> {
    round_observed(sol, inst, &mut |_, _, _, _| {})
}

/// [`round`], calling `observe(level, closure, normalized solution, densest set)` at every level.
pub fn round_observed(
    sol: &BcrSolution,
    inst: &Instance,
    observe: &mut dyn FnMut(usize, &Instance, &BcrSolution, &DensityResult),
) -> Result<(BTreeSet<EdgeKey>, RoundingTrace), RoundingError> {
    let verdict = verify_primal(sol, inst);
    if !verdict.is_feasible() {
        return Err(RoundingError::Infeasible(verdict.describe(inst)));
    }
    let mut levels: Vec<Level> = Vec::new();
    let mut traces = Vec::new();
    let mut unpruned = BTreeSet::new();
    let mut cur_inst = inst.clone();
    let mut cur_sol = sol.clone();
    while !cur_inst.pairs().is_empty() {
        let k = levels.len();
        let closure = metric_closure(&cur_inst)?;
        let g = &closure.instance;
        let cost_input = cur_sol.cost(g)?;
        let (ws, report) = normalize(&cur_sol, g)?;
        let best = densest_subgraph(&ws, g)?;
        observe(k, g, &ws, &best);
        let (mst, mst_cost) = mst_on(g, &best.set)?;
        let inside_cost = ws
            .x_entries()
            .filter(|(_, a, _)| best.set.contains(&a.tail) && best.set.contains(&a.head))
            .fold(Rational::zero(), |acc, (_, a, v)| acc + g.arc_cost(a).expect("closure arc") * v);
        let merged_label = format!("W#{}", k + 1);
        let c = contract(g, &ws, &best.set, &merged_label)?;
        traces.push(LevelTrace {
            level: k,
            vertices: g.num_vertices(),
            pairs: g.pairs().len(),
            reroutes: report.reroutes,
            splitoffs: report.splitoffs.len(),
            reductions: report.reductions.len(),
            cost_input,
            cost_x: report.cost_after,
            set: best.set.iter().map(|&v| g.label(v).to_string()).collect(),
            density: best.density,
            mst_cost,
            mst_edges: mst.iter().map(|&(a, b)| (g.label(a).to_string(), g.label(b).to_string())).collect(),
            inside_cost,
            contracted_cost: c.solution.cost(&c.instance)?,
            merged_label,
        });
        levels.push(Level { closure, origin: c.origin });
        for (a, b) in mst {
            for pe in levels[k].closure.expand(a, b) {
                expand_edge(&levels, k, pe, &mut unpruned);
            }
        }
        cur_inst = c.instance;
        cur_sol = c.solution;
    }
    let forest = prune(&unpruned, inst);
    let trace = RoundingTrace {
        levels: traces,
        unpruned_cost: forest_cost(&unpruned, inst).expect("edges of the base graph"),
        unpruned,
        total_cost: forest_cost(&forest, inst).expect("edges of the base graph"),
        forest: forest.clone(),
        input_half_integral: sol.is_half_integral(),
    };
    debug_assert!(check_forest(&forest, inst).map(|v| v.is_feasible()).unwrap_or(false));
    Ok((forest, trace))
}

/// `(lp cost, rounded cost, rounded / lp)`; fails if a half-integral input
/// is rounded above `16/9` of its cost. A zero LP cost gives ratio 1.
pub fn check_ratio(sol: &BcrSolution, inst: &Instance) -> Result<(Rational, Rational, Rational, RoundingTrace), RoundingError> {
    let lp = sol.cost(inst)?;
    let (_, trace) = round(sol, inst)?;
    let rounded = trace.total_cost.clone();
    let r = if lp.is_zero() { Rational::one() } else { &rounded / &lp };
    let half = sol.x_entries().all(|(_, _, v)| is_half_integral(v)) && sol.z_entries().all(|(_, _, v)| is_half_integral(v));
    if half && rounded > ratio(16, 9) * &lp {
        return Err(RoundingError::RatioExceeded { lp, rounded, trace: Box::new(trace) });
    }
    Ok((lp, rounded, r, trace))
}

/// Pair list of an instance after a vertex relabelling; used by tests.
pub fn mapped_pairs(pairs: &[Pair], map: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    pairs.iter().map(|p| (map[p.s], map[p.t])).collect()
}
