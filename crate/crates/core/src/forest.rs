//! Integral Steiner forests: feasibility, cost, exhaustive optimum and pruning.

use crate::model::{edge_key, strip_comment, EdgeKey, Instance, UnionFind, VertexId};
use crate::rational::{common_denominator, Rational};
use num_traits::{ToPrimitive, Zero};
use std::collections::BTreeSet;
use std::fmt::Write as _;

pub const DEFAULT_EDGE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ForestError {
    #[error("edge {0}-{1} is not in the instance")]
    UnknownEdge(String, String),
    #[error("{edges} edges exceed the exhaustive-search cap of {cap}")]
    TooLarge { edges: usize, cap: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForestVerdict {
    Feasible,
    UnconnectedPair(VertexId, VertexId),
}

impl ForestVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, ForestVerdict::Feasible)
    }
}

fn connects_all(inst: &Instance, edges: impl IntoIterator<Item = EdgeKey>) -> ForestVerdict {
    let mut uf = UnionFind::new(inst.num_vertices());
    for (a, b) in edges {
        uf.union(a, b);
    }
    for p in inst.pairs() {
        if !uf.connected(p.s, p.t) {
            return ForestVerdict::UnconnectedPair(p.s, p.t);
        }
    }
    ForestVerdict::Feasible
}

pub fn check_forest(edges: &BTreeSet<EdgeKey>, inst: &Instance) -> Result<ForestVerdict, ForestError> {
    for &(a, b) in edges {
        if inst.cost(a, b).is_none() {
            return Err(ForestError::UnknownEdge(inst.label(a).into(), inst.label(b).into()));
        }
    }
    Ok(connects_all(inst, edges.iter().copied()))
}

pub fn forest_cost(edges: &BTreeSet<EdgeKey>, inst: &Instance) -> Result<Rational, ForestError> {
    edges.iter().try_fold(Rational::zero(), |acc, &(a, b)| {
        inst.cost(a, b)
            .map(|c| acc + c)
            .ok_or_else(|| ForestError::UnknownEdge(inst.label(a).into(), inst.label(b).into()))
    })
}

/// Minimum-cost feasible edge set by enumerating all subsets. Among optima the
/// lexicographically smallest sorted edge list wins.
pub fn brute_force_opt(inst: &Instance, edge_cap: usize) -> Result<(Rational, BTreeSet<EdgeKey>), ForestError> {
    let edges: Vec<(EdgeKey, &Rational)> = inst.edges().iter().map(|(&e, c)| (e, c)).collect();
    if edges.len() > edge_cap || edges.len() >= 63 {
        return Err(ForestError::TooLarge { edges: edges.len(), cap: edge_cap });
    }
    let scale = Rational::from_integer(common_denominator(edges.iter().map(|(_, c)| *c)));
    let costs: Vec<i128> = edges
        .iter()
        .map(|(_, c)| (*c * &scale).to_integer().to_i128())
        .collect::<Option<_>>()
        .ok_or(ForestError::TooLarge { edges: edges.len(), cap: edge_cap })?;
    let mut best: Option<(i128, Vec<EdgeKey>)> = None;
    for mask in 0u64..(1u64 << edges.len()) {
        let cost: i128 = (0..edges.len()).filter(|i| mask >> i & 1 == 1).map(|i| costs[i]).sum();
        if let Some((bc, _)) = &best {
            if cost > *bc {
                continue;
            }
        }
        let chosen: Vec<EdgeKey> = (0..edges.len()).filter(|i| mask >> i & 1 == 1).map(|i| edges[i].0).collect();
        if !connects_all(inst, chosen.iter().copied()).is_feasible() {
            continue;
        }
        let replace = match &best {
            None => true,
            Some((bc, be)) => cost < *bc || chosen < *be,
        };
        if replace {
            best = Some((cost, chosen));
        }
    }
    let (cost, set) = best.expect("the full edge set is feasible whenever any set is");
    Ok((Rational::from_integer(cost.into()) / scale, set.into_iter().collect()))
}

/// Inclusion-minimal feasible subset: edges are tried for removal by
/// decreasing cost, then by label.
pub fn prune(edges: &BTreeSet<EdgeKey>, inst: &Instance) -> BTreeSet<EdgeKey> {
    let mut order: Vec<EdgeKey> = edges.iter().copied().collect();
    let label = |e: &EdgeKey| {
        let (a, b) = (inst.label(e.0), inst.label(e.1));
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    };
    order.sort_by(|x, y| {
        let cx = inst.cost(x.0, x.1).cloned().unwrap_or_else(Rational::zero);
        let cy = inst.cost(y.0, y.1).cloned().unwrap_or_else(Rational::zero);
        cy.cmp(&cx).then_with(|| label(x).cmp(&label(y)))
    });
    let mut keep = edges.clone();
    for e in order {
        keep.remove(&e);
        if !connects_all(inst, keep.iter().copied()).is_feasible() {
            keep.insert(e);
        }
    }
    keep
}

pub fn parse_forest(text: &str, inst: &Instance) -> Result<BTreeSet<EdgeKey>, ForestError> {
    let mut out = BTreeSet::new();
    for (no, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let perr = |msg: String| ForestError::Parse { line: no + 1, msg };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "edge" {
            return Err(perr("expected `edge <u> <v>`".into()));
        }
        let a = inst.require(toks[1]).map_err(|e| perr(e.to_string()))?;
        let b = inst.require(toks[2]).map_err(|e| perr(e.to_string()))?;
        if inst.cost(a, b).is_none() {
            return Err(ForestError::UnknownEdge(toks[1].into(), toks[2].into()));
        }
        out.insert(edge_key(a, b));
    }
    Ok(out)
}

pub fn forest_to_text(edges: &BTreeSet<EdgeKey>, inst: &Instance) -> String {
    let mut out = String::new();
    for &(a, b) in edges {
        let _ = writeln!(out, "edge {} {}", inst.label(a), inst.label(b));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn triangle() -> Instance {
        Instance::parse("vertices a b c\nedge a b 1\nedge b c 2\nedge a c 3\npair a b\n").unwrap()
    }

    #[test]
    fn empty_forest() {
        let inst = triangle();
        assert_eq!(check_forest(&BTreeSet::new(), &inst).unwrap(), ForestVerdict::UnconnectedPair(0, 1));
        let none = inst.with_pairs(Vec::new());
        assert!(check_forest(&BTreeSet::new(), &none).unwrap().is_feasible());
        let sparse = Instance::parse("vertices a b c\nedge a b 1\npair a b\n").unwrap();
        assert!(check_forest(&BTreeSet::from([(1, 2)]), &sparse).is_err());
    }

    #[test]
    fn single_edge_optimum() {
        let inst = Instance::parse("vertices u v\nedge u v 1\npair u v\n").unwrap();
        assert_eq!(brute_force_opt(&inst, DEFAULT_EDGE_CAP).unwrap(), (int(1), BTreeSet::from([(0, 1)])));
        let (c, f) = brute_force_opt(&triangle(), DEFAULT_EDGE_CAP).unwrap();
        assert_eq!((c, f), (int(1), BTreeSet::from([(0, 1)])));
    }

    #[test]
    fn cycle_pruning_drops_most_expensive_edge() {
        let inst = triangle();
        let all: BTreeSet<EdgeKey> = inst.edges().keys().copied().collect();
        let pruned = prune(&all, &inst);
        assert_eq!(pruned, BTreeSet::from([(0, 1)]));
        let inst2 = Instance::parse("vertices a b c\nedge a b 1\nedge b c 2\nedge a c 3\npair a c\n").unwrap();
        assert_eq!(prune(&all, &inst2), BTreeSet::from([(0, 1), (1, 2)]));
        let tree = BTreeSet::from([(0, 1), (1, 2)]);
        assert_eq!(prune(&tree, &inst2), tree);
    }

    #[test]
    fn cap_is_enforced_and_text_round_trips() {
        let inst = triangle();
        assert!(matches!(brute_force_opt(&inst, 2), Err(ForestError::TooLarge { .. })));
        let f = BTreeSet::from([(0, 1), (1, 2)]);
        assert_eq!(parse_forest(&forest_to_text(&f, &inst), &inst).unwrap(), f);
        assert_eq!(forest_cost(&f, &inst).unwrap(), int(3));
    }
}
