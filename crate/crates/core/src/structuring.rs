//! Root rerouting, splitting-off and per-variable reduction of Forest-BCR solutions.

use crate::flow::{max_flow, min_cut_value, FlowNetwork};
use crate::model::{Arc, Instance, VertexId};
use crate::rational::{clamp_nonneg, min, Rational};
use crate::solution::{BcrSolution, SolutionError};
use num_traits::{Signed, Zero};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructuringError {
    #[error("no flow of the required value towards Steiner root `{0}`; input is infeasible")]
    InfeasibleInput(String),
    #[error("triangle inequality fails on {0}-{1}-{2}")]
    NotMetric(String, String, String),
    #[error("splitting-off did not reach a fixpoint within {0} steps")]
    IterationCap(usize),
    #[error(transparent)]
    Solution(#[from] SolutionError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitOff {
    pub root: VertexId,
    pub u: VertexId,
    pub v: VertexId,
    pub w: VertexId,
    pub eps: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub root: VertexId,
    pub arc: Arc,
    pub delta: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringReport {
    pub reroutes: usize,
    pub splitoffs: Vec<SplitOff>,
    pub reductions: Vec<Reduction>,
    pub cost_before: Rational,
    pub cost_after: Rational,
}

/// Moves all z mass off Steiner roots. For a Steiner root `r`, a flow of value
/// `max_P z^r_P` from an endpoint `v` of the maximising pair to `r` is reversed
/// inside `x^r`, and the reoriented `x^r`, `z^r` are added to root `v`.
pub fn reroute_steiner_roots(sol: &BcrSolution, inst: &Instance) -> Result<(BcrSolution, usize), StructuringError> {
    let terminals = inst.terminals();
    let mut out = sol.clone();
    let mut count = 0;
    for r in sol.roots() {
        if terminals.contains(&r) {
            continue;
        }
        let Some(zs) = out.z_of(r) else { continue };
        let Some((p_star, value)) = zs
            .iter()
            .filter(|(_, v)| v.is_positive())
            .fold(None::<(usize, &Rational)>, |best, (&p, v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((p, v)),
            })
            .map(|(p, v)| (p, v.clone()))
        else {
            continue;
        };
        let v = inst.pairs()[p_star].s;
        let net = out.root_network(inst, r);
        let flow = max_flow(&net, &[v], &[r], Some(&value))
            .map_err(|_| StructuringError::InfeasibleInput(inst.label(r).to_string()))?;
        let (mut xr, zr) = out.take_root(r);
        for (&(a, b), f) in &flow.arc_flows {
            let fwd = Arc::new(a, b);
            let left = xr.get(&fwd).cloned().unwrap_or_else(Rational::zero) - f;
            if left.is_zero() {
                xr.remove(&fwd);
            } else {
                xr.insert(fwd, left);
            }
            *xr.entry(fwd.reversed()).or_insert_with(Rational::zero) += f;
        }
        for (arc, val) in xr {
            out.add_x(v, arc, &val);
        }
        for (p, val) in zr {
            out.add_z(v, p, &val);
        }
        count += 1;
    }
    Ok((out, count))
}

/// Largest `ε` by which `x^r_(u,v)`, `x^r_(v,w)` can drop while `x^r_(u,w)` rises
/// without violating a cut constraint. The cuts that lose `ε` are the sets avoiding `r`
/// that either contain `v` but neither `u` nor `w`, or contain `u` and `w` but not `v`.
pub fn split_epsilon(
    sol: &BcrSolution,
    inst: &Instance,
    net: &FlowNetwork,
    r: VertexId,
    u: VertexId,
    v: VertexId,
    w: VertexId,
) -> Rational {
    let mut eps = min(&sol.x(r, Arc::new(u, v)), &sol.x(r, Arc::new(v, w)));
    if !eps.is_positive() {
        return Rational::zero();
    }
    let with = |base: &[VertexId], t: VertexId| {
        let mut s = base.to_vec();
        if !s.contains(&t) {
            s.push(t);
        }
        s
    };
    if let Some(zs) = sol.z_of(r) {
        for (&p, z) in zs {
            if !z.is_positive() {
                continue;
            }
            for t in inst.pairs()[p].endpoints() {
                if t == r {
                    continue;
                }
                if v != r && t != u && t != w {
                    let (cut, _) = min_cut_value(net, &with(&[v], t), &[r, u, w]).expect("disjoint terminals");
                    eps = min(&eps, &(cut - z));
                }
                if u != r && w != r && t != v {
                    let sinks = if v == r { vec![r] } else { vec![v, r] };
                    let (cut, _) = min_cut_value(net, &with(&[u, w], t), &sinks).expect("disjoint terminals");
                    eps = min(&eps, &(cut - z));
                }
            }
        }
    }
    clamp_nonneg(eps)
}

fn candidates(sol: &BcrSolution, r: VertexId) -> Vec<(VertexId, VertexId, VertexId)> {
    let Some(xs) = sol.x_of(r) else { return Vec::new() };
    let mut out = Vec::new();
    for (a, va) in xs {
        if !va.is_positive() {
            continue;
        }
        for (b, vb) in xs.range(Arc { tail: a.head, head: 0 }..) {
            if b.tail != a.head {
                break;
            }
            if vb.is_positive() && b.head != a.tail {
                out.push((a.tail, a.head, b.head));
            }
        }
    }
    out.sort_by_key(|&(u, v, w)| (v, u, w));
    out
}

fn check_metric(inst: &Instance, u: VertexId, v: VertexId, w: VertexId) -> Result<(), StructuringError> {
    let err = || {
        StructuringError::NotMetric(
            inst.label(u).to_string(),
            inst.label(v).to_string(),
            inst.label(w).to_string(),
        )
    };
    let (Some(uv), Some(vw)) = (inst.cost(u, v), inst.cost(v, w)) else {
        return Err(err());
    };
    match inst.cost(u, w) {
        Some(uw) if *uw <= uv + vw => Ok(()),
        _ => Err(err()),
    }
}

/// First splitting-off candidate with positive `ε`, in candidate order.
pub fn find_split(sol: &BcrSolution, inst: &Instance) -> Option<SplitOff> {
    for r in sol.roots() {
        let net = sol.root_network(inst, r);
        for (u, v, w) in candidates(sol, r) {
            let eps = split_epsilon(sol, inst, &net, r, u, v, w);
            if eps.is_positive() {
                return Some(SplitOff { root: r, u, v, w, eps });
            }
        }
    }
    None
}

/// Exhaustive splitting-off on a metric instance, looped to a fixpoint.
pub fn split_off(sol: &BcrSolution, inst: &Instance) -> Result<(BcrSolution, Vec<SplitOff>), StructuringError> {
    let n = inst.num_vertices();
    let arcs = 2 * inst.num_edges();
    let cap = (n * arcs * arcs).max(16);
    let mut cur = sol.clone();
    let mut log = Vec::new();
    loop {
        let mut changed = false;
        for r in cur.roots() {
            let mut net = cur.root_network(inst, r);
            for (u, v, w) in candidates(&cur, r) {
                let eps = split_epsilon(&cur, inst, &net, r, u, v, w);
                if !eps.is_positive() {
                    continue;
                }
                check_metric(inst, u, v, w)?;
                let neg = -&eps;
                cur.add_x(r, Arc::new(u, v), &neg);
                cur.add_x(r, Arc::new(v, w), &neg);
                cur.add_x(r, Arc::new(u, w), &eps);
                net = cur.root_network(inst, r);
                log.push(SplitOff { root: r, u, v, w, eps });
                changed = true;
                if log.len() > cap {
                    return Err(StructuringError::IterationCap(cap));
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok((cur, log))
}

/// Reroute, then split off until no candidate remains.
pub fn well_structure(sol: &BcrSolution, inst: &Instance) -> Result<(BcrSolution, StructuringReport), StructuringError> {
    let cost_before = sol.cost(inst)?;
    let (rerouted, reroutes) = reroute_steiner_roots(sol, inst)?;
    let (out, splitoffs) = split_off(&rerouted, inst)?;
    let cost_after = out.cost(inst)?;
    Ok((out, StructuringReport { reroutes, splitoffs, reductions: Vec::new(), cost_before, cost_after }))
}

/// Largest amount by which `x^r_arc` alone can drop. Cuts using the arc contain
/// its tail and avoid its head and `r`.
pub fn reduction_delta(sol: &BcrSolution, inst: &Instance, net: &FlowNetwork, r: VertexId, arc: Arc) -> Rational {
    let x = sol.x(r, arc);
    if !x.is_positive() {
        return Rational::zero();
    }
    let mut delta = x.clone();
    if arc.tail == r {
        return delta;
    }
    let sinks: Vec<usize> = if arc.head == r { vec![r] } else { vec![r, arc.head] };
    if let Some(zs) = sol.z_of(r) {
        for (&p, z) in zs {
            if !z.is_positive() {
                continue;
            }
            for t in inst.pairs()[p].endpoints() {
                if t == r || t == arc.head {
                    continue;
                }
                let sources: Vec<usize> = if t == arc.tail { vec![t] } else { vec![t, arc.tail] };
                let (cut, _) = min_cut_value(net, &sources, &sinks).expect("disjoint terminals");
                delta = min(&delta, &(cut - z));
            }
        }
    }
    clamp_nonneg(min(&delta, &x))
}

/// Decreases every variable by its maximal feasible amount, in (root, arc) order, until stable.
pub fn fully_reduce(sol: &BcrSolution, inst: &Instance) -> (BcrSolution, Vec<Reduction>) {
    let mut cur = sol.clone();
    let mut log = Vec::new();
    loop {
        let mut changed = false;
        for r in cur.roots() {
            let arcs: Vec<Arc> = cur.x_of(r).map(|m| m.keys().copied().collect()).unwrap_or_default();
            let mut net = cur.root_network(inst, r);
            for arc in arcs {
                let delta = reduction_delta(&cur, inst, &net, r, arc);
                if delta.is_positive() {
                    cur.add_x(r, arc, &-&delta);
                    net = cur.root_network(inst, r);
                    log.push(Reduction { root: r, arc, delta });
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (cur, log)
}

/// Property (a): roots carrying z mass that are not terminals.
pub fn steiner_roots_with_z(sol: &BcrSolution, inst: &Instance) -> BTreeSet<VertexId> {
    let terminals = inst.terminals();
    sol.z_entries()
        .filter(|(r, _, v)| v.is_positive() && !terminals.contains(r))
        .map(|(r, _, _)| r)
        .collect()
}

/// First variable that could still be reduced.
pub fn find_reduction(sol: &BcrSolution, inst: &Instance) -> Option<Reduction> {
    for r in sol.roots() {
        let net = sol.root_network(inst, r);
        for (&arc, _) in sol.x_of(r).into_iter().flatten() {
            let delta = reduction_delta(sol, inst, &net, r, arc);
            if delta.is_positive() {
                return Some(Reduction { root: r, arc, delta });
            }
        }
    }
    None
}

/// Well-structuring followed by full reduction. Reducing only lowers cut slack,
/// so no splitting-off becomes possible again.
pub fn normalize(sol: &BcrSolution, inst: &Instance) -> Result<(BcrSolution, StructuringReport), StructuringError> {
    let (ws, mut report) = well_structure(sol, inst)?;
    let (out, reductions) = fully_reduce(&ws, inst);
    report.reductions = reductions;
    report.cost_after = out.cost(inst)?;
    Ok((out, report))
}
