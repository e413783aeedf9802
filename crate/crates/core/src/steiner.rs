//! Reorientation of a Forest-BCR solution with one nontrivial demand component
//! into a Tree-BCR solution of the same cost.

use crate::flow::{max_flow, FlowNetwork};
use crate::model::{Arc, Instance, VertexId};
use crate::rational::{max, Rational};
use crate::solution::{BcrSolution, TreeBcrSolution};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SteinerError {
    #[error("demand graph has {0} nontrivial components, expected exactly one")]
    NotSteinerTree(usize),
    #[error("root `{0}` is not a terminal")]
    RootNotTerminal(String),
    #[error("source `{w}` can only route {got} of {need} towards it; input is infeasible")]
    FlowShortfall { w: String, need: Rational, got: Rational },
}

/// Spanning arborescence of the demand component, in BFS (hence topological) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformState {
    pub root: VertexId,
    /// `r_0, r_1, …`
    pub order: Vec<VertexId>,
    /// `(r_i, r_j, pair index)` with `i < j`.
    pub arcs: Vec<(VertexId, VertexId, usize)>,
}

impl TransformState {
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.order.iter().position(|&u| u == v)
    }

    /// Pair on the incoming arborescence arc of `v`.
    pub fn parent_pair(&self, v: VertexId) -> Option<usize> {
        self.arcs.iter().find(|a| a.1 == v).map(|a| a.2)
    }
}

/// Reorientation data of one source vertex `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reorientation {
    pub w: VertexId,
    pub lambda: Vec<Rational>,
    pub mu: Vec<Rational>,
    pub flow: BTreeMap<Arc, Rational>,
    pub xbar: BTreeMap<Arc, Rational>,
}

/// Smallest terminal by label.
pub fn default_root(inst: &Instance) -> Option<VertexId> {
    inst.terminals().into_iter().min_by(|&a, &b| inst.label(a).cmp(inst.label(b)))
}

pub fn build_arborescence(inst: &Instance, r0: VertexId) -> Result<TransformState, SteinerError> {
    let dg = inst.demand_graph();
    let nontrivial = dg.nontrivial();
    if nontrivial.len() != 1 {
        return Err(SteinerError::NotSteinerTree(nontrivial.len()));
    }
    if !inst.terminals().contains(&r0) {
        return Err(SteinerError::RootNotTerminal(inst.label(r0).to_string()));
    }
    let mut seen = BTreeSet::from([r0]);
    let mut order = vec![r0];
    let mut arcs = Vec::new();
    let mut queue = VecDeque::from([r0]);
    while let Some(u) = queue.pop_front() {
        for (p, pair) in inst.pairs().iter().enumerate() {
            if !pair.contains(u) {
                continue;
            }
            let other = if pair.s == u { pair.t } else { pair.s };
            if seen.insert(other) {
                order.push(other);
                arcs.push((u, other, p));
                queue.push_back(other);
            }
        }
    }
    Ok(TransformState { root: r0, order, arcs })
}

/// `λ_i = max{z^w_P : P meets {r_0..r_i}}` and its increments `μ`.
pub fn lambda_mu(sol: &BcrSolution, inst: &Instance, state: &TransformState, w: VertexId) -> (Vec<Rational>, Vec<Rational>) {
    let mut lambda = Vec::with_capacity(state.order.len());
    let mut cur = Rational::zero();
    for &r in &state.order {
        for (p, pair) in inst.pairs().iter().enumerate() {
            if pair.contains(r) {
                cur = max(&cur, &sol.z(w, p));
            }
        }
        lambda.push(cur.clone());
    }
    let mu = lambda
        .iter()
        .enumerate()
        .map(|(i, l)| if i == 0 { l.clone() } else { l - &lambda[i - 1] })
        .collect();
    (lambda, mu)
}

/// Routes `μ_i` from every `r_i ≠ w` into `w` within capacities `x^w` and reverses that flow.
pub fn reorient_source(sol: &BcrSolution, inst: &Instance, w: VertexId, state: &TransformState) -> Result<Reorientation, SteinerError> {
    let (lambda, mu) = lambda_mu(sol, inst, state, w);
    let n = inst.num_vertices();
    let mut net = FlowNetwork::new(n + 1);
    let super_source = n;
    let mut need = Rational::zero();
    for (i, &r) in state.order.iter().enumerate() {
        if r != w && mu[i].is_positive() {
            net.add_arc(super_source, r, mu[i].clone());
            need += &mu[i];
        }
    }
    let xw: BTreeMap<Arc, Rational> = sol.x_of(w).cloned().unwrap_or_default();
    for (a, v) in &xw {
        net.add_arc(a.tail, a.head, v.clone());
    }
    let mut flow = BTreeMap::new();
    if need.is_positive() {
        let res = max_flow(&net, &[super_source], &[w], None).expect("distinct terminals");
        if res.value < need {
            return Err(SteinerError::FlowShortfall { w: inst.label(w).to_string(), need, got: res.value });
        }
        for (&(a, b), f) in &res.arc_flows {
            if a != super_source {
                flow.insert(Arc::new(a, b), f.clone());
            }
        }
    }
    let mut xbar = xw;
    for (a, f) in &flow {
        let left = xbar.get(a).cloned().unwrap_or_else(Rational::zero) - f;
        if left.is_zero() {
            xbar.remove(a);
        } else {
            xbar.insert(*a, left);
        }
        *xbar.entry(a.reversed()).or_insert_with(Rational::zero) += f;
    }
    Ok(Reorientation { w, lambda, mu, flow, xbar })
}

/// Reorientations of every root that carries x or z mass.
pub fn reorient_all(sol: &BcrSolution, inst: &Instance, r0: VertexId) -> Result<(TransformState, Vec<Reorientation>), SteinerError> {
    let state = build_arborescence(inst, r0)?;
    let parts = sol
        .roots()
        .into_iter()
        .map(|w| reorient_source(sol, inst, w, &state))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((state, parts))
}

/// `x̃ = Σ_w x̄^w`, a Tree-BCR solution rooted at `r0`.
pub fn to_tree_bcr(sol: &BcrSolution, inst: &Instance, r0: VertexId) -> Result<TreeBcrSolution, SteinerError> {
    let (_, parts) = reorient_all(sol, inst, r0)?;
    let mut out = TreeBcrSolution::new(r0);
    for part in parts {
        for (a, v) in &part.xbar {
            out.add(*a, v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, int};
    use crate::solution::verify_tree_bcr;

    fn path_instance() -> Instance {
        Instance::parse("vertices a b c\nedge a b 1\nedge b c 1\npair a b\npair b c\n").unwrap()
    }

    #[test]
    fn arborescence_of_path_and_star() {
        let inst = path_instance();
        let st = build_arborescence(&inst, 0).unwrap();
        assert_eq!(st.order, vec![0, 1, 2]);
        assert_eq!(st.arcs, vec![(0, 1, 0), (1, 2, 1)]);
        let star = Instance::parse("vertices r a b\nedge r a 1\nedge r b 1\npair r a\npair b r\n").unwrap();
        let st = build_arborescence(&star, 0).unwrap();
        assert_eq!(st.arcs, vec![(0, 1, 0), (0, 2, 1)]);
    }

    #[test]
    fn two_components_are_rejected() {
        let inst = Instance::parse("vertices a b c d\nedge a b 1\nedge c d 1\npair a b\npair c d\n").unwrap();
        assert_eq!(build_arborescence(&inst, 0), Err(SteinerError::NotSteinerTree(2)));
    }

    #[test]
    fn lambda_by_hand_on_three_terminals() {
        // Root c serves {b,c} fully and {a,b} by half; root a serves the other half.
        let inst = path_instance();
        let mut sol = BcrSolution::new();
        sol.set_z(2, 1, int(1));
        sol.set_z(2, 0, half());
        sol.set_z(0, 0, half());
        sol.set_x(2, Arc::new(1, 2), int(1));
        sol.set_x(2, Arc::new(0, 1), half());
        sol.set_x(0, Arc::new(1, 0), half());
        let st = build_arborescence(&inst, 0).unwrap();
        let (l, m) = lambda_mu(&sol, &inst, &st, 2);
        assert_eq!(l, vec![half(), int(1), int(1)]);
        assert_eq!(m, vec![half(), half(), int(0)]);
        let (l, _) = lambda_mu(&sol, &inst, &st, 0);
        assert_eq!(l, vec![half(), half(), half()]);
        let t = to_tree_bcr(&sol, &inst, 0).unwrap();
        assert!(verify_tree_bcr(&t, &inst.terminals(), &inst).is_feasible());
        assert_eq!(t.cost(&inst).unwrap(), sol.cost(&inst).unwrap());
    }

    #[test]
    fn in_tree_at_root_is_unchanged() {
        let inst = path_instance();
        let mut sol = BcrSolution::new();
        sol.set_z(0, 0, int(1));
        sol.set_z(0, 1, int(1));
        sol.set_x(0, Arc::new(1, 0), int(1));
        sol.set_x(0, Arc::new(2, 1), int(1));
        let t = to_tree_bcr(&sol, &inst, 0).unwrap();
        assert_eq!(&t.x, sol.x_of(0).unwrap());
    }

    #[test]
    fn zero_z_means_zero_flow() {
        let inst = path_instance();
        let mut sol = BcrSolution::new();
        sol.set_x(1, Arc::new(0, 1), half());
        let st = build_arborescence(&inst, 0).unwrap();
        let r = reorient_source(&sol, &inst, 1, &st).unwrap();
        assert!(r.flow.is_empty());
        assert_eq!(&r.xbar, sol.x_of(1).unwrap());
    }

    #[test]
    fn shortfall_on_infeasible_input() {
        let inst = path_instance();
        let mut sol = BcrSolution::new();
        sol.set_z(2, 0, int(1));
        let st = build_arborescence(&inst, 0).unwrap();
        assert!(matches!(reorient_source(&sol, &inst, 2, &st), Err(SteinerError::FlowShortfall { .. })));
    }
}
