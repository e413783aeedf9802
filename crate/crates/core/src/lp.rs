//! Exact cutting-plane solver for Forest-BCR and Tree-BCR on small instances.
//!
//! The restricted LP `min c·x, A x ≥ b, x ≥ 0` with `c ≥ 0` is solved by a
//! sparse dual simplex over rationals, starting from the all-slack basis (dual
//! feasible because `c ≥ 0`). New cuts enter as rows with a basic slack, so
//! every round warm-starts from the previous basis. Pivoting follows Bland's
//! rule: the leaving row is the infeasible basic variable of smallest index,
//! the entering column minimises the dual ratio with ties to the smallest index.

use crate::flow::{min_cut_value, FlowNetwork};
use crate::model::{Arc, Instance, VertexId};
use crate::rational::{int, Rational};
use crate::solution::{BcrSolution, TreeBcrSolution};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("{vars} variables exceed the size bound {bound}")]
    TooLarge { vars: usize, bound: usize },
    #[error("the relaxation is infeasible")]
    Infeasible,
    #[error("separation did not converge within {rounds} rounds (lower bound {bound})")]
    IterationCapExceeded { rounds: usize, bound: Rational, solution: Box<BcrSolution> },
    #[error("root `{0}` is not a terminal")]
    RootNotTerminal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpOptions {
    pub max_rounds: usize,
    pub max_vars: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions { max_rounds: 1000, max_vars: 2500 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpStats {
    pub rounds: usize,
    pub cuts: usize,
    pub pivots: usize,
}

/// Sparse tableau: row `i` reads `x_{basis[i]} + Σ_k row[i][k]·x_k = beta[i]`
/// over nonbasic `k`; the objective is `value + Σ_k d[k]·x_k` with `d ≥ 0`.
#[derive(Debug, Clone, Default)]
pub struct DualSimplex {
    cost: Vec<Rational>,
    structurals: usize,
    basis: Vec<usize>,
    beta: Vec<Rational>,
    rows: Vec<HashMap<usize, Rational>>,
    /// Rows with a nonzero entry in each column.
    cols: Vec<BTreeSet<usize>>,
    /// Row of each basic variable.
    row_of: Vec<Option<usize>>,
    d: HashMap<usize, Rational>,
    value: Rational,
    pub pivots: usize,
}

impl DualSimplex {
    /// `cost` must be nonnegative.
    pub fn new(cost: Vec<Rational>) -> Self {
        assert!(cost.iter().all(|c| !c.is_negative()));
        let n = cost.len();
        let d = cost.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect();
        DualSimplex {
            structurals: n,
            cost,
            basis: Vec::new(),
            beta: Vec::new(),
            rows: Vec::new(),
            cols: vec![BTreeSet::new(); n],
            row_of: vec![None; n],
            d,
            value: Rational::zero(),
            pivots: 0,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    fn set_entry(&mut self, row: usize, col: usize, v: Rational) {
        if v.is_zero() {
            if self.rows[row].remove(&col).is_some() {
                self.cols[col].remove(&row);
            }
        } else {
            self.rows[row].insert(col, v);
            self.cols[col].insert(row);
        }
    }

    /// Adds `a·x ≥ b` with a fresh basic slack, expressed in the current nonbasics.
    pub fn add_row(&mut self, coeffs: &[(usize, Rational)], rhs: Rational) {
        let slack = self.cost.len();
        self.cost.push(Rational::zero());
        self.cols.push(BTreeSet::new());
        let r = self.rows.len();
        self.row_of.push(Some(r));
        // slack = a·x − b; substitute basic structurals by their rows.
        let mut expr: HashMap<usize, Rational> = HashMap::new();
        let mut constant = -rhs;
        for (k, a) in coeffs {
            match self.row_of[*k] {
                None => *expr.entry(*k).or_insert_with(Rational::zero) += a,
                Some(i) => {
                    constant += a * &self.beta[i];
                    for (l, v) in &self.rows[i] {
                        *expr.entry(*l).or_insert_with(Rational::zero) -= a * v;
                    }
                }
            }
        }
        self.rows.push(HashMap::new());
        self.basis.push(slack);
        self.beta.push(constant);
        for (k, v) in expr {
            self.set_entry(r, k, -v);
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        self.pivots += 1;
        let leaving = self.basis[r];
        let arj = self.rows[r][&j].clone();
        let inv = Rational::one() / &arj;
        // New pivot row: x_j + inv·x_leaving + Σ (a_rk·inv) x_k = beta_r·inv.
        let old: Vec<(usize, Rational)> = self.rows[r].iter().map(|(k, v)| (*k, v.clone())).collect();
        for (k, _) in &old {
            self.cols[*k].remove(&r);
        }
        self.rows[r].clear();
        let mut prow: Vec<(usize, Rational)> = Vec::with_capacity(old.len());
        for (k, v) in old {
            if k != j {
                prow.push((k, v * &inv));
            }
        }
        prow.push((leaving, inv.clone()));
        for (k, v) in &prow {
            self.set_entry(r, *k, v.clone());
        }
        self.beta[r] = &self.beta[r] * &inv;
        self.basis[r] = j;
        self.row_of[j] = Some(r);
        self.row_of[leaving] = None;

        let others: Vec<usize> = self.cols[j].iter().copied().filter(|&i| i != r).collect();
        let br = self.beta[r].clone();
        for i in others {
            let aij = self.rows[i].remove(&j).expect("column index");
            self.cols[j].remove(&i);
            for (k, v) in &prow {
                let cur = self.rows[i].get(k).cloned().unwrap_or_else(Rational::zero);
                self.set_entry(i, *k, cur - &aij * v);
            }
            self.beta[i] = &self.beta[i] - &aij * &br;
        }
        if let Some(dj) = self.d.remove(&j) {
            for (k, v) in &prow {
                let cur = self.d.get(k).cloned().unwrap_or_else(Rational::zero);
                let nv = cur - &dj * v;
                if nv.is_zero() {
                    self.d.remove(k);
                } else {
                    self.d.insert(*k, nv);
                }
            }
            self.value += &dj * &br;
        }
    }

    /// Runs dual simplex pivots until primal feasible. Returns false if infeasible.
    pub fn solve(&mut self) -> bool {
        loop {
            let mut leave: Option<(usize, usize)> = None;
            for (i, b) in self.beta.iter().enumerate() {
                if b.is_negative() {
                    let var = self.basis[i];
                    if leave.map_or(true, |(v, _)| var < v) {
                        leave = Some((var, i));
                    }
                }
            }
            let Some((_, r)) = leave else { return true };
            let mut best: Option<(Rational, usize)> = None;
            for (k, a) in &self.rows[r] {
                if !a.is_negative() {
                    continue;
                }
                let dk = self.d.get(k).cloned().unwrap_or_else(Rational::zero);
                let ratio = dk / (-a);
                let take = match &best {
                    None => true,
                    Some((br, bk)) => ratio < *br || (ratio == *br && k < bk),
                };
                if take {
                    best = Some((ratio, *k));
                }
            }
            let Some((_, j)) = best else { return false };
            self.pivot(r, j);
        }
    }

    pub fn objective(&self) -> &Rational {
        &self.value
    }

    /// Values of the structural variables in the current basic solution.
    pub fn values(&self) -> Vec<Rational> {
        (0..self.structurals)
            .map(|k| self.row_of[k].map(|i| self.beta[i].clone()).unwrap_or_else(Rational::zero))
            .collect()
    }
}

/// Variable layout of Forest-BCR restricted to terminal roots.
struct ForestModel {
    roots: Vec<VertexId>,
    arcs: Vec<Arc>,
    pairs: usize,
}

impl ForestModel {
    fn x(&self, ri: usize, ai: usize) -> usize {
        ri * (self.arcs.len() + self.pairs) + ai
    }
    fn z(&self, ri: usize, p: usize) -> usize {
        ri * (self.arcs.len() + self.pairs) + self.arcs.len() + p
    }
    fn len(&self) -> usize {
        self.roots.len() * (self.arcs.len() + self.pairs)
    }
}

fn out_arcs(arcs: &[Arc], set: &BTreeSet<VertexId>) -> Vec<usize> {
    arcs.iter()
        .enumerate()
        .filter(|(_, a)| set.contains(&a.tail) && !set.contains(&a.head))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestLpResult {
    pub value: Rational,
    pub solution: BcrSolution,
    pub stats: LpStats,
}

/// Optimal value and solution of Forest-BCR, with `Σ_r z^r_P = 1` exactly.
pub fn solve_forest_bcr(inst: &Instance, opts: LpOptions) -> Result<ForestLpResult, LpError> {
    let model = ForestModel {
        roots: inst.terminals().into_iter().collect(),
        arcs: inst.arcs(),
        pairs: inst.pairs().len(),
    };
    if model.len() > opts.max_vars {
        return Err(LpError::TooLarge { vars: model.len(), bound: opts.max_vars });
    }
    let mut cost = vec![Rational::zero(); model.len()];
    for ri in 0..model.roots.len() {
        for (ai, a) in model.arcs.iter().enumerate() {
            cost[model.x(ri, ai)] = inst.arc_cost(*a).expect("instance arc").clone();
        }
    }
    let mut lp = DualSimplex::new(cost);
    // Σ_r z^r_P ≥ 1; a surplus on z costs nothing and is trimmed afterwards.
    for p in 0..model.pairs {
        let row: Vec<(usize, Rational)> = (0..model.roots.len()).map(|ri| (model.z(ri, p), int(1))).collect();
        lp.add_row(&row, int(1));
    }
    let mut seen: BTreeSet<(usize, usize, BTreeSet<VertexId>)> = BTreeSet::new();
    let mut add_cut = |lp: &mut DualSimplex, ri: usize, p: usize, set: BTreeSet<VertexId>| {
        let mut row: Vec<(usize, Rational)> = out_arcs(&model.arcs, &set).into_iter().map(|ai| (model.x(ri, ai), int(1))).collect();
        row.push((model.z(ri, p), int(-1)));
        if seen.insert((ri, p, set)) {
            lp.add_row(&row, Rational::zero());
            true
        } else {
            false
        }
    };
    for (ri, &r) in model.roots.iter().enumerate() {
        for (p, pair) in inst.pairs().iter().enumerate() {
            for e in pair.endpoints() {
                if e != r {
                    add_cut(&mut lp, ri, p, BTreeSet::from([e]));
                }
            }
        }
    }
    let n = inst.num_vertices();
    let mut rounds = 0;
    loop {
        rounds += 1;
        if !lp.solve() {
            return Err(LpError::Infeasible);
        }
        let vals = lp.values();
        let sol = extract_forest(inst, &model, &vals);
        let mut added = 0;
        for (ri, &r) in model.roots.iter().enumerate() {
            let mut net = FlowNetwork::new(n);
            for (ai, a) in model.arcs.iter().enumerate() {
                let v = &vals[model.x(ri, ai)];
                if v.is_positive() {
                    net.add_arc(a.tail, a.head, v.clone());
                }
            }
            for (p, pair) in inst.pairs().iter().enumerate() {
                let z = &vals[model.z(ri, p)];
                if !z.is_positive() {
                    continue;
                }
                let mut worst: Option<(Rational, BTreeSet<VertexId>)> = None;
                for e in pair.endpoints() {
                    if e == r {
                        continue;
                    }
                    let (cut, side) = min_cut_value(&net, &[e], &[r]).expect("distinct terminals");
                    let gap = z - cut;
                    if gap.is_positive() && worst.as_ref().map_or(true, |(g, _)| gap > *g) {
                        worst = Some((gap, side));
                    }
                }
                if let Some((_, side)) = worst {
                    if add_cut(&mut lp, ri, p, side) {
                        added += 1;
                    }
                }
            }
        }
        if added == 0 {
            let value = lp.objective().clone();
            return Ok(ForestLpResult {
                value,
                solution: sol,
                stats: LpStats { rounds, cuts: seen_len(&lp, model.pairs), pivots: lp.pivots },
            });
        }
        if rounds >= opts.max_rounds {
            return Err(LpError::IterationCapExceeded {
                rounds,
                bound: lp.objective().clone(),
                solution: Box::new(sol),
            });
        }
    }
}

fn seen_len(lp: &DualSimplex, fixed: usize) -> usize {
    lp.num_rows() - fixed
}

fn extract_forest(inst: &Instance, model: &ForestModel, vals: &[Rational]) -> BcrSolution {
    let mut sol = BcrSolution::new();
    for (ri, &r) in model.roots.iter().enumerate() {
        for (ai, a) in model.arcs.iter().enumerate() {
            sol.set_x(r, *a, vals[model.x(ri, ai)].clone());
        }
    }
    for p in 0..model.pairs {
        let mut left = Rational::one();
        for (ri, &r) in model.roots.iter().enumerate() {
            let v = vals[model.z(ri, p)].clone();
            let take = if v < left { v } else { left.clone() };
            left -= &take;
            sol.set_z(r, p, take);
        }
    }
    let _ = inst;
    sol
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeLpResult {
    pub value: Rational,
    pub solution: TreeBcrSolution,
    pub stats: LpStats,
}

/// Optimal value and solution of Tree-BCR with root `r0` for the given terminals.
pub fn solve_tree_bcr(inst: &Instance, terminals: &BTreeSet<VertexId>, r0: VertexId, opts: LpOptions) -> Result<TreeLpResult, LpError> {
    if !terminals.contains(&r0) {
        return Err(LpError::RootNotTerminal(inst.label(r0).to_string()));
    }
    let arcs = inst.arcs();
    if arcs.len() > opts.max_vars {
        return Err(LpError::TooLarge { vars: arcs.len(), bound: opts.max_vars });
    }
    let cost: Vec<Rational> = arcs.iter().map(|a| inst.arc_cost(*a).expect("arc").clone()).collect();
    let mut lp = DualSimplex::new(cost);
    let mut seen: BTreeSet<BTreeSet<VertexId>> = BTreeSet::new();
    let mut add_cut = |lp: &mut DualSimplex, set: BTreeSet<VertexId>| {
        let row: Vec<(usize, Rational)> = out_arcs(&arcs, &set).into_iter().map(|i| (i, int(1))).collect();
        if seen.insert(set) {
            lp.add_row(&row, int(1));
            true
        } else {
            false
        }
    };
    for &t in terminals {
        if t != r0 {
            add_cut(&mut lp, BTreeSet::from([t]));
        }
    }
    let mut rounds = 0;
    loop {
        rounds += 1;
        if !lp.solve() {
            return Err(LpError::Infeasible);
        }
        let vals = lp.values();
        let mut net = FlowNetwork::new(inst.num_vertices());
        let mut sol = TreeBcrSolution::new(r0);
        for (i, a) in arcs.iter().enumerate() {
            if vals[i].is_positive() {
                net.add_arc(a.tail, a.head, vals[i].clone());
                sol.add(*a, &vals[i]);
            }
        }
        let mut added = 0;
        for &t in terminals {
            if t == r0 {
                continue;
            }
            let (cut, side) = min_cut_value(&net, &[t], &[r0]).expect("distinct terminals");
            if cut < Rational::one() && add_cut(&mut lp, side) {
                added += 1;
            }
        }
        if added == 0 {
            return Ok(TreeLpResult {
                value: lp.objective().clone(),
                solution: sol,
                stats: LpStats { rounds, cuts: lp.num_rows(), pivots: lp.pivots },
            });
        }
        if rounds >= opts.max_rounds {
            let mut forest = BcrSolution::new();
            for (a, v) in &sol.x {
                forest.set_x(r0, *a, v.clone());
            }
            return Err(LpError::IterationCapExceeded { rounds, bound: lp.objective().clone(), solution: Box::new(forest) });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::solution::{verify_primal, verify_tree_bcr};

    #[test]
    fn tiny_lp_by_hand() {
        // min x0 + 2 x1  s.t. x0 + x1 ≥ 1, x1 ≥ 1/2.
        let mut lp = DualSimplex::new(vec![int(1), int(2)]);
        lp.add_row(&[(0, int(1)), (1, int(1))], int(1));
        lp.add_row(&[(1, int(1))], ratio(1, 2));
        assert!(lp.solve());
        assert_eq!(lp.objective(), &ratio(3, 2));
        assert_eq!(lp.values(), vec![ratio(1, 2), ratio(1, 2)]);
        // Warm start with a new cut x0 ≥ 1.
        lp.add_row(&[(0, int(1))], int(1));
        assert!(lp.solve());
        assert_eq!(lp.objective(), &int(2));
    }

    #[test]
    fn infeasible_rows_are_detected() {
        let mut lp = DualSimplex::new(vec![int(1)]);
        lp.add_row(&[(0, int(-1))], int(1));
        assert!(!lp.solve());
    }

    #[test]
    fn single_edge_forest() {
        let inst = Instance::parse("vertices u v\nedge u v 1\npair u v\n").unwrap();
        let res = solve_forest_bcr(&inst, LpOptions::default()).unwrap();
        assert_eq!(res.value, int(1));
        assert!(verify_primal(&res.solution, &inst).is_feasible());
        assert_eq!(res.solution.cost(&inst).unwrap(), int(1));
    }

    #[test]
    fn tree_relaxation_small_cases() {
        let tri = Instance::parse("vertices a b c\nedge a b 1\nedge b c 1\nedge a c 1\n").unwrap();
        let all: BTreeSet<VertexId> = tri.vertices().collect();
        let res = solve_tree_bcr(&tri, &all, 0, LpOptions::default()).unwrap();
        assert_eq!(res.value, int(2));
        assert!(verify_tree_bcr(&res.solution, &all, &tri).is_feasible());

        let path = Instance::parse("vertices s a b t\nedge s a 1\nedge a b 1\nedge b t 1\n").unwrap();
        let res = solve_tree_bcr(&path, &BTreeSet::from([0, 3]), 0, LpOptions::default()).unwrap();
        assert_eq!(res.value, int(3));
    }

    #[test]
    fn size_bound_is_enforced() {
        let inst = Instance::parse("vertices u v\nedge u v 1\npair u v\n").unwrap();
        let opts = LpOptions { max_vars: 2, ..LpOptions::default() };
        assert!(matches!(solve_forest_bcr(&inst, opts), Err(LpError::TooLarge { .. })));
    }

    #[test]
    fn disconnected_pair_is_infeasible() {
        let inst = Instance::parse("vertices a b c\nedge a b 1\npair a c\n").unwrap();
        assert_eq!(solve_forest_bcr(&inst, LpOptions::default()), Err(LpError::Infeasible));
    }
}
