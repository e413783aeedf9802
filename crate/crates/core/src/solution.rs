//! Forest-BCR and Tree-BCR solutions, dual certificates, and their exact verifiers.

use crate::flow::{min_cut_value, FlowNetwork};
use crate::model::{strip_comment, Arc, EdgeKey, Instance, ModelError, VertexId};
use crate::rational::{compact, is_half_integral, parse_rational, Rational};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolutionError {
    #[error("arc {tail}->{head} is not an edge of the instance")]
    UnknownArc { tail: String, head: String },
    #[error("no pair {{{0},{1}}} in the instance")]
    UnknownPair(String, String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sparse assignment `(x, z)` for Forest-BCR. Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BcrSolution {
    x: BTreeMap<VertexId, BTreeMap<Arc, Rational>>,
    z: BTreeMap<VertexId, BTreeMap<usize, Rational>>,
}

fn put<K: Ord>(map: &mut BTreeMap<K, Rational>, key: K, value: Rational) {
    if value.is_zero() {
        map.remove(&key);
    } else {
        map.insert(key, value);
    }
}

impl BcrSolution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn x(&self, root: VertexId, arc: Arc) -> Rational {
        self.x
            .get(&root)
            .and_then(|m| m.get(&arc))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn z(&self, root: VertexId, pair: usize) -> Rational {
        self.z
            .get(&root)
            .and_then(|m| m.get(&pair))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn set_x(&mut self, root: VertexId, arc: Arc, value: Rational) {
        let m = self.x.entry(root).or_default();
        put(m, arc, value);
        if m.is_empty() {
            self.x.remove(&root);
        }
    }

    pub fn add_x(&mut self, root: VertexId, arc: Arc, delta: &Rational) {
        let v = self.x(root, arc) + delta;
        self.set_x(root, arc, v);
    }

    pub fn set_z(&mut self, root: VertexId, pair: usize, value: Rational) {
        let m = self.z.entry(root).or_default();
        put(m, pair, value);
        if m.is_empty() {
            self.z.remove(&root);
        }
    }

    pub fn add_z(&mut self, root: VertexId, pair: usize, delta: &Rational) {
        let v = self.z(root, pair) + delta;
        self.set_z(root, pair, v);
    }

    /// Nonzero arc values of one root.
    pub fn x_of(&self, root: VertexId) -> Option<&BTreeMap<Arc, Rational>> {
        self.x.get(&root)
    }

    pub fn z_of(&self, root: VertexId) -> Option<&BTreeMap<usize, Rational>> {
        self.z.get(&root)
    }

    pub fn take_root(&mut self, root: VertexId) -> (BTreeMap<Arc, Rational>, BTreeMap<usize, Rational>) {
        (self.x.remove(&root).unwrap_or_default(), self.z.remove(&root).unwrap_or_default())
    }

    /// Roots carrying any nonzero x or z value, ascending.
    pub fn roots(&self) -> BTreeSet<VertexId> {
        self.x.keys().chain(self.z.keys()).copied().collect()
    }

    pub fn x_entries(&self) -> impl Iterator<Item = (VertexId, Arc, &Rational)> {
        self.x.iter().flat_map(|(&r, m)| m.iter().map(move |(&a, v)| (r, a, v)))
    }

    pub fn z_entries(&self) -> impl Iterator<Item = (VertexId, usize, &Rational)> {
        self.z.iter().flat_map(|(&r, m)| m.iter().map(move |(&p, v)| (r, p, v)))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_empty()
    }

    /// `c(x) = Σ_r Σ_e c(e)·x^r_e`.
    pub fn cost(&self, inst: &Instance) -> Result<Rational, SolutionError> {
        let mut total = Rational::zero();
        for (_, arc, v) in self.x_entries() {
            let c = inst.arc_cost(arc).ok_or_else(|| unknown_arc(inst, arc))?;
            total += c * v;
        }
        Ok(total)
    }

    /// Total x mass per undirected edge, summed over roots and both orientations.
    pub fn undirected_projection(&self) -> BTreeMap<EdgeKey, Rational> {
        let mut out: BTreeMap<EdgeKey, Rational> = BTreeMap::new();
        for (_, arc, v) in self.x_entries() {
            *out.entry(arc.edge()).or_insert_with(Rational::zero) += v;
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    pub fn is_half_integral(&self) -> bool {
        self.x_entries().all(|(_, _, v)| is_half_integral(v))
            && self.z_entries().all(|(_, _, v)| is_half_integral(v))
    }

    /// Capacity network of root `r` on the instance vertices.
    pub fn root_network(&self, inst: &Instance, root: VertexId) -> FlowNetwork {
        let mut net = FlowNetwork::new(inst.num_vertices());
        if let Some(m) = self.x_of(root) {
            for (arc, v) in m {
                if v.is_positive() {
                    net.add_arc(arc.tail, arc.head, v.clone());
                }
            }
        }
        net
    }

    pub fn parse(text: &str, inst: &Instance) -> Result<Self, SolutionError> {
        let mut sol = BcrSolution::new();
        for (no, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| SolutionError::Parse { line: no + 1, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 5 || !(toks[0] == "x" || toks[0] == "z") {
                return Err(perr("expected `x <root> <tail> <head> <value>` or `z <root> <s> <t> <value>`".into()));
            }
            let root = inst.require(toks[1]).map_err(|e| perr(e.to_string()))?;
            let a = inst.require(toks[2]).map_err(|e| perr(e.to_string()))?;
            let b = inst.require(toks[3]).map_err(|e| perr(e.to_string()))?;
            let value = parse_rational(toks[4]).map_err(|e| perr(e.to_string()))?;
            if toks[0] == "x" {
                if a == b || inst.cost(a, b).is_none() {
                    return Err(perr(format!("arc {}->{} is not an edge", toks[2], toks[3])));
                }
                sol.add_x(root, Arc::new(a, b), &value);
            } else {
                let p = inst
                    .find_pair(a, b)
                    .ok_or_else(|| perr(format!("no pair {{{},{}}}", toks[2], toks[3])))?;
                sol.add_z(root, p, &value);
            }
        }
        Ok(sol)
    }

    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for (r, arc, v) in self.x_entries() {
            let _ = writeln!(
                out,
                "x {} {} {} {}",
                inst.label(r),
                inst.label(arc.tail),
                inst.label(arc.head),
                compact(v)
            );
        }
        for (r, p, v) in self.z_entries() {
            let pair = inst.pairs()[p];
            let _ = writeln!(
                out,
                "z {} {} {} {}",
                inst.label(r),
                inst.label(pair.s),
                inst.label(pair.t),
                compact(v)
            );
        }
        out
    }
}

fn unknown_arc(inst: &Instance, arc: Arc) -> SolutionError {
    SolutionError::UnknownArc {
        tail: inst.label(arc.tail).to_string(),
        head: inst.label(arc.head).to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variable {
    X(Arc),
    Z(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrimalVerdict {
    Feasible,
    Negative { root: VertexId, var: Variable },
    UnknownArc { root: VertexId, arc: Arc },
    BadZSum { pair: usize, sum: Rational },
    /// `x^root(δ⁺(cut)) = value < required = z^root_pair`.
    ViolatedCut { root: VertexId, pair: usize, cut: BTreeSet<VertexId>, value: Rational, required: Rational },
}

impl PrimalVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PrimalVerdict::Feasible)
    }

    pub fn describe(&self, inst: &Instance) -> String {
        match self {
            PrimalVerdict::Feasible => "feasible".into(),
            PrimalVerdict::Negative { root, var } => {
                format!("negative variable under root {}: {:?}", inst.label(*root), var)
            }
            PrimalVerdict::UnknownArc { root, arc } => format!(
                "root {} uses non-edge {}->{}",
                inst.label(*root),
                inst.label(arc.tail),
                inst.label(arc.head)
            ),
            PrimalVerdict::BadZSum { pair, sum } => {
                format!("z values of pair {} sum to {}", inst.pair_label(*pair), compact(sum))
            }
            PrimalVerdict::ViolatedCut { root, pair, cut, value, required } => format!(
                "violated cut: root {} pair {} U={} has x(out)={} < {}",
                inst.label(*root),
                inst.pair_label(*pair),
                inst.set_label(cut.iter().copied()),
                compact(value),
                compact(required)
            ),
        }
    }
}

/// Exact feasibility check. Cut constraints are separated by one minimum cut
/// from each pair endpoint to the root in the capacities `x^root`.
pub fn verify_primal(sol: &BcrSolution, inst: &Instance) -> PrimalVerdict {
    for (r, arc, v) in sol.x_entries() {
        if v.is_negative() {
            return PrimalVerdict::Negative { root: r, var: Variable::X(arc) };
        }
        if inst.arc_cost(arc).is_none() {
            return PrimalVerdict::UnknownArc { root: r, arc };
        }
    }
    for (r, p, v) in sol.z_entries() {
        if v.is_negative() {
            return PrimalVerdict::Negative { root: r, var: Variable::Z(p) };
        }
    }
    let mut sums = vec![Rational::zero(); inst.pairs().len()];
    for (_, p, v) in sol.z_entries() {
        sums[p] += v;
    }
    for (p, sum) in sums.into_iter().enumerate() {
        if sum != Rational::from_integer(1.into()) {
            return PrimalVerdict::BadZSum { pair: p, sum };
        }
    }
    for (&root, zs) in &sol.z {
        let net = sol.root_network(inst, root);
        for (&p, required) in zs {
            for end in inst.pairs()[p].endpoints() {
                if end == root {
                    continue;
                }
                let (value, cut) = min_cut_value(&net, &[end], &[root]).expect("distinct terminals");
                if value < *required {
                    return PrimalVerdict::ViolatedCut {
                        root,
                        pair: p,
                        cut,
                        value,
                        required: required.clone(),
                    };
                }
            }
        }
    }
    PrimalVerdict::Feasible
}

/// Single-root solution of Tree-BCR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeBcrSolution {
    pub root: VertexId,
    pub x: BTreeMap<Arc, Rational>,
}

impl TreeBcrSolution {
    pub fn new(root: VertexId) -> Self {
        TreeBcrSolution { root, x: BTreeMap::new() }
    }

    pub fn add(&mut self, arc: Arc, delta: &Rational) {
        let v = self.x.get(&arc).cloned().unwrap_or_else(Rational::zero) + delta;
        put(&mut self.x, arc, v);
    }

    pub fn cost(&self, inst: &Instance) -> Result<Rational, SolutionError> {
        let mut total = Rational::zero();
        for (&arc, v) in &self.x {
            total += inst.arc_cost(arc).ok_or_else(|| unknown_arc(inst, arc))? * v;
        }
        Ok(total)
    }

    pub fn parse(text: &str, inst: &Instance) -> Result<Self, SolutionError> {
        let mut root = None;
        let mut x = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| SolutionError::Parse { line: no + 1, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match (toks[0], toks.len()) {
                ("root", 2) => root = Some(inst.require(toks[1]).map_err(|e| perr(e.to_string()))?),
                ("x", 4) => {
                    let a = inst.require(toks[1]).map_err(|e| perr(e.to_string()))?;
                    let b = inst.require(toks[2]).map_err(|e| perr(e.to_string()))?;
                    if a == b || inst.cost(a, b).is_none() {
                        return Err(perr(format!("arc {}->{} is not an edge", toks[1], toks[2])));
                    }
                    x.push((Arc::new(a, b), parse_rational(toks[3]).map_err(|e| perr(e.to_string()))?));
                }
                _ => return Err(perr("expected `root <r>` or `x <tail> <head> <value>`".into())),
            }
        }
        let root = root.ok_or(SolutionError::Parse { line: 0, msg: "missing `root` line".into() })?;
        let mut sol = TreeBcrSolution::new(root);
        for (a, v) in x {
            sol.add(a, &v);
        }
        Ok(sol)
    }

    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = format!("root {}\n", inst.label(self.root));
        for (arc, v) in &self.x {
            let _ = writeln!(out, "x {} {} {}", inst.label(arc.tail), inst.label(arc.head), compact(v));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeVerdict {
    Feasible,
    RootNotTerminal,
    Negative { arc: Arc },
    UnknownArc { arc: Arc },
    ViolatedCut { terminal: VertexId, cut: BTreeSet<VertexId>, value: Rational },
}

impl TreeVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, TreeVerdict::Feasible)
    }

    pub fn describe(&self, inst: &Instance) -> String {
        match self {
            TreeVerdict::Feasible => "feasible".into(),
            TreeVerdict::RootNotTerminal => "root is not a terminal".into(),
            TreeVerdict::Negative { arc } => format!("negative value on {}->{}", inst.label(arc.tail), inst.label(arc.head)),
            TreeVerdict::UnknownArc { arc } => format!("non-edge {}->{}", inst.label(arc.tail), inst.label(arc.head)),
            TreeVerdict::ViolatedCut { terminal, cut, value } => format!(
                "violated cut: terminal {} U={} has x(out)={} < 1",
                inst.label(*terminal),
                inst.set_label(cut.iter().copied()),
                compact(value)
            ),
        }
    }
}

/// Checks `x(δ⁺(U)) ≥ 1` for all `U ∌ root` meeting the terminals.
pub fn verify_tree_bcr(sol: &TreeBcrSolution, terminals: &BTreeSet<VertexId>, inst: &Instance) -> TreeVerdict {
    if !terminals.contains(&sol.root) {
        return TreeVerdict::RootNotTerminal;
    }
    let mut net = FlowNetwork::new(inst.num_vertices());
    for (&arc, v) in &sol.x {
        if v.is_negative() {
            return TreeVerdict::Negative { arc };
        }
        if inst.arc_cost(arc).is_none() {
            return TreeVerdict::UnknownArc { arc };
        }
        net.add_arc(arc.tail, arc.head, v.clone());
    }
    let one = Rational::from_integer(1.into());
    for &t in terminals {
        if t == sol.root {
            continue;
        }
        let (value, cut) = min_cut_value(&net, &[t], &[sol.root]).expect("distinct terminals");
        if value < one {
            return TreeVerdict::ViolatedCut { terminal: t, cut, value };
        }
    }
    TreeVerdict::Feasible
}

/// One dual variable `y^root_{set,pair}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualEntry {
    pub root: VertexId,
    pub set: BTreeSet<VertexId>,
    pub pair: usize,
    pub value: Rational,
}

/// Explicit solution `(α, y)` of the dual of Forest-BCR.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DualCertificate {
    /// `α_P` by pair index; missing pairs are 0.
    pub alpha: BTreeMap<usize, Rational>,
    pub y: Vec<DualEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DualVerdict {
    Feasible { value: Rational },
    /// Entry whose set contains its root or misses its pair.
    InvalidEntry { index: usize },
    Negative { index: usize },
    EdgeOverload { root: VertexId, arc: Arc, load: Rational },
    AlphaUncovered { pair: usize, root: VertexId, covered: Rational },
}

impl DualVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, DualVerdict::Feasible { .. })
    }

    pub fn describe(&self, inst: &Instance) -> String {
        match self {
            DualVerdict::Feasible { value } => format!("feasible, value {}", compact(value)),
            DualVerdict::InvalidEntry { index } => format!("entry {index} is not a valid dual variable"),
            DualVerdict::Negative { index } => format!("entry {index} is negative"),
            DualVerdict::EdgeOverload { root, arc, load } => format!(
                "root {} arc {}->{} carries {} above its cost",
                inst.label(*root),
                inst.label(arc.tail),
                inst.label(arc.head),
                compact(load)
            ),
            DualVerdict::AlphaUncovered { pair, root, covered } => format!(
                "alpha of pair {} exceeds its cover {} under root {}",
                inst.pair_label(*pair),
                compact(covered),
                inst.label(*root)
            ),
        }
    }
}

impl DualCertificate {
    pub fn value(&self) -> Rational {
        self.alpha.values().fold(Rational::zero(), |a, v| a + v)
    }

    pub fn parse(text: &str, inst: &Instance) -> Result<Self, SolutionError> {
        let mut cert = DualCertificate::default();
        for (no, raw) in text.lines().enumerate() {
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let perr = |msg: String| SolutionError::Parse { line: no + 1, msg };
            let (head, members) = match line.split_once(':') {
                Some((h, m)) => (h, Some(m)),
                None => (line, None),
            };
            let toks: Vec<&str> = head.split_whitespace().collect();
            let lookup = |l: &str| inst.require(l).map_err(|e| perr(e.to_string()));
            let pair_of = |s: &str, t: &str| -> Result<usize, SolutionError> {
                let (a, b) = (lookup(s)?, lookup(t)?);
                inst.find_pair(a, b).ok_or_else(|| perr(format!("no pair {{{s},{t}}}")))
            };
            match (toks.first().copied(), toks.len(), members) {
                (Some("alpha"), 4, None) => {
                    let p = pair_of(toks[1], toks[2])?;
                    let v = parse_rational(toks[3]).map_err(|e| perr(e.to_string()))?;
                    *cert.alpha.entry(p).or_insert_with(Rational::zero) += v;
                }
                (Some("y"), 5, Some(m)) => {
                    let root = lookup(toks[1])?;
                    let pair = pair_of(toks[2], toks[3])?;
                    let value = parse_rational(toks[4]).map_err(|e| perr(e.to_string()))?;
                    let set = m.split_whitespace().map(lookup).collect::<Result<_, _>>()?;
                    cert.y.push(DualEntry { root, set, pair, value });
                }
                _ => {
                    return Err(perr(
                        "expected `alpha <s> <t> <value>` or `y <root> <s> <t> <value> : <members>`".into(),
                    ))
                }
            }
        }
        Ok(cert)
    }

    pub fn to_text(&self, inst: &Instance) -> String {
        let mut out = String::new();
        for (&p, v) in &self.alpha {
            let pair = inst.pairs()[p];
            let _ = writeln!(out, "alpha {} {} {}", inst.label(pair.s), inst.label(pair.t), compact(v));
        }
        for e in &self.y {
            let pair = inst.pairs()[e.pair];
            let members: Vec<&str> = e.set.iter().map(|&v| inst.label(v)).collect();
            let _ = writeln!(
                out,
                "y {} {} {} {} : {}",
                inst.label(e.root),
                inst.label(pair.s),
                inst.label(pair.t),
                compact(&e.value),
                members.join(" ")
            );
        }
        out
    }
}

/// Checks both dual constraint families by direct summation over the explicit entries.
pub fn verify_dual(cert: &DualCertificate, inst: &Instance) -> DualVerdict {
    let adj = inst.adjacency();
    let mut load: BTreeMap<(VertexId, Arc), Rational> = BTreeMap::new();
    let mut cover: BTreeMap<(usize, VertexId), Rational> = BTreeMap::new();
    for (i, e) in cert.y.iter().enumerate() {
        let pair = inst.pairs().get(e.pair);
        let valid = e.root < inst.num_vertices()
            && !e.set.contains(&e.root)
            && e.set.iter().all(|&v| v < inst.num_vertices())
            && pair.is_some_and(|p| e.set.contains(&p.s) || e.set.contains(&p.t));
        if !valid {
            return DualVerdict::InvalidEntry { index: i };
        }
        if e.value.is_negative() {
            return DualVerdict::Negative { index: i };
        }
        for &u in &e.set {
            for (v, _) in &adj[u] {
                if !e.set.contains(v) {
                    *load.entry((e.root, Arc::new(u, *v))).or_insert_with(Rational::zero) += &e.value;
                }
            }
        }
        *cover.entry((e.pair, e.root)).or_insert_with(Rational::zero) += &e.value;
    }
    for (&(root, arc), l) in &load {
        if l > inst.arc_cost(arc).expect("arc from adjacency") {
            return DualVerdict::EdgeOverload { root, arc, load: l.clone() };
        }
    }
    for (&p, a) in &cert.alpha {
        if !a.is_positive() {
            continue;
        }
        for root in inst.vertices() {
            let covered = cover.get(&(p, root)).cloned().unwrap_or_else(Rational::zero);
            if *a > covered {
                return DualVerdict::AlphaUncovered { pair: p, root, covered };
            }
        }
    }
    DualVerdict::Feasible { value: cert.value() }
}
