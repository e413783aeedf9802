//! Steiner Forest instances over exact rationals: graph, terminal pairs,
//! demand graph, representations and metric closure.

use crate::rational::{compact, parse_rational, Rational};
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

/// Index of a vertex inside its [`Instance`].
pub type VertexId = usize;

/// Undirected edge key, always stored with `lo < hi`.
pub type EdgeKey = (VertexId, VertexId);

pub fn edge_key(a: VertexId, b: VertexId) -> EdgeKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Directed copy of an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
}

impl Arc {
    pub fn new(tail: VertexId, head: VertexId) -> Self {
        debug_assert_ne!(tail, head);
        Arc { tail, head }
    }

    pub fn reversed(self) -> Self {
        Arc { tail: self.head, head: self.tail }
    }

    pub fn edge(self) -> EdgeKey {
        edge_key(self.tail, self.head)
    }
}

/// Unordered terminal pair `{s, t}`; identity is by position in the pair list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair {
    pub s: VertexId,
    pub t: VertexId,
}

impl Pair {
    pub fn contains(&self, v: VertexId) -> bool {
        self.s == v || self.t == v
    }

    pub fn endpoints(&self) -> [VertexId; 2] {
        [self.s, self.t]
    }

    pub fn same_endpoints(&self, a: VertexId, b: VertexId) -> bool {
        (self.s == a && self.t == b) || (self.s == b && self.t == a)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("invalid vertex label `{0}`")]
    BadLabel(String),
    #[error("self-loop edge at `{0}`")]
    SelfLoop(String),
    #[error("pair with identical endpoints `{0}`")]
    SelfPair(String),
    #[error("negative cost on edge {0}-{1}")]
    NegativeCost(String, String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("instances do not share the same vertices and edges")]
    VertexMismatch,
    #[error("no path between `{0}` and `{1}` although they share a demand component")]
    Disconnected(String, String),
}

/// Undirected graph with nonnegative rational edge costs and an ordered list of terminal pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    labels: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: BTreeMap<EdgeKey, Rational>,
    pairs: Vec<Pair>,
}

fn valid_label(l: &str) -> bool {
    !l.is_empty() && !l.starts_with('#') && !l.chars().any(|c| c.is_whitespace() || c == ':')
}

/// Drops a `#` comment, which starts at a `#` opening a token, and trims.
pub fn strip_comment(raw: &str) -> &str {
    let mut prev_space = true;
    for (i, c) in raw.char_indices() {
        if c == '#' && prev_space {
            return raw[..i].trim();
        }
        prev_space = c.is_whitespace();
    }
    raw.trim()
}

impl Instance {
    pub fn new<S: AsRef<str>>(labels: impl IntoIterator<Item = S>) -> Result<Self, ModelError> {
        let mut inst = Instance {
            labels: Vec::new(),
            index: HashMap::new(),
            edges: BTreeMap::new(),
            pairs: Vec::new(),
        };
        for l in labels {
            inst.add_vertex(l.as_ref())?;
        }
        Ok(inst)
    }

    pub fn add_vertex(&mut self, label: &str) -> Result<VertexId, ModelError> {
        if !valid_label(label) {
            return Err(ModelError::BadLabel(label.to_string()));
        }
        if self.index.contains_key(label) {
            return Err(ModelError::DuplicateVertex(label.to_string()));
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        Ok(id)
    }

    /// Adds an undirected edge; a parallel edge keeps the minimum of the two costs.
    pub fn add_edge(&mut self, a: VertexId, b: VertexId, cost: Rational) -> Result<(), ModelError> {
        if a == b {
            return Err(ModelError::SelfLoop(self.labels[a].clone()));
        }
        if cost.is_negative() {
            return Err(ModelError::NegativeCost(self.labels[a].clone(), self.labels[b].clone()));
        }
        self.edges
            .entry(edge_key(a, b))
            .and_modify(|c| {
                if cost < *c {
                    *c = cost.clone();
                }
            })
            .or_insert(cost);
        Ok(())
    }

    pub fn add_pair(&mut self, s: VertexId, t: VertexId) -> Result<usize, ModelError> {
        if s == t {
            return Err(ModelError::SelfPair(self.labels[s].clone()));
        }
        self.pairs.push(Pair { s, t });
        Ok(self.pairs.len() - 1)
    }

    pub fn add_edge_by_label(&mut self, a: &str, b: &str, cost: Rational) -> Result<(), ModelError> {
        let (a, b) = (self.require(a)?, self.require(b)?);
        self.add_edge(a, b, cost)
    }

    pub fn add_pair_by_label(&mut self, s: &str, t: &str) -> Result<usize, ModelError> {
        let (s, t) = (self.require(s)?, self.require(t)?);
        self.add_pair(s, t)
    }

    /// Same graph with a different pair list.
    pub fn with_pairs(&self, pairs: Vec<Pair>) -> Self {
        Instance { pairs, ..self.clone() }
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.labels.len()
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<VertexId, ModelError> {
        self.vertex(label).ok_or_else(|| ModelError::UnknownVertex(label.to_string()))
    }

    pub fn edges(&self) -> &BTreeMap<EdgeKey, Rational> {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn cost(&self, a: VertexId, b: VertexId) -> Option<&Rational> {
        self.edges.get(&edge_key(a, b))
    }

    pub fn arc_cost(&self, arc: Arc) -> Option<&Rational> {
        self.cost(arc.tail, arc.head)
    }

    /// Both orientations of every edge, sorted by (tail, head).
    pub fn arcs(&self) -> Vec<Arc> {
        let mut arcs: Vec<Arc> = self
            .edges
            .keys()
            .flat_map(|&(a, b)| [Arc::new(a, b), Arc::new(b, a)])
            .collect();
        arcs.sort();
        arcs
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn pair_label(&self, p: usize) -> String {
        let pair = self.pairs[p];
        format!("{{{},{}}}", self.label(pair.s), self.label(pair.t))
    }

    /// Index of the first pair with endpoints `{a, b}`.
    pub fn find_pair(&self, a: VertexId, b: VertexId) -> Option<usize> {
        self.pairs.iter().position(|p| p.same_endpoints(a, b))
    }

    /// Vertices that belong to at least one pair.
    pub fn terminals(&self) -> BTreeSet<VertexId> {
        self.pairs.iter().flat_map(|p| p.endpoints()).collect()
    }

    /// Adjacency lists (neighbour, cost) in ascending neighbour order.
    pub fn adjacency(&self) -> Vec<Vec<(VertexId, Rational)>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for (&(a, b), c) in &self.edges {
            adj[a].push((b, c.clone()));
            adj[b].push((a, c.clone()));
        }
        for list in &mut adj {
            list.sort_by_key(|(v, _)| *v);
        }
        adj
    }

    pub fn demand_graph(&self) -> DemandGraph {
        DemandGraph::new(self)
    }

    pub fn set_label(&self, set: impl IntoIterator<Item = VertexId>) -> String {
        let names: Vec<&str> = set.into_iter().map(|v| self.label(v)).collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut inst = Instance::new(Vec::<String>::new())?;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = strip_comment(raw);
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let perr = |msg: String| ModelError::Parse { line: line_no, msg };
            match toks[0] {
                "vertices" => {
                    for l in &toks[1..] {
                        inst.add_vertex(l).map_err(|e| perr(e.to_string()))?;
                    }
                }
                "edge" => {
                    if toks.len() != 4 {
                        return Err(perr("expected `edge <u> <v> <cost>`".into()));
                    }
                    let cost = parse_rational(toks[3]).map_err(|e| perr(e.to_string()))?;
                    inst.add_edge_by_label(toks[1], toks[2], cost)
                        .map_err(|e| perr(e.to_string()))?;
                }
                "pair" => {
                    if toks.len() != 3 {
                        return Err(perr("expected `pair <s> <t>`".into()));
                    }
                    inst.add_pair_by_label(toks[1], toks[2])
                        .map_err(|e| perr(e.to_string()))?;
                }
                other => return Err(perr(format!("unknown directive `{other}`"))),
            }
        }
        Ok(inst)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {}", self.labels.join(" "));
        for (&(a, b), c) in &self.edges {
            let _ = writeln!(out, "edge {} {} {}", self.label(a), self.label(b), compact(c));
        }
        for p in &self.pairs {
            let _ = writeln!(out, "pair {} {}", self.label(p.s), self.label(p.t));
        }
        out
    }
}

/// Graph on the instance vertices with one edge per terminal pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandGraph {
    /// Connected components, each sorted by label; ordered by smallest member label.
    pub components: Vec<Vec<VertexId>>,
    pub component_of: Vec<usize>,
}

impl DemandGraph {
    fn new(inst: &Instance) -> Self {
        let n = inst.num_vertices();
        let mut uf = UnionFind::new(n);
        for p in inst.pairs() {
            uf.union(p.s, p.t);
        }
        let mut groups: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
        for v in 0..n {
            groups.entry(uf.find(v)).or_default().push(v);
        }
        let mut components: Vec<Vec<VertexId>> = groups.into_values().collect();
        for c in &mut components {
            c.sort_by(|&a, &b| inst.label(a).cmp(inst.label(b)));
        }
        components.sort_by(|a, b| inst.label(a[0]).cmp(inst.label(b[0])));
        let mut component_of = vec![0; n];
        for (i, c) in components.iter().enumerate() {
            for &v in c {
                component_of[v] = i;
            }
        }
        DemandGraph { components, component_of }
    }

    pub fn is_trivial(&self, component: usize) -> bool {
        self.components[component].len() == 1
    }

    pub fn nontrivial(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&c| !self.is_trivial(c)).collect()
    }

    fn label_partition(&self, inst: &Instance) -> BTreeSet<BTreeSet<String>> {
        self.components
            .iter()
            .map(|c| c.iter().map(|&v| inst.label(v).to_string()).collect())
            .collect()
    }
}

fn labelled_edges(inst: &Instance) -> BTreeMap<(String, String), Rational> {
    inst.edges()
        .iter()
        .map(|(&(a, b), c)| {
            let (x, y) = (inst.label(a).to_string(), inst.label(b).to_string());
            let key = if x < y { (x, y) } else { (y, x) };
            (key, c.clone())
        })
        .collect()
}

/// True iff both pair lists induce the same demand-graph components on a common graph.
pub fn same_representation(a: &Instance, b: &Instance) -> Result<bool, ModelError> {
    let la: BTreeSet<&String> = a.labels().iter().collect();
    let lb: BTreeSet<&String> = b.labels().iter().collect();
    if la != lb || labelled_edges(a) != labelled_edges(b) {
        return Err(ModelError::VertexMismatch);
    }
    Ok(a.demand_graph().label_partition(a) == b.demand_graph().label_partition(b))
}

/// Shortest-path completion of an instance together with witness paths.
#[derive(Debug, Clone)]
pub struct MetricClosure {
    /// Same vertices and pairs; one edge per connected vertex pair, costed by distance.
    pub instance: Instance,
    paths: BTreeMap<EdgeKey, Vec<VertexId>>,
}

impl MetricClosure {
    /// Shortest path in the base graph for a closure edge, from `a` to `b`.
    pub fn witness(&self, a: VertexId, b: VertexId) -> Option<Vec<VertexId>> {
        let path = self.paths.get(&edge_key(a, b))?;
        if path[0] == a {
            Some(path.clone())
        } else {
            Some(path.iter().rev().copied().collect())
        }
    }

    /// Base-graph edges on the witness path of a closure edge.
    pub fn expand(&self, a: VertexId, b: VertexId) -> Vec<EdgeKey> {
        self.witness(a, b)
            .map(|p| p.windows(2).map(|w| edge_key(w[0], w[1])).collect())
            .unwrap_or_default()
    }
}

/// All-pairs shortest paths (Floyd–Warshall, exact). Fails if some pair is disconnected.
pub fn metric_closure(inst: &Instance) -> Result<MetricClosure, ModelError> {
    let n = inst.num_vertices();
    let mut dist: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
    let mut next: Vec<Vec<usize>> = vec![vec![usize::MAX; n]; n];
    for v in 0..n {
        dist[v][v] = Some(Rational::zero());
        next[v][v] = v;
    }
    for (&(a, b), c) in inst.edges() {
        dist[a][b] = Some(c.clone());
        dist[b][a] = Some(c.clone());
        next[a][b] = b;
        next[b][a] = a;
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = dist[i][k].clone() else { continue };
            for j in 0..n {
                let Some(dkj) = &dist[k][j] else { continue };
                let cand = &dik + dkj;
                let better = match &dist[i][j] {
                    None => true,
                    Some(d) => cand < *d,
                };
                if better {
                    dist[i][j] = Some(cand);
                    next[i][j] = next[i][k];
                }
            }
        }
    }
    for p in inst.pairs() {
        if dist[p.s][p.t].is_none() {
            return Err(ModelError::Disconnected(
                inst.label(p.s).to_string(),
                inst.label(p.t).to_string(),
            ));
        }
    }
    let mut closure = inst.clone();
    closure.edges.clear();
    let mut paths = BTreeMap::new();
    for a in 0..n {
        for b in a + 1..n {
            let Some(d) = &dist[a][b] else { continue };
            closure.edges.insert((a, b), d.clone());
            let mut path = vec![a];
            let mut cur = a;
            while cur != b {
                cur = next[cur][b];
                path.push(cur);
            }
            paths.insert((a, b), path);
        }
    }
    Ok(MetricClosure { instance: closure, paths })
}

/// Disjoint-set forest with path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    /// Returns false if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}
