//! Certified instance families and seeded random half-integral solutions.

use crate::model::{Arc, EdgeKey, Instance, ModelError, Pair, UnionFind, VertexId};
use crate::rational::{half, int, ratio, Rational};
use crate::solution::{BcrSolution, DualCertificate, DualEntry};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("no connected graph after {0} attempts")]
    GenerationFailed(usize),
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn build(labels: &[String], edges: &[(String, String)], pairs: &[(String, String)]) -> Instance {
    let mut inst = Instance::new(labels).expect("distinct labels");
    for (a, b) in edges {
        inst.add_edge_by_label(a, b, int(1)).expect("known vertices");
    }
    for (s, t) in pairs {
        inst.add_pair_by_label(s, t).expect("known vertices");
    }
    inst
}

fn owned(v: &[(&str, &str)]) -> Vec<(String, String)> {
    v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn set_arcs(sol: &mut BcrSolution, inst: &Instance, root: &str, arcs: &[(&str, &str)], value: &Rational) {
    let r = inst.vertex(root).expect("root label");
    for (a, b) in arcs {
        let arc = Arc::new(inst.vertex(a).expect("tail"), inst.vertex(b).expect("head"));
        sol.add_x(r, arc, value);
    }
}

fn set_z(sol: &mut BcrSolution, inst: &Instance, root: &str, s: &str, t: &str, value: Rational) {
    let r = inst.vertex(root).expect("root label");
    let p = inst
        .find_pair(inst.vertex(s).expect("s"), inst.vertex(t).expect("t"))
        .expect("pair");
    sol.add_z(r, p, &value);
}

/// Unit-cost instance with `3q` vertices on which the relaxation has a solution of
/// cost `2q` while every Steiner forest costs `3q − 1`.
pub fn gen_lower_bound(q: usize) -> Result<(Instance, BcrSolution), GenerateError> {
    if q == 0 {
        return Err(GenerateError::BadParameters("q must be positive".into()));
    }
    let s = |i: usize| format!("s{i}");
    let v = |i: usize| format!("v{i}");
    let t = |i: usize| format!("t{i}");
    let mut labels = Vec::new();
    for f in [&s as &dyn Fn(usize) -> String, &v, &t] {
        labels.extend((1..=q).map(f));
    }
    let mut edges = Vec::new();
    for i in 1..=q {
        for j in 1..=q {
            edges.push((s(i), v(j)));
        }
    }
    for i in 1..=q {
        for j in 1..=q {
            edges.push((v(i), t(j)));
        }
    }
    let mut pairs: Vec<(String, String)> = (1..=q).map(|i| (s(i), t(i))).collect();
    pairs.extend((1..q).map(|i| (v(i), v(i + 1))));
    let inst = build(&labels, &edges, &pairs);
    let mut sol = BcrSolution::new();
    let frac = ratio(1, q as i64);
    for i in 1..=q {
        for j in 1..=q {
            set_arcs(&mut sol, &inst, &t(i), &[(&s(i), &v(j)), (&v(j), &t(i))], &frac);
        }
        set_z(&mut sol, &inst, &t(i), &s(i), &t(i), int(1));
    }
    for i in 1..q {
        for j in 1..=q {
            set_z(&mut sol, &inst, &t(j), &v(i), &v(i + 1), frac.clone());
        }
    }
    Ok((inst, sol))
}

/// Eight-vertex example with pairs `{a1,a2}`, `{b1,b2}`, `{c1,c2}` and a half-integral solution of cost 5.
pub fn gen_figure1() -> (Instance, BcrSolution) {
    let labels: Vec<String> = ["a1", "a2", "b1", "b2", "c1", "c2", "s1", "s2"].map(String::from).to_vec();
    let edges = owned(&[
        ("a1", "s1"),
        ("c1", "s1"),
        ("s1", "c2"),
        ("c1", "s2"),
        ("s2", "c2"),
        ("a2", "s2"),
        ("b1", "b2"),
        ("a1", "b1"),
        ("a2", "b2"),
    ]);
    let pairs = owned(&[("a1", "a2"), ("b1", "b2"), ("c1", "c2")]);
    let inst = build(&labels, &edges, &pairs);
    let mut sol = BcrSolution::new();
    let h = half();
    set_arcs(
        &mut sol,
        &inst,
        "c2",
        &[("a1", "s1"), ("c1", "s1"), ("s1", "c2"), ("c1", "s2"), ("s2", "c2"), ("a2", "s2")],
        &h,
    );
    set_arcs(&mut sol, &inst, "b1", &[("b2", "b1")], &h);
    set_arcs(&mut sol, &inst, "b2", &[("a1", "b1"), ("b1", "b2"), ("a2", "b2")], &h);
    set_z(&mut sol, &inst, "c2", "c1", "c2", int(1));
    set_z(&mut sol, &inst, "c2", "a1", "a2", half());
    set_z(&mut sol, &inst, "b1", "b1", "b2", half());
    set_z(&mut sol, &inst, "b2", "b1", "b2", half());
    set_z(&mut sol, &inst, "b2", "a1", "a2", half());
    (inst, sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    P1,
    P2,
}

const GADGET_VERTICES: [&str; 19] = [
    "a1", "a2", "a3", "b1", "b2", "c1", "c2", "d1", "d2", "e1", "e2", "s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8",
];

const GADGET_EDGES: [(&str, &str); 24] = [
    ("s1", "a1"),
    ("s1", "b1"),
    ("s1", "b2"),
    ("s2", "a1"),
    ("s2", "c1"),
    ("s2", "c2"),
    ("s3", "b1"),
    ("s3", "b2"),
    ("s3", "a2"),
    ("s4", "c1"),
    ("s4", "c2"),
    ("s4", "a2"),
    ("s5", "a2"),
    ("s5", "d1"),
    ("s5", "d2"),
    ("s6", "a2"),
    ("s6", "e1"),
    ("s6", "e2"),
    ("s7", "d1"),
    ("s7", "d2"),
    ("s7", "a3"),
    ("s8", "e1"),
    ("s8", "e2"),
    ("s8", "a3"),
];

/// The 19-vertex gadget with either representation of the same demand components.
pub fn gadget_instance(rep: Representation) -> Instance {
    let labels: Vec<String> = GADGET_VERTICES.iter().map(|s| s.to_string()).collect();
    let a_pairs = match rep {
        Representation::P1 => [("a1", "a2"), ("a2", "a3")],
        Representation::P2 => [("a1", "a2"), ("a1", "a3")],
    };
    let mut pairs = owned(&a_pairs);
    pairs.extend(owned(&[("b1", "b2"), ("c1", "c2"), ("d1", "d2"), ("e1", "e2")]));
    build(&labels, &owned(&GADGET_EDGES), &pairs)
}

fn gadget_primal(inst: &Instance, rep: Representation) -> BcrSolution {
    let mut sol = BcrSolution::new();
    let h = half();
    match rep {
        Representation::P1 => {
            set_arcs(&mut sol, inst, "b1", &[("a1", "s1"), ("b2", "s1"), ("s1", "b1"), ("s3", "b1"), ("b2", "s3"), ("a2", "s3")], &h);
            set_arcs(&mut sol, inst, "c2", &[("a1", "s2"), ("c1", "s2"), ("s2", "c2"), ("c1", "s4"), ("s4", "c2"), ("a2", "s4")], &h);
            set_arcs(&mut sol, inst, "d1", &[("a2", "s5"), ("d2", "s5"), ("s5", "d1"), ("s7", "d1"), ("d2", "s7"), ("a3", "s7")], &h);
            set_arcs(&mut sol, inst, "e2", &[("a2", "s6"), ("e1", "s6"), ("s6", "e2"), ("e1", "s8"), ("s8", "e2"), ("a3", "s8")], &h);
            set_z(&mut sol, inst, "b1", "b1", "b2", int(1));
            set_z(&mut sol, inst, "b1", "a1", "a2", half());
            set_z(&mut sol, inst, "c2", "c1", "c2", int(1));
            set_z(&mut sol, inst, "c2", "a1", "a2", half());
            set_z(&mut sol, inst, "d1", "d1", "d2", int(1));
            set_z(&mut sol, inst, "d1", "a2", "a3", half());
            set_z(&mut sol, inst, "e2", "e1", "e2", int(1));
            set_z(&mut sol, inst, "e2", "a2", "a3", half());
        }
        Representation::P2 => {
            set_arcs(&mut sol, inst, "b1", &[("b2", "s1"), ("s1", "b1")], &h);
            set_arcs(&mut sol, inst, "c2", &[("c1", "s2"), ("s2", "c2")], &h);
            set_arcs(
                &mut sol,
                inst,
                "d1",
                &[
                    ("a1", "s1"),
                    ("s1", "b2"),
                    ("b2", "s3"),
                    ("s3", "a2"),
                    ("b1", "s3"),
                    ("a2", "s5"),
                    ("d2", "s5"),
                    ("s5", "d1"),
                    ("s7", "d1"),
                    ("d2", "s7"),
                    ("a3", "s7"),
                ],
                &h,
            );
            set_arcs(
                &mut sol,
                inst,
                "e2",
                &[
                    ("a1", "s2"),
                    ("s2", "c1"),
                    ("c1", "s4"),
                    ("s4", "a2"),
                    ("c2", "s4"),
                    ("a2", "s6"),
                    ("e1", "s6"),
                    ("s6", "e2"),
                    ("e1", "s8"),
                    ("s8", "e2"),
                    ("a3", "s8"),
                ],
                &h,
            );
            set_z(&mut sol, inst, "b1", "b1", "b2", half());
            set_z(&mut sol, inst, "c2", "c1", "c2", half());
            for root in ["d1", "e2"] {
                let own = if root == "d1" { ("d1", "d2") } else { ("e1", "e2") };
                let side = if root == "d1" { ("b1", "b2") } else { ("c1", "c2") };
                set_z(&mut sol, inst, root, side.0, side.1, half());
                set_z(&mut sol, inst, root, "a1", "a2", half());
                set_z(&mut sol, inst, root, "a1", "a3", half());
                set_z(&mut sol, inst, root, own.0, own.1, int(1));
            }
        }
    }
    sol
}

const LOWER_HALF: &[&str] = &["a2", "a3", "d1", "d2", "e1", "e2", "s5", "s6", "s7", "s8"];
const LOWER_HALF_NO_A2: &[&str] = &["a3", "d1", "d2", "e1", "e2", "s5", "s6", "s7", "s8"];
const UPPER_HALF: &[&str] = &["a1", "b1", "b2", "c1", "c2", "s1", "s2", "s3", "s4"];
const A3_STEINERS: &[&str] = &["a3", "s7", "s8"];

type SetSpec = (&'static str, &'static str, Vec<Vec<&'static str>>);

/// Drawn dual sets for roots `b1`, `a1`, `a2`; each set carries value 1.
fn drawn_dual(rep: Representation, root: &str) -> Vec<SetSpec> {
    let all_but_a1: Vec<&str> = GADGET_VERTICES.iter().copied().filter(|v| *v != "a1").collect();
    let singles = |a: &'static str, b: &'static str| (a, b, vec![vec![a], vec![b]]);
    let mut out = Vec::new();
    match (rep, root) {
        (Representation::P1, _) => {
            out.push(match root {
                "b1" => ("a1", "a2", vec![vec!["a1"], LOWER_HALF.to_vec()]),
                "a1" => ("a1", "a2", vec![all_but_a1, LOWER_HALF.to_vec()]),
                _ => ("a1", "a2", vec![vec!["a1"], UPPER_HALF.to_vec()]),
            });
            out.push(("a2", "a3", vec![vec!["a3"], LOWER_HALF_NO_A2.to_vec()]));
        }
        (Representation::P2, _) => {
            out.push(match root {
                "b1" => ("a1", "a3", vec![vec!["a1"], LOWER_HALF.to_vec(), A3_STEINERS.to_vec(), vec!["a3"], LOWER_HALF_NO_A2.to_vec()]),
                "a1" => ("a1", "a3", vec![all_but_a1, LOWER_HALF.to_vec(), A3_STEINERS.to_vec(), vec!["a3"], LOWER_HALF_NO_A2.to_vec()]),
                _ => ("a1", "a3", vec![vec!["a1"], UPPER_HALF.to_vec(), vec!["a3"], A3_STEINERS.to_vec(), LOWER_HALF_NO_A2.to_vec()]),
            });
        }
    }
    if root == "b1" {
        out.push(("b1", "b2", vec![vec!["b2"], vec!["b2", "s1", "s3"]]));
    } else {
        out.push(singles("b1", "b2"));
    }
    out.push(singles("c1", "c2"));
    out.push(singles("d1", "d2"));
    out.push(singles("e1", "e2"));
    out
}

/// Automorphisms of the gadget graph: the four swaps inside a letter pair and the two mirrors.
fn gadget_automorphisms() -> Vec<BTreeMap<&'static str, &'static str>> {
    let swaps = [("b1", "b2"), ("c1", "c2"), ("d1", "d2"), ("e1", "e2")];
    let x_mirror = [
        ("b1", "c2"),
        ("b2", "c1"),
        ("s1", "s2"),
        ("s3", "s4"),
        ("s5", "s6"),
        ("s7", "s8"),
        ("d1", "e2"),
        ("d2", "e1"),
    ];
    let y_mirror = [
        ("a1", "a3"),
        ("b1", "d1"),
        ("b2", "d2"),
        ("c1", "e1"),
        ("c2", "e2"),
        ("s1", "s7"),
        ("s2", "s8"),
        ("s3", "s5"),
        ("s4", "s6"),
    ];
    let involution = |pairs: &[(&'static str, &'static str)]| {
        let mut m: BTreeMap<&str, &str> = GADGET_VERTICES.iter().map(|v| (*v, *v)).collect();
        for &(a, b) in pairs {
            m.insert(a, b);
            m.insert(b, a);
        }
        m
    };
    let compose = |f: &BTreeMap<&'static str, &'static str>, g: &BTreeMap<&'static str, &'static str>| {
        g.iter().map(|(k, v)| (*k, f[v])).collect::<BTreeMap<_, _>>()
    };
    let mut out = Vec::new();
    for mask in 0..64u32 {
        let mut m = involution(&[]);
        for (i, s) in swaps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                m = compose(&involution(&[*s]), &m);
            }
        }
        if mask >> 4 & 1 == 1 {
            m = compose(&involution(&x_mirror), &m);
        }
        if mask >> 5 & 1 == 1 {
            m = compose(&involution(&y_mirror), &m);
        }
        out.push(m);
    }
    out
}

/// Per-root check of the two dual constraint families, used to pick a symmetric image.
fn root_entries_ok(inst: &Instance, alpha: &BTreeMap<usize, Rational>, root: VertexId, entries: &[DualEntry]) -> bool {
    let adj = inst.adjacency();
    let mut load: BTreeMap<Arc, Rational> = BTreeMap::new();
    let mut cover: BTreeMap<usize, Rational> = BTreeMap::new();
    for e in entries {
        if e.set.contains(&root) {
            return false;
        }
        for &u in &e.set {
            for (v, _) in &adj[u] {
                if !e.set.contains(v) {
                    *load.entry(Arc::new(u, *v)).or_insert_with(Rational::zero) += &e.value;
                }
            }
        }
        *cover.entry(e.pair).or_insert_with(Rational::zero) += &e.value;
    }
    load.iter().all(|(a, l)| l <= inst.arc_cost(*a).expect("edge"))
        && alpha.iter().all(|(p, a)| cover.get(p).map_or(a.is_zero(), |c| a <= c))
}

fn gadget_dual(inst: &Instance, rep: Representation) -> DualCertificate {
    let mut alpha = BTreeMap::new();
    for (p, pair) in inst.pairs().iter().enumerate() {
        let (s, t) = (inst.label(pair.s), inst.label(pair.t));
        let v = match (rep, s, t) {
            (Representation::P2, "a1", "a3") => int(5),
            (Representation::P2, "a1", "a2") => int(0),
            _ => int(2),
        };
        alpha.insert(p, v);
    }
    let autos = gadget_automorphisms();
    let bases: Vec<(&str, Vec<SetSpec>)> = ["b1", "a1", "a2"].iter().map(|&r| (r, drawn_dual(rep, r))).collect();
    let mut y = Vec::new();
    for root in inst.vertices() {
        let label = inst.label(root);
        let mut chosen = None;
        // Images of a drawn root under an automorphism first, then plain reuse for Steiner roots.
        'search: for reuse in [false, true] {
            for (base_root, specs) in &bases {
                for sigma in &autos {
                    if !reuse && sigma[base_root] != label {
                        continue;
                    }
                    let mut entries = Vec::new();
                    for (s, t, sets) in specs {
                        let Some(p) = inst.find_pair(inst.vertex(sigma[s]).unwrap(), inst.vertex(sigma[t]).unwrap()) else {
                            continue 'search;
                        };
                        for set in sets {
                            let set: BTreeSet<VertexId> = set.iter().map(|v| inst.vertex(sigma[v]).unwrap()).collect();
                            entries.push(DualEntry { root, set, pair: p, value: int(1) });
                        }
                    }
                    if root_entries_ok(inst, &alpha, root, &entries) {
                        chosen = Some(entries);
                        break 'search;
                    }
                }
            }
        }
        y.extend(chosen.unwrap_or_default());
    }
    alpha.retain(|_, v| !v.is_zero());
    DualCertificate { alpha, y }
}

/// Gadget instance with its optimal primal solution and a matching dual certificate.
pub fn gen_gadget(rep: Representation) -> (Instance, BcrSolution, DualCertificate) {
    let inst = gadget_instance(rep);
    let primal = gadget_primal(&inst, rep);
    let dual = gadget_dual(&inst, rep);
    (inst, primal, dual)
}

/// Parameters of a random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub seed: u64,
    pub n: usize,
    pub edge_density: f64,
    pub pairs: usize,
}

const CONNECT_ATTEMPTS: usize = 200;

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Result<Instance, GenerateError> {
    let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    for _ in 0..CONNECT_ATTEMPTS {
        let mut inst = Instance::new(&labels)?;
        let mut uf = UnionFind::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    inst.add_edge(a, b, int(rng.gen_range(1..=10)))?;
                    uf.union(a, b);
                }
            }
        }
        if (1..n).all(|v| uf.connected(0, v)) {
            return Ok(inst);
        }
    }
    Err(GenerateError::GenerationFailed(CONNECT_ATTEMPTS))
}

fn random_spanning_tree(rng: &mut ChaCha8Rng, inst: &Instance) -> Vec<EdgeKey> {
    let mut edges: Vec<EdgeKey> = inst.edges().keys().copied().collect();
    edges.shuffle(rng);
    let mut uf = UnionFind::new(inst.num_vertices());
    edges.into_iter().filter(|&(a, b)| uf.union(a, b)).collect()
}

/// Integral solution: per demand component, the subtree of a random spanning tree
/// connecting its terminals, oriented towards a random terminal of the component.
fn random_integral_solution(rng: &mut ChaCha8Rng, inst: &Instance) -> BcrSolution {
    let tree = random_spanning_tree(rng, inst);
    let n = inst.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in &tree {
        adj[a].push(b);
        adj[b].push(a);
    }
    let dg = inst.demand_graph();
    let mut sol = BcrSolution::new();
    for c in dg.nontrivial() {
        let members = &dg.components[c];
        let root = *members.choose(rng).expect("nonempty component");
        // BFS parents towards the root, then keep the union of member-to-root paths.
        let mut parent = vec![usize::MAX; n];
        parent[root] = root;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        let mut used = BTreeSet::new();
        for &m in members {
            let mut cur = m;
            while cur != root && used.insert(cur) {
                sol.set_x(root, Arc::new(cur, parent[cur]), int(1));
                cur = parent[cur];
            }
        }
        for (p, pair) in inst.pairs().iter().enumerate() {
            if dg.component_of[pair.s] == c {
                sol.set_z(root, p, int(1));
            }
        }
    }
    sol
}

fn average(a: &BcrSolution, b: &BcrSolution) -> BcrSolution {
    let mut out = BcrSolution::new();
    let h = half();
    for src in [a, b] {
        for (r, arc, v) in src.x_entries() {
            out.add_x(r, arc, &(v * &h));
        }
        for (r, p, v) in src.z_entries() {
            out.add_z(r, p, &(v * &h));
        }
    }
    out
}

fn random_pairs(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(VertexId, VertexId)> {
    let mut all: Vec<(VertexId, VertexId)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    all.shuffle(rng);
    all.truncate(count);
    all
}

/// Random connected graph with costs in 1..=10, random pairs, and the average of
/// two random integral solutions.
pub fn gen_random_halfintegral(spec: RandomSpec) -> Result<(Instance, BcrSolution), GenerateError> {
    if spec.n < 4 {
        return Err(GenerateError::BadParameters("n must be at least 4".into()));
    }
    if !(0.0..=1.0).contains(&spec.edge_density) {
        return Err(GenerateError::BadParameters("edge density must lie in [0,1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut inst = random_graph(&mut rng, spec.n, spec.edge_density)?;
    for (s, t) in random_pairs(&mut rng, spec.n, spec.pairs) {
        inst.add_pair(s, t)?;
    }
    let a = random_integral_solution(&mut rng, &inst);
    let b = random_integral_solution(&mut rng, &inst);
    Ok((inst, average(&a, &b)))
}

/// Like [`gen_random_halfintegral`], but the pairs form a random tree over
/// `spec.pairs + 1` terminals, so the demand graph has one nontrivial component.
pub fn gen_random_single_component(spec: RandomSpec) -> Result<(Instance, BcrSolution), GenerateError> {
    if spec.n < 4 || spec.pairs == 0 || spec.pairs >= spec.n {
        return Err(GenerateError::BadParameters("need n ≥ 4 and 1 ≤ pairs < n".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut inst = random_graph(&mut rng, spec.n, spec.edge_density)?;
    let mut verts: Vec<VertexId> = (0..spec.n).collect();
    verts.shuffle(&mut rng);
    let terms = &verts[..=spec.pairs];
    for i in 1..terms.len() {
        let j = rng.gen_range(0..i);
        inst.add_pair(terms[j], terms[i])?;
    }
    let a = random_integral_solution(&mut rng, &inst);
    let b = random_integral_solution(&mut rng, &inst);
    Ok((inst, average(&a, &b)))
}

/// Same demand components, pairs as a star from each component's first member.
pub fn star_representation(inst: &Instance) -> Instance {
    let dg = inst.demand_graph();
    let mut pairs = Vec::new();
    for c in dg.nontrivial() {
        let m = &dg.components[c];
        pairs.extend(m[1..].iter().map(|&v| Pair { s: m[0], t: v }));
    }
    inst.with_pairs(pairs)
}

/// Same demand components, pairs as a path through each component in label order.
pub fn path_representation(inst: &Instance) -> Instance {
    let dg = inst.demand_graph();
    let mut pairs = Vec::new();
    for c in dg.nontrivial() {
        let m = &dg.components[c];
        pairs.extend(m.windows(2).map(|w| Pair { s: w[0], t: w[1] }));
    }
    inst.with_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::same_representation;
    use crate::solution::{verify_dual, verify_primal, DualVerdict};

    #[test]
    fn lower_bound_sizes_and_cost() {
        for q in 1..=5 {
            let (inst, sol) = gen_lower_bound(q).unwrap();
            assert_eq!(inst.num_vertices(), 3 * q);
            assert_eq!(inst.num_edges(), 2 * q * q);
            assert_eq!(inst.pairs().len(), 2 * q - 1);
            assert_eq!(sol.cost(&inst).unwrap(), int(2 * q as i64));
            assert!(verify_primal(&sol, &inst).is_feasible());
        }
        assert!(gen_lower_bound(0).is_err());
    }

    #[test]
    fn figure1_solution() {
        let (inst, sol) = gen_figure1();
        assert!(verify_primal(&sol, &inst).is_feasible());
        assert!(sol.is_half_integral());
        assert_eq!(sol.cost(&inst).unwrap(), int(5));
        assert_eq!(inst.terminals().len(), 6);
    }

    #[test]
    fn gadget_certificates() {
        for (rep, value) in [(Representation::P1, 12), (Representation::P2, 13)] {
            let (inst, primal, dual) = gen_gadget(rep);
            assert!(verify_primal(&primal, &inst).is_feasible(), "{:?}", verify_primal(&primal, &inst).describe(&inst));
            assert_eq!(primal.cost(&inst).unwrap(), int(value));
            assert_eq!(verify_dual(&dual, &inst), DualVerdict::Feasible { value: int(value) });
            let roots: BTreeSet<VertexId> = dual.y.iter().map(|e| e.root).collect();
            assert_eq!(roots.len(), 19);
        }
        let p1 = gadget_instance(Representation::P1);
        let p2 = gadget_instance(Representation::P2);
        assert!(same_representation(&p1, &p2).unwrap());
    }

    #[test]
    fn random_generator_is_deterministic_and_feasible() {
        let spec = RandomSpec { seed: 42, n: 8, edge_density: 0.4, pairs: 3 };
        let (i1, s1) = gen_random_halfintegral(spec).unwrap();
        let (i2, s2) = gen_random_halfintegral(spec).unwrap();
        assert_eq!(i1.to_text(), i2.to_text());
        assert_eq!(s1.to_text(&i1), s2.to_text(&i2));
        assert!(verify_primal(&s1, &i1).is_feasible());
        assert!(s1.is_half_integral());
        assert!(gen_random_halfintegral(RandomSpec { n: 3, ..spec }).is_err());
    }

    #[test]
    fn self_average_is_integral() {
        let (inst, _) = gen_figure1();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_integral_solution(&mut rng, &inst);
        let avg = average(&a, &a);
        assert_eq!(avg, a);
        assert!(verify_primal(&a, &inst).is_feasible());
    }

    #[test]
    fn single_component_generator() {
        for seed in 0..10 {
            let (inst, sol) = gen_random_single_component(RandomSpec { seed, n: 7, edge_density: 0.5, pairs: 3 }).unwrap();
            assert_eq!(inst.demand_graph().nontrivial().len(), 1);
            assert!(verify_primal(&sol, &inst).is_feasible());
            let star = star_representation(&inst);
            let path = path_representation(&inst);
            assert!(same_representation(&star, &inst).unwrap());
            assert!(same_representation(&path, &inst).unwrap());
        }
    }
}
