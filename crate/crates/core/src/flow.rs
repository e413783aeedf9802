//! Exact maximum flow and minimum cut over rational capacities.
//!
//! Capacities are scaled by the common denominator and the shortest augmenting
//! path method runs on integers (`i128` when the total fits, `BigInt` otherwise),
//! so the result is exact and capacities in `(1/k)·ℤ` give flows in `(1/k)·ℤ`.

use crate::rational::{common_denominator, Rational};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::{Add, Sub};

/// Directed network on nodes `0..n` with nonnegative rational capacities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlowNetwork {
    n: usize,
    arcs: BTreeMap<(usize, usize), Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub value: Rational,
    /// Positive flow per arc; opposite flows on antiparallel arcs are cancelled.
    pub arc_flows: BTreeMap<(usize, usize), Rational>,
    /// Nodes reachable from the sources in the final residual network. For a
    /// maximum flow this is the inclusion-minimal source side of a minimum cut.
    pub min_cut_side: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowError {
    #[error("flow limit {limit} exceeds the maximum flow value {max}")]
    LimitInfeasible { limit: Rational, max: Rational },
    #[error("sources and sinks must be nonempty and disjoint")]
    BadTerminals,
    #[error("node {0} out of range")]
    NodeOutOfRange(usize),
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { n, arcs: BTreeMap::new() }
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Adds capacity on `u -> v`; parallel arcs are merged by summing. Loops and
    /// zero capacities are ignored.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: Rational) {
        assert!(u < self.n && v < self.n, "arc endpoint out of range");
        assert!(cap >= Rational::zero(), "negative capacity");
        if u == v || cap.is_zero() {
            return;
        }
        *self.arcs.entry((u, v)).or_insert_with(Rational::zero) += cap;
    }

    pub fn capacity(&self, u: usize, v: usize) -> Rational {
        self.arcs.get(&(u, v)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.arcs.iter()
    }

    /// Total capacity leaving `set` (arcs from inside to outside).
    pub fn cut_capacity(&self, set: &BTreeSet<usize>) -> Rational {
        self.arcs
            .iter()
            .filter(|((u, v), _)| set.contains(u) && !set.contains(v))
            .fold(Rational::zero(), |acc, (_, c)| acc + c)
    }
}

trait FlowInt: Clone + Ord + Zero + Add<Output = Self> + Sub<Output = Self> {}
impl FlowInt for i128 {}
impl FlowInt for BigInt {}

struct Edge<T> {
    to: usize,
    rev: usize,
    cap: T,
    original: bool,
}

struct Residual<T> {
    adj: Vec<Vec<Edge<T>>>,
}

impl<T: FlowInt> Residual<T> {
    fn new(n: usize) -> Self {
        Residual { adj: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, u: usize, v: usize, cap: T, original: bool) {
        let (ru, rv) = (self.adj[v].len(), self.adj[u].len());
        self.adj[u].push(Edge { to: v, rev: ru, cap, original });
        self.adj[v].push(Edge { to: u, rev: rv, cap: T::zero(), original: false });
    }

    fn bfs(&self, s: usize) -> Vec<Option<(usize, usize)>> {
        let mut pred = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for (i, e) in self.adj[u].iter().enumerate() {
                if !seen[e.to] && e.cap > T::zero() {
                    seen[e.to] = true;
                    pred[e.to] = Some((u, i));
                    queue.push_back(e.to);
                }
            }
        }
        pred
    }

    fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for e in &self.adj[u] {
                if !seen[e.to] && e.cap > T::zero() {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        seen
    }

    /// Shortest augmenting paths until no path remains or `limit` is reached.
    fn run(&mut self, s: usize, t: usize, limit: Option<&T>) -> T {
        let mut value = T::zero();
        loop {
            if let Some(l) = limit {
                if value >= *l {
                    break;
                }
            }
            let pred = self.bfs(s);
            if pred[t].is_none() {
                break;
            }
            let mut bottleneck: Option<T> = None;
            let mut v = t;
            while let Some((u, i)) = pred[v] {
                let c = self.adj[u][i].cap.clone();
                bottleneck = Some(match bottleneck {
                    Some(b) if b <= c => b,
                    _ => c,
                });
                v = u;
            }
            let mut push = bottleneck.expect("path has at least one arc");
            if let Some(l) = limit {
                let rest = l.clone() - value.clone();
                if rest < push {
                    push = rest;
                }
            }
            let mut v = t;
            while let Some((u, i)) = pred[v] {
                let rev = self.adj[u][i].rev;
                let c = self.adj[u][i].cap.clone();
                self.adj[u][i].cap = c - push.clone();
                let rc = self.adj[v][rev].cap.clone();
                self.adj[v][rev].cap = rc + push.clone();
                v = u;
            }
            value = value + push;
        }
        value
    }
}

fn to_scaled(r: &Rational, scale: &BigInt) -> BigInt {
    r.numer() * (scale / r.denom())
}

/// Maximum flow from `sources` to `sinks` (or a flow of exactly `limit` when
/// `limit` is below the maximum).
pub fn max_flow(
    net: &FlowNetwork,
    sources: &[usize],
    sinks: &[usize],
    limit: Option<&Rational>,
) -> Result<FlowResult, FlowError> {
    if sources.is_empty() || sinks.is_empty() || sources.iter().any(|s| sinks.contains(s)) {
        return Err(FlowError::BadTerminals);
    }
    if let Some(&bad) = sources.iter().chain(sinks).find(|&&v| v >= net.n) {
        return Err(FlowError::NodeOutOfRange(bad));
    }
    let scale = common_denominator(net.arcs.values().chain(limit));
    let total: BigInt = net.arcs.values().map(|c| to_scaled(c, &scale)).sum();
    let fits = total.bits() < 100
        && limit.map_or(true, |l| to_scaled(l, &scale).bits() < 100);
    if fits {
        solve::<i128>(net, sources, sinks, limit, &scale, |b| b.to_i128().unwrap(), BigInt::from)
    } else {
        solve::<BigInt>(net, sources, sinks, limit, &scale, |b| b, |b| b)
    }
}

fn solve<T: FlowInt>(
    net: &FlowNetwork,
    sources: &[usize],
    sinks: &[usize],
    limit: Option<&Rational>,
    scale: &BigInt,
    from_big: impl Fn(BigInt) -> T,
    to_big: impl Fn(T) -> BigInt,
) -> Result<FlowResult, FlowError> {
    let n = net.n;
    let (s, t) = (n, n + 1);
    let mut res = Residual::<T>::new(n + 2);
    let mut total = T::zero();
    for (&(u, v), c) in &net.arcs {
        let c = from_big(to_scaled(c, scale));
        total = total + c.clone();
        res.add(u, v, c, true);
    }
    let infinite = total + from_big(BigInt::from(1));
    for &src in sources {
        res.add(s, src, infinite.clone(), false);
    }
    for &snk in sinks {
        res.add(snk, t, infinite.clone(), false);
    }
    let limit_scaled = limit.map(|l| from_big(to_scaled(l, scale)));
    let value = res.run(s, t, limit_scaled.as_ref());
    let unscale = |x: T| Rational::new(to_big(x), scale.clone());
    if let Some(l) = &limit_scaled {
        if value < *l {
            return Err(FlowError::LimitInfeasible {
                limit: limit.cloned().unwrap(),
                max: unscale(value),
            });
        }
    }

    let mut flows: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for u in 0..n {
        for e in &res.adj[u] {
            if e.original {
                let f = res.adj[e.to][e.rev].cap.clone();
                if f > T::zero() {
                    flows.insert((u, e.to), f);
                }
            }
        }
    }
    let keys: Vec<(usize, usize)> = flows.keys().copied().collect();
    for (u, v) in keys {
        if u < v {
            if let (Some(a), Some(b)) = (flows.get(&(u, v)).cloned(), flows.get(&(v, u)).cloned()) {
                let m = if a <= b { a.clone() } else { b.clone() };
                flows.insert((u, v), a - m.clone());
                flows.insert((v, u), b - m);
            }
        }
    }
    let arc_flows = flows
        .into_iter()
        .filter(|(_, f)| *f > T::zero())
        .map(|(k, f)| (k, unscale(f)))
        .collect();
    let reach = res.reachable(s);
    let min_cut_side = (0..n).filter(|&v| reach[v]).collect();
    Ok(FlowResult { value: unscale(value), arc_flows, min_cut_side })
}

/// Minimum cut value and its inclusion-minimal source side.
pub fn min_cut_value(
    net: &FlowNetwork,
    sources: &[usize],
    sinks: &[usize],
) -> Result<(Rational, BTreeSet<usize>), FlowError> {
    let r = max_flow(net, sources, sinks, None)?;
    Ok((r.value, r.min_cut_side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, int, is_half_integral, ratio};
    use proptest::prelude::*;

    /// Exhaustive minimum over all node sets containing the sources and avoiding the sinks.
    fn brute_min_cut(net: &FlowNetwork, sources: &[usize], sinks: &[usize]) -> Rational {
        let free: Vec<usize> = (0..net.num_nodes())
            .filter(|v| !sources.contains(v) && !sinks.contains(v))
            .collect();
        let mut best: Option<Rational> = None;
        for mask in 0u32..(1 << free.len()) {
            let mut side: BTreeSet<usize> = sources.iter().copied().collect();
            for (i, &v) in free.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    side.insert(v);
                }
            }
            let c = net.cut_capacity(&side);
            if best.as_ref().map_or(true, |b| c < *b) {
                best = Some(c);
            }
        }
        best.unwrap()
    }

    fn check_conservation(net: &FlowNetwork, r: &FlowResult, sources: &[usize], sinks: &[usize]) {
        let mut balance = vec![Rational::zero(); net.num_nodes()];
        for (&(u, v), f) in &r.arc_flows {
            assert!(*f > Rational::zero());
            assert!(*f <= net.capacity(u, v), "flow exceeds capacity on {u}->{v}");
            balance[u] -= f;
            balance[v] += f;
        }
        let mut out = Rational::zero();
        for v in 0..net.num_nodes() {
            if sources.contains(&v) {
                out -= &balance[v];
            } else if !sinks.contains(&v) {
                assert!(balance[v].is_zero(), "conservation violated at {v}");
            }
        }
        assert_eq!(out, r.value);
    }

    #[test]
    fn single_arc() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, ratio(3, 2));
        let r = max_flow(&net, &[0], &[1], None).unwrap();
        assert_eq!(r.value, ratio(3, 2));
        assert_eq!(r.min_cut_side, BTreeSet::from([0]));
        assert_eq!(min_cut_value(&net, &[0], &[1]).unwrap(), (ratio(3, 2), BTreeSet::from([0])));
    }

    #[test]
    fn diamond_of_halves() {
        // s=0, a=1, b=2, t=3
        let mut net = FlowNetwork::new(4);
        for (u, v) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            net.add_arc(u, v, half());
        }
        let r = max_flow(&net, &[0], &[3], None).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.arc_flows.len(), 4);
        assert!(r.arc_flows.values().all(|f| *f == half()));
        assert_eq!(brute_min_cut(&net, &[0], &[3]), int(1));
        assert_eq!(r.min_cut_side, BTreeSet::from([0]));
    }

    #[test]
    fn parallel_paths_and_parallel_arcs_merge() {
        let mut net = FlowNetwork::new(2);
        net.add_arc(0, 1, half());
        net.add_arc(0, 1, half());
        assert_eq!(net.capacity(0, 1), int(1));
        assert_eq!(min_cut_value(&net, &[0], &[1]).unwrap(), (int(1), BTreeSet::from([0])));
    }

    #[test]
    fn zero_limit_and_limit_errors() {
        let mut net = FlowNetwork::new(3);
        net.add_arc(0, 1, int(1));
        net.add_arc(1, 2, int(1));
        let r = max_flow(&net, &[0], &[2], Some(&int(0))).unwrap();
        assert!(r.value.is_zero());
        assert!(r.arc_flows.is_empty());
        let r = max_flow(&net, &[0], &[2], Some(&half())).unwrap();
        assert_eq!(r.value, half());
        assert!(matches!(
            max_flow(&net, &[0], &[2], Some(&int(2))),
            Err(FlowError::LimitInfeasible { .. })
        ));
    }

    #[test]
    fn unreachable_sinks() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, int(1));
        net.add_arc(2, 3, int(1));
        let (v, side) = min_cut_value(&net, &[0], &[3]).unwrap();
        assert!(v.is_zero());
        assert_eq!(side, BTreeSet::from([0, 1]));
    }

    #[test]
    fn bad_terminals() {
        let net = FlowNetwork::new(2);
        assert_eq!(max_flow(&net, &[0], &[0], None), Err(FlowError::BadTerminals));
        assert_eq!(max_flow(&net, &[], &[1], None), Err(FlowError::BadTerminals));
    }

    #[test]
    fn antiparallel_flows_are_cancelled() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, int(1));
        net.add_arc(1, 2, int(1));
        net.add_arc(2, 1, int(1));
        net.add_arc(2, 3, int(1));
        let r = max_flow(&net, &[0], &[3], None).unwrap();
        assert!(!(r.arc_flows.contains_key(&(1, 2)) && r.arc_flows.contains_key(&(2, 1))));
    }

    #[test]
    fn huge_capacities_use_big_integers() {
        let mut net = FlowNetwork::new(3);
        let big = Rational::from_integer(BigInt::from(10).pow(40));
        net.add_arc(0, 1, big.clone());
        net.add_arc(1, 2, big.clone() + ratio(1, 3));
        let r = max_flow(&net, &[0], &[2], None).unwrap();
        assert_eq!(r.value, big);
    }

    fn network_strategy() -> impl Strategy<Value = (FlowNetwork, Vec<usize>, Vec<usize>)> {
        (3usize..=12).prop_flat_map(|n| {
            let arcs = proptest::collection::vec((0..n, 0..n, 0i64..6, 1i64..4), 0..(n * 3));
            (Just(n), arcs, 1usize..3, 1usize..3)
        })
        .prop_map(|(n, arcs, ns, nt)| {
            let mut net = FlowNetwork::new(n);
            for (u, v, num, den) in arcs {
                if u != v {
                    net.add_arc(u, v, ratio(num, den));
                }
            }
            let ns = ns.min(n - 1);
            let nt = nt.min(n - ns);
            let sources: Vec<usize> = (0..ns).collect();
            let sinks: Vec<usize> = (n - nt..n).collect();
            (net, sources, sinks)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn max_flow_equals_enumerated_min_cut((net, sources, sinks) in network_strategy()) {
            let r = max_flow(&net, &sources, &sinks, None).unwrap();
            prop_assert_eq!(&r.value, &brute_min_cut(&net, &sources, &sinks));
            prop_assert_eq!(net.cut_capacity(&r.min_cut_side), r.value.clone());
            check_conservation(&net, &r, &sources, &sinks);
        }

        #[test]
        fn half_integral_capacities_give_half_integral_flows(
            caps in proptest::collection::vec((0usize..8, 0usize..8, 0i64..5), 1..30)
        ) {
            let mut net = FlowNetwork::new(8);
            for (u, v, k) in caps {
                if u != v {
                    net.add_arc(u, v, ratio(k, 2));
                }
            }
            let r = max_flow(&net, &[0], &[7], None).unwrap();
            prop_assert!(is_half_integral(&r.value));
            prop_assert!(r.arc_flows.values().all(is_half_integral));
        }
    }
}
