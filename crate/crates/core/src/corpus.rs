//! Seeded batch runs of the rounding pipeline with per-seed property audits.

use crate::density::{densest_subgraph_bruteforce, degree_structure_violations, projection_multigraph};
use crate::generators::{gen_random_halfintegral, gen_random_single_component, path_representation, star_representation, RandomSpec};
use crate::lp::{solve_forest_bcr, solve_tree_bcr, LpError, LpOptions};
use crate::model::{metric_closure, Instance};
use crate::rational::{ratio, Rational, PQ};
use crate::rounding::round_observed;
use crate::solution::{verify_primal, verify_tree_bcr, BcrSolution};
use crate::steiner::{default_root, to_tree_bcr};
use crate::structuring::{find_split, fully_reduce, reroute_steiner_roots, split_off, steiner_roots_with_z};
use crate::forest::check_forest;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

/// Largest support on which the density oracle is compared.
pub const ORACLE_SUPPORT: usize = 14;

pub const EDGE_DENSITY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Generation,
    Rounding,
    Ratio,
    MstBound,
    Density,
    DegreeStructure,
    DensityOracle,
    Structuring,
    SteinerTransform,
    Representations,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub check: Check,
    pub message: String,
}

/// Outcome of one seed of the half-integral corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedReport {
    pub seed: u64,
    pub n: usize,
    pub pairs: usize,
    pub lp_cost: Rational,
    pub rounded_cost: Rational,
    pub ratio: Rational,
    pub min_density: Option<Rational>,
    pub levels: usize,
    /// Levels on which the exhaustive density oracle was compared.
    pub oracle_levels: usize,
    pub failures: Vec<Failure>,
}

impl SeedReport {
    pub fn passed(&self, check: Check) -> bool {
        self.failures.iter().all(|f| f.check != check)
    }
}

/// Vertex count and pair count of a seed: `n` cycles through `n_range`.
pub fn spec_for(seed: u64, n_range: &RangeInclusive<usize>) -> RandomSpec {
    let span = (n_range.end() - n_range.start() + 1) as u64;
    let n = n_range.start() + (seed % span) as usize;
    let pairs = (2 + (seed / span) % 3) as usize;
    RandomSpec { seed, n, edge_density: EDGE_DENSITY, pairs: pairs.min(n / 2) }
}

fn fail(out: &mut Vec<Failure>, check: Check, message: String) {
    out.push(Failure { check, message });
}

/// Reroute, split-off and full reduction each keep feasibility, cost and
/// half-integrality; the split-off result has z only on terminals and no split left.
fn audit_structuring(sol: &BcrSolution, inst: &Instance, out: &mut Vec<Failure>) {
    let Ok(closure) = metric_closure(inst) else {
        return fail(out, Check::Structuring, "metric closure failed".into());
    };
    let g = &closure.instance;
    let step = |name: &str, before: &BcrSolution, after: &BcrSolution, out: &mut Vec<Failure>| {
        let v = verify_primal(after, g);
        if !v.is_feasible() {
            fail(out, Check::Structuring, format!("{name} broke feasibility: {}", v.describe(g)));
        }
        let (cb, ca) = (before.cost(g).ok(), after.cost(g).ok());
        if ca > cb {
            fail(out, Check::Structuring, format!("{name} increased cost"));
        }
        if before.is_half_integral() && !after.is_half_integral() {
            fail(out, Check::Structuring, format!("{name} lost half-integrality"));
        }
    };
    let rerouted = match reroute_steiner_roots(sol, g) {
        Ok((s, _)) => s,
        Err(e) => return fail(out, Check::Structuring, format!("reroute: {e}")),
    };
    step("reroute", sol, &rerouted, out);
    let split = match split_off(&rerouted, g) {
        Ok((s, _)) => s,
        Err(e) => return fail(out, Check::Structuring, format!("split_off: {e}")),
    };
    step("split_off", &rerouted, &split, out);
    if !steiner_roots_with_z(&split, g).is_empty() {
        fail(out, Check::Structuring, "z mass left on a Steiner root".into());
    }
    if let Some(s) = find_split(&split, g) {
        fail(out, Check::Structuring, format!("split-off still possible at root {}", g.label(s.root)));
    }
    let (reduced, _) = fully_reduce(&split, g);
    step("fully_reduce", &split, &reduced, out);
}

/// Generates seed `seed` and runs rounding with every audit.
pub fn run_seed(seed: u64, n_range: &RangeInclusive<usize>) -> SeedReport {
    let spec = spec_for(seed, n_range);
    let mut report = SeedReport {
        seed,
        n: spec.n,
        pairs: spec.pairs,
        lp_cost: Rational::zero(),
        rounded_cost: Rational::zero(),
        ratio: Rational::one(),
        min_density: None,
        levels: 0,
        oracle_levels: 0,
        failures: Vec::new(),
    };
    let (inst, sol) = match gen_random_halfintegral(spec) {
        Ok(v) => v,
        Err(e) => {
            fail(&mut report.failures, Check::Generation, e.to_string());
            return report;
        }
    };
    audit_structuring(&sol, &inst, &mut report.failures);

    let mut level_failures = Vec::new();
    let mut oracle_levels = 0;
    let bound = ratio(9, 16);
    let result = round_observed(&sol, &inst, &mut |k, g, ws, best| {
        if best.density < bound {
            fail(&mut level_failures, Check::Density, format!("level {k}: density {} < 9/16", PQ(&best.density)));
        }
        match projection_multigraph(ws) {
            Ok(pm) => {
                let bad = degree_structure_violations(&pm, g.num_vertices());
                if !bad.is_empty() {
                    fail(&mut level_failures, Check::DegreeStructure, format!("level {k}: vertex {}", g.label(bad[0])));
                }
                let support = (0..g.num_vertices()).filter(|&v| pm.degree_of(v) > 0).count();
                if support <= ORACLE_SUPPORT {
                    oracle_levels += 1;
                    match densest_subgraph_bruteforce(ws, g) {
                        Ok(b) if b.density == best.density => {}
                        Ok(b) => fail(
                            &mut level_failures,
                            Check::DensityOracle,
                            format!("level {k}: {} vs exhaustive {}", PQ(&best.density), PQ(&b.density)),
                        ),
                        Err(e) => fail(&mut level_failures, Check::DensityOracle, e.to_string()),
                    }
                }
            }
            Err(e) => fail(&mut level_failures, Check::DegreeStructure, e.to_string()),
        }
    });
    report.failures.extend(level_failures);
    report.oracle_levels = oracle_levels;
    let (forest, trace) = match result {
        Ok(v) => v,
        Err(e) => {
            fail(&mut report.failures, Check::Rounding, e.to_string());
            return report;
        }
    };
    if !check_forest(&forest, &inst).map(|v| v.is_feasible()).unwrap_or(false) {
        fail(&mut report.failures, Check::Rounding, "rounded forest is infeasible".into());
    }
    report.lp_cost = sol.cost(&inst).expect("generated arcs");
    report.rounded_cost = trace.total_cost.clone();
    if !report.lp_cost.is_zero() {
        report.ratio = &report.rounded_cost / &report.lp_cost;
    }
    if report.rounded_cost > ratio(16, 9) * &report.lp_cost {
        fail(&mut report.failures, Check::Ratio, format!("ratio {}", PQ(&report.ratio)));
    }
    for l in &trace.levels {
        if !l.mst_bound_holds() {
            fail(&mut report.failures, Check::MstBound, format!("level {}", l.level));
        }
    }
    report.min_density = trace.min_density().cloned();
    report.levels = trace.levels.len();
    report
}

/// Runs all seeds in parallel; results come back ordered by seed.
pub fn run_corpus(seeds: RangeInclusive<u64>, n_range: RangeInclusive<usize>) -> Vec<SeedReport> {
    let seeds: Vec<u64> = seeds.collect();
    seeds.par_iter().map(|&s| run_seed(s, &n_range)).collect()
}

pub const CSV_HEADER: &str = "seed,lp_cost,rounded_cost,ratio,min_density";

pub fn to_csv(reports: &[SeedReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        let md = r.min_density.as_ref().map(|d| PQ(d).to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", r.seed, PQ(&r.lp_cost), PQ(&r.rounded_cost), PQ(&r.ratio), md);
    }
    out
}

/// Outcome of one seed of the single-component corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeReport {
    pub seed: u64,
    pub n: usize,
    pub cost: Rational,
    pub tree_cost: Option<Rational>,
    /// `(forest LP, path forest LP, tree LP)` when the LPs were run.
    pub lp_values: Option<(Rational, Rational, Rational)>,
    pub failures: Vec<Failure>,
}

pub fn single_component_spec(seed: u64, n_range: &RangeInclusive<usize>) -> RandomSpec {
    let span = (n_range.end() - n_range.start() + 1) as u64;
    let n = n_range.start() + (seed % span) as usize;
    RandomSpec { seed, n, edge_density: EDGE_DENSITY, pairs: 2 + (seed / span % 2) as usize }
}

/// Reorients the generated solution into Tree-BCR; with `with_lp`, also compares
/// the Forest-BCR optimum of the star and path representations with the Tree-BCR optimum.
pub fn run_tree_seed(seed: u64, n_range: &RangeInclusive<usize>, with_lp: bool) -> TreeReport {
    let spec = single_component_spec(seed, n_range);
    let mut report = TreeReport { seed, n: spec.n, cost: Rational::zero(), tree_cost: None, lp_values: None, failures: Vec::new() };
    let (inst, sol) = match gen_random_single_component(spec) {
        Ok(v) => v,
        Err(e) => {
            fail(&mut report.failures, Check::Generation, e.to_string());
            return report;
        }
    };
    report.cost = sol.cost(&inst).expect("generated arcs");
    let r0 = default_root(&inst).expect("pairs exist");
    match to_tree_bcr(&sol, &inst, r0) {
        Ok(t) => {
            let terms = inst.terminals();
            let v = verify_tree_bcr(&t, &terms, &inst);
            if !v.is_feasible() {
                fail(&mut report.failures, Check::SteinerTransform, format!("{v:?}"));
            }
            let c = t.cost(&inst).expect("instance arcs");
            if c != report.cost {
                fail(&mut report.failures, Check::SteinerTransform, format!("cost {} != {}", PQ(&c), PQ(&report.cost)));
            }
            report.tree_cost = Some(c);
        }
        Err(e) => fail(&mut report.failures, Check::SteinerTransform, e.to_string()),
    }
    if with_lp {
        let opts = LpOptions::default();
        let star = star_representation(&inst);
        let path = path_representation(&inst);
        let run = || -> Result<(Rational, Rational, Rational), LpError> {
            let a = solve_forest_bcr(&star, opts)?.value;
            let b = solve_forest_bcr(&path, opts)?.value;
            let terms = inst.terminals();
            let t = solve_tree_bcr(&inst, &terms, r0, opts)?.value;
            Ok((a, b, t))
        };
        match run() {
            Ok((a, b, t)) => {
                if a != b || a != t {
                    fail(
                        &mut report.failures,
                        Check::Representations,
                        format!("star {} path {} tree {}", PQ(&a), PQ(&b), PQ(&t)),
                    );
                }
                report.lp_values = Some((a, b, t));
            }
            Err(e) => fail(&mut report.failures, Check::Representations, e.to_string()),
        }
    }
    report
}

pub fn run_tree_corpus(seeds: RangeInclusive<u64>, n_range: RangeInclusive<usize>, with_lp: bool) -> Vec<TreeReport> {
    let seeds: Vec<u64> = seeds.collect();
    seeds.par_iter().map(|&s| run_tree_seed(s, &n_range, with_lp)).collect()
}
