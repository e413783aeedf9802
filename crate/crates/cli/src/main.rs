use anyhow::{anyhow, bail, Context, Result};
use bcr_core::corpus::{run_corpus, to_csv};
use bcr_core::density::{densest_subgraph, densest_subgraph_bruteforce};
use bcr_core::forest::{check_forest, forest_cost, forest_to_text, parse_forest, ForestVerdict};
use bcr_core::generators::{gen_figure1, gen_gadget, gen_lower_bound, gen_random_halfintegral, RandomSpec, Representation};
use bcr_core::lp::{solve_forest_bcr, solve_tree_bcr, LpError, LpOptions};
use bcr_core::rational::PQ;
use bcr_core::rounding::round;
use bcr_core::solution::{verify_dual, verify_primal, verify_tree_bcr, BcrSolution, DualCertificate, TreeBcrSolution};
use bcr_core::steiner::{default_root, to_tree_bcr};
use bcr_core::Instance;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Forest-BCR toolkit: generate, verify, round and solve.
#[derive(Parser)]
#[command(name = "forest-bcr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write instance, solution and certificate files.
    #[command(subcommand)]
    Gen(Gen),
    /// Check a primal, dual, Tree-BCR or integral solution.
    Verify {
        kind: VerifyKind,
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Round a feasible solution into a Steiner forest.
    Round {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        trace: bool,
    },
    /// Densest subgraph of the undirected projection.
    Density {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        brute_force: bool,
    },
    /// Reorientation into other relaxations.
    #[command(subcommand)]
    Transform(Transform),
    /// Exact LP solver.
    #[command(subcommand)]
    Lp(Lp),
    /// Seeded random corpus with all property audits; writes a CSV report.
    Corpus {
        /// Inclusive seed range `A..B`.
        #[arg(long)]
        seeds: String,
        /// Vertex count `N` or inclusive range `A..B`.
        #[arg(long)]
        n: String,
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Subcommand)]
enum Gen {
    LowerBound {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        with_lp: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    Gadget {
        #[arg(long)]
        rep: Rep,
        #[arg(long)]
        with_lp: bool,
        #[arg(long)]
        with_dual: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    Figure1 {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        pairs: usize,
        #[arg(long, default_value_t = 0.5)]
        edge_density: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Transform {
    Steiner {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Lp {
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        relaxation: Relaxation,
        /// Maximum number of separation rounds.
        #[arg(long, default_value_t = LpOptions::default().max_rounds)]
        cap: usize,
        /// Tree-BCR root (default: smallest terminal label).
        #[arg(long)]
        root: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Files {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Primal,
    Dual,
    Tree,
    Forest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Rep {
    P1,
    P2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Relaxation {
    Forest,
    Tree,
}

/// Exit code 1 with a message.
struct Violation(String);

type Outcome = Result<std::result::Result<(), Violation>>;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::parse(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn solution_path(files: &Files) -> Result<&Path> {
    files.solution.as_deref().ok_or_else(|| anyhow!("--solution is required"))
}

fn load_solution(files: &Files, inst: &Instance) -> Result<BcrSolution> {
    let p = solution_path(files)?;
    BcrSolution::parse(&read(p)?, inst).with_context(|| format!("{}", p.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_range<T: std::str::FromStr>(s: &str) -> Result<RangeInclusive<T>>
where
    T: Clone,
{
    let bad = || anyhow!("expected `N` or `A..B`, got `{s}`");
    match s.split_once("..") {
        Some((a, b)) => Ok(a.trim().parse().map_err(|_| bad())?..=b.trim().parse().map_err(|_| bad())?),
        None => {
            let v: T = s.trim().parse().map_err(|_| bad())?;
            Ok(v.clone()..=v)
        }
    }
}

fn root_of(inst: &Instance, root: &Option<String>) -> Result<usize> {
    match root {
        Some(l) => Ok(inst.require(l)?),
        None => default_root(inst).ok_or_else(|| anyhow!("instance has no terminals")),
    }
}

fn gen(cmd: Gen) -> Outcome {
    match cmd {
        Gen::LowerBound { q, with_lp, out } => {
            let (inst, sol) = gen_lower_bound(q)?;
            let stem = format!("lower-bound-q{q}");
            write(&out.join(format!("{stem}.inst")), &inst.to_text())?;
            if with_lp {
                write(&out.join(format!("{stem}.sol")), &sol.to_text(&inst))?;
                println!("cost {}", PQ(&sol.cost(&inst)?));
            }
        }
        Gen::Gadget { rep, with_lp, with_dual, out } => {
            let (rep, name) = match rep {
                Rep::P1 => (Representation::P1, "p1"),
                Rep::P2 => (Representation::P2, "p2"),
            };
            let (inst, sol, dual) = gen_gadget(rep);
            let stem = format!("gadget-{name}");
            write(&out.join(format!("{stem}.inst")), &inst.to_text())?;
            if with_lp {
                write(&out.join(format!("{stem}.sol")), &sol.to_text(&inst))?;
                println!("cost {}", PQ(&sol.cost(&inst)?));
            }
            if with_dual {
                write(&out.join(format!("{stem}.cert")), &dual.to_text(&inst))?;
                println!("dual value {}", PQ(&dual.value()));
            }
        }
        Gen::Figure1 { out } => {
            let (inst, sol) = gen_figure1();
            write(&out.join("figure1.inst"), &inst.to_text())?;
            write(&out.join("figure1.sol"), &sol.to_text(&inst))?;
        }
        Gen::Random { seed, n, pairs, edge_density, out } => {
            let (inst, sol) = gen_random_halfintegral(RandomSpec { seed, n, edge_density, pairs })?;
            let stem = format!("random-s{seed}-n{n}");
            write(&out.join(format!("{stem}.inst")), &inst.to_text())?;
            write(&out.join(format!("{stem}.sol")), &sol.to_text(&inst))?;
        }
    }
    Ok(Ok(()))
}

fn verify(kind: VerifyKind, files: &Files, certificate: &Option<PathBuf>) -> Outcome {
    let inst = load_instance(&files.instance)?;
    match kind {
        VerifyKind::Primal => {
            let sol = load_solution(files, &inst)?;
            let v = verify_primal(&sol, &inst);
            if !v.is_feasible() {
                return Ok(Err(Violation(v.describe(&inst))));
            }
            println!("feasible");
            println!("cost {}", PQ(&sol.cost(&inst)?));
        }
        VerifyKind::Dual => {
            let p = certificate.as_deref().ok_or_else(|| anyhow!("--certificate is required"))?;
            let cert = DualCertificate::parse(&read(p)?, &inst).with_context(|| format!("{}", p.display()))?;
            let v = verify_dual(&cert, &inst);
            if !v.is_feasible() {
                return Ok(Err(Violation(v.describe(&inst))));
            }
            println!("feasible");
            println!("value {}", PQ(&cert.value()));
            if files.solution.is_some() {
                let sol = load_solution(files, &inst)?;
                let pv = verify_primal(&sol, &inst);
                if !pv.is_feasible() {
                    return Ok(Err(Violation(format!("primal: {}", pv.describe(&inst)))));
                }
                println!("primal cost {}", PQ(&sol.cost(&inst)?));
            }
        }
        VerifyKind::Tree => {
            let p = solution_path(files)?;
            let sol = TreeBcrSolution::parse(&read(p)?, &inst).with_context(|| format!("{}", p.display()))?;
            let v = verify_tree_bcr(&sol, &inst.terminals(), &inst);
            if !v.is_feasible() {
                return Ok(Err(Violation(v.describe(&inst))));
            }
            println!("feasible");
            println!("cost {}", PQ(&sol.cost(&inst)?));
        }
        VerifyKind::Forest => {
            let p = solution_path(files)?;
            let edges = parse_forest(&read(p)?, &inst)?;
            match check_forest(&edges, &inst)? {
                ForestVerdict::Feasible => {
                    println!("feasible");
                    println!("cost {}", PQ(&forest_cost(&edges, &inst)?));
                }
                ForestVerdict::UnconnectedPair(s, t) => {
                    return Ok(Err(Violation(format!("pair {{{},{}}} is not connected", inst.label(s), inst.label(t)))));
                }
            }
        }
    }
    Ok(Ok(()))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen(g) => gen(g),
        Command::Verify { kind, files, certificate } => verify(kind, &files, &certificate),
        Command::Round { files, trace } => {
            let inst = load_instance(&files.instance)?;
            let sol = load_solution(&files, &inst)?;
            let v = verify_primal(&sol, &inst);
            if !v.is_feasible() {
                return Ok(Err(Violation(v.describe(&inst))));
            }
            let (forest, tr) = round(&sol, &inst)?;
            if trace {
                print!("{}", tr.to_text(&inst));
            }
            print!("{}", forest_to_text(&forest, &inst));
            let lp = sol.cost(&inst)?;
            println!("cost {}", PQ(&tr.total_cost));
            println!("lp cost {}", PQ(&lp));
            Ok(Ok(()))
        }
        Command::Density { files, brute_force } => {
            let inst = load_instance(&files.instance)?;
            let sol = load_solution(&files, &inst)?;
            let best = if brute_force { densest_subgraph_bruteforce(&sol, &inst)? } else { densest_subgraph(&sol, &inst)? };
            println!("set {}", inst.set_label(best.set.iter().copied()));
            println!("density {}", PQ(&best.density));
            Ok(Ok(()))
        }
        Command::Transform(Transform::Steiner { files, root, out }) => {
            let inst = load_instance(&files.instance)?;
            let sol = load_solution(&files, &inst)?;
            let v = verify_primal(&sol, &inst);
            if !v.is_feasible() {
                return Ok(Err(Violation(v.describe(&inst))));
            }
            let r0 = root_of(&inst, &root)?;
            let tree = to_tree_bcr(&sol, &inst, r0)?;
            emit(&out, &tree.to_text(&inst))?;
            println!("cost {}", PQ(&tree.cost(&inst)?));
            Ok(Ok(()))
        }
        Command::Lp(Lp::Solve { instance, relaxation, cap, root, out }) => {
            let inst = load_instance(&instance)?;
            let opts = LpOptions { max_rounds: cap, ..LpOptions::default() };
            let res = match relaxation {
                Relaxation::Forest => solve_forest_bcr(&inst, opts).map(|r| (r.value, r.solution.to_text(&inst), r.stats)),
                Relaxation::Tree => {
                    let r0 = root_of(&inst, &root)?;
                    solve_tree_bcr(&inst, &inst.terminals(), r0, opts).map(|r| (r.value, r.solution.to_text(&inst), r.stats))
                }
            };
            match res {
                Ok((value, text, stats)) => {
                    emit(&out, &text)?;
                    println!("value {}", PQ(&value));
                    println!("rounds {} cuts {} pivots {}", stats.rounds, stats.cuts, stats.pivots);
                    Ok(Ok(()))
                }
                Err(LpError::IterationCapExceeded { rounds, bound, solution }) => {
                    emit(&out, &solution.to_text(&inst))?;
                    Ok(Err(Violation(format!("not final after {rounds} rounds; lower bound {}", PQ(&bound)))))
                }
                Err(LpError::Infeasible) => Ok(Err(Violation("relaxation is infeasible".into()))),
                Err(e) => Err(e.into()),
            }
        }
        Command::Corpus { seeds, n, report } => {
            let seeds: RangeInclusive<u64> = parse_range(&seeds)?;
            let n: RangeInclusive<usize> = parse_range(&n)?;
            if *n.start() < 4 || n.start() > n.end() {
                bail!("vertex counts must be at least 4");
            }
            let reports = run_corpus(seeds, n);
            write(&report, &to_csv(&reports))?;
            let failed: Vec<_> = reports.iter().filter(|r| !r.failures.is_empty()).collect();
            println!("{} seeds, {} with failures", reports.len(), failed.len());
            if let Some(r) = failed.first() {
                let f = &r.failures[0];
                return Ok(Err(Violation(format!("seed {}: {:?}: {}", r.seed, f.check, f.message))));
            }
            Ok(Ok(()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Violation(msg))) => {
            println!("infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
