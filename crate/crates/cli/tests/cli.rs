use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forest-bcr"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("forest-bcr-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn p(dir: &Path, f: &str) -> String {
    dir.join(f).to_string_lossy().into_owned()
}

#[test]
fn gadget_dual_prints_exact_value() {
    let d = scratch("gadget");
    let out = d.to_string_lossy().into_owned();
    for (rep, value) in [("p1", "12/1"), ("p2", "13/1")] {
        assert!(run(&["gen", "gadget", "--rep", rep, "--with-lp", "--with-dual", "--out", &out]).status.success());
        let inst = p(&d, &format!("gadget-{rep}.inst"));
        let o = run(&["verify", "dual", "--instance", &inst, "--certificate", &p(&d, &format!("gadget-{rep}.cert"))]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(&format!("value {value}")));
        let o = run(&["verify", "primal", "--instance", &inst, "--solution", &p(&d, &format!("gadget-{rep}.sol"))]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(&format!("cost {value}")));
    }
}

#[test]
fn generated_files_reverify() {
    let d = scratch("roundtrip");
    let out = d.to_string_lossy().into_owned();
    assert!(run(&["gen", "lower-bound", "--q", "3", "--with-lp", "--out", &out]).status.success());
    assert!(run(&["gen", "figure1", "--out", &out]).status.success());
    assert!(run(&["gen", "random", "--seed", "42", "--n", "8", "--pairs", "3", "--out", &out]).status.success());
    for stem in ["lower-bound-q3", "figure1", "random-s42-n8"] {
        let o = run(&["verify", "primal", "--instance", &p(&d, &format!("{stem}.inst")), "--solution", &p(&d, &format!("{stem}.sol"))]);
        assert_eq!(o.status.code(), Some(0), "{stem}: {}", stdout(&o));
    }
    let first = std::fs::read(d.join("random-s42-n8.inst")).unwrap();
    assert!(run(&["gen", "random", "--seed", "42", "--n", "8", "--pairs", "3", "--out", &out]).status.success());
    assert_eq!(std::fs::read(d.join("random-s42-n8.inst")).unwrap(), first);
}

#[test]
fn round_figure1_and_check_forest() {
    let d = scratch("round");
    let out = d.to_string_lossy().into_owned();
    assert!(run(&["gen", "figure1", "--out", &out]).status.success());
    let (inst, sol) = (p(&d, "figure1.inst"), p(&d, "figure1.sol"));
    let o = run(&["round", "--instance", &inst, "--solution", &sol]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("cost "));
    let forest: String = text.lines().filter(|l| l.starts_with("edge ")).map(|l| format!("{l}\n")).collect();
    std::fs::write(d.join("forest.txt"), forest).unwrap();
    let o = run(&["verify", "forest", "--instance", &inst, "--solution", &p(&d, "forest.txt")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn empty_solution_exits_one_with_witness() {
    let d = scratch("empty");
    let out = d.to_string_lossy().into_owned();
    assert!(run(&["gen", "figure1", "--out", &out]).status.success());
    std::fs::write(d.join("empty.sol"), "").unwrap();
    let o = run(&["verify", "primal", "--instance", &p(&d, "figure1.inst"), "--solution", &p(&d, "empty.sol")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("infeasible: "));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "primal"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "primal", "--instance", "/nonexistent/file"]).status.code(), Some(2));
}

#[test]
fn lp_tree_and_transform() {
    let d = scratch("lp");
    std::fs::write(d.join("tri.inst"), "vertices a b c\nedge a b 1\nedge b c 1\nedge a c 1\npair a b\npair b c\n").unwrap();
    let inst = p(&d, "tri.inst");
    let o = run(&["lp", "solve", "--instance", &inst, "--relaxation", "tree", "--out", &p(&d, "tree.sol")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("value 2/1"));
    let o = run(&["verify", "tree", "--instance", &inst, "--solution", &p(&d, "tree.sol")]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["lp", "solve", "--instance", &inst, "--relaxation", "forest", "--out", &p(&d, "forest.sol")]);
    assert!(stdout(&o).contains("value 2/1"));
    let o = run(&["transform", "steiner", "--instance", &inst, "--solution", &p(&d, "forest.sol"), "--out", &p(&d, "t.sol")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("cost 2/1"));
    assert_eq!(run(&["verify", "tree", "--instance", &inst, "--solution", &p(&d, "t.sol")]).status.code(), Some(0));
}

#[test]
fn corpus_writes_csv() {
    let d = scratch("corpus");
    let report = p(&d, "r.csv");
    let o = run(&["corpus", "--seeds", "0..4", "--n", "6..8", "--report", &report]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&report).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "seed,lp_cost,rounded_cost,ratio,min_density");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.split(',').skip(1).all(|f| f.contains('/'))));
}
