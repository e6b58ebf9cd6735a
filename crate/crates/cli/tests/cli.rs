use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use l1path::io::InstanceFile;
use l1path::linalg::norm1;
use l1path_cli::PathExport;
use tempfile::TempDir;

fn l1path(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1path"))
        .args(args)
        .env_remove("HOUDINI_TRACE")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_export(p: &Path) -> PathExport {
    PathExport::from_json(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const SCALAR: &str = r#"{"A": [[1.0]], "b": [2.0], "delta": 0.0}"#;
const IDENTITY: &str = r#"{"A": [[1.0, 0.0], [0.0, 1.0]], "b": [3.0, -0.5], "delta": 0.0}"#;

#[test]
fn solve_scalar_two_breakpoints() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "scalar.json", SCALAR);
    let out = dir.path().join("path.json");
    let res = l1path(&["solve", s(&input), "-o", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let export = read_export(&out);
    assert_eq!(export.status, "target_reached");
    assert_eq!(export.breakpoints.len(), 2);
    assert_eq!(export.breakpoints[1].x, vec![2.0]);
    assert_eq!(export.breakpoints[1].y, vec![(0, -1.0)]);
}

#[test]
fn solve_large_delta_single_breakpoint() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "scalar.json", SCALAR);
    let out = dir.path().join("path.json");
    let res = l1path(&["solve", s(&input), "--delta", "2.5", "-o", s(&out)]);
    assert!(res.status.success());
    let export = read_export(&out);
    assert_eq!(export.breakpoints.len(), 1);
    assert_eq!(export.breakpoints[0].x, vec![0.0]);
}

#[test]
fn solve_matrix_market_and_csv() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n");
    let b = write(&dir, "b.txt", "3\n-0.5\n");
    let res = l1path(&["solve", s(&a), "--rhs", s(&b), "--delta", "0", "--format", "csv", "--tol", "1e-8"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,delta,t,nnz(x),nnz(y),objective");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3], "2,0,0.5,2,2,3.5");
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n0\nx\n1\n");
    let b = write(&dir, "b.txt", "1 2\n");
    let res = l1path(&["solve", s(&a), "--rhs", s(&b), "--delta", "0"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("parse error"));

    let good = write(&dir, "good.mtx", "%%MatrixMarket matrix array real general\n1 1\n1\n");
    let res = l1path(&["solve", s(&good), "--rhs", s(&b)]);
    assert_eq!(res.status.code(), Some(2), "missing --delta");

    let bad_json = write(&dir, "bad.json", "{\"A\": [[1.0]], \"b\": ");
    assert_eq!(l1path(&["solve", s(&bad_json)]).status.code(), Some(2));
    assert_eq!(l1path(&["solve"]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_one_with_partial_path() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "id.json", IDENTITY);
    let out = dir.path().join("path.json");
    let res = l1path(&["solve", s(&input), "--max-iters", "1", "-o", s(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("iteration limit"));
    let export = read_export(&out);
    assert_eq!(export.status, "failure");
    assert_eq!(export.breakpoints.len(), 2);
}

#[test]
fn trace_goes_to_stderr() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "id.json", IDENTITY);
    let res = Command::new(env!("CARGO_BIN_EXE_l1path"))
        .args(["solve", s(&input), "-o", s(&dir.path().join("p.json"))])
        .env("HOUDINI_TRACE", "1")
        .output()
        .unwrap();
    assert!(res.status.success());
    let err = String::from_utf8_lossy(&res.stderr);
    assert_eq!(err.lines().filter(|l| l.starts_with("k=")).count(), 2);
}

#[test]
fn plot_is_deterministic_and_rejects_bad_json() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "id.json", IDENTITY);
    let path = dir.path().join("path.json");
    assert!(l1path(&["solve", s(&input), "-o", s(&path)]).status.success());
    let (svg1, svg2) = (dir.path().join("1.svg"), dir.path().join("2.svg"));
    assert!(l1path(&["plot", s(&path), s(&svg1)]).status.success());
    assert!(l1path(&["plot", s(&path), s(&svg2)]).status.success());
    let text = std::fs::read(&svg1).unwrap();
    assert_eq!(text, std::fs::read(&svg2).unwrap());
    assert_eq!(String::from_utf8(text).unwrap().matches("<polyline").count(), 2);

    let bad = write(&dir, "bad.json", "not json");
    let res = l1path(&["plot", s(&bad), s(&dir.path().join("3.svg"))]);
    assert_ne!(res.status.code(), Some(0));
}

#[test]
fn verify_default_suite_passes() {
    let dir = TempDir::new().unwrap();
    let res = l1path(&["verify", "--replay-dir", s(dir.path())]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stdout));
    let table = String::from_utf8(res.stdout).unwrap();
    assert!(table.contains("optimal pairs"));
    assert!(table.lines().skip(1).all(|l| l.trim_end().ends_with(" 0")));
}

#[test]
fn verify_zero_count_is_vacuous() {
    let res = l1path(&["verify", "--count", "0"]);
    assert!(res.status.success());
}

#[test]
fn verify_perturbation_fails_with_replay() {
    let dir = TempDir::new().unwrap();
    let res = l1path(&["verify", "--count", "5", "--seed", "11", "--perturb-y", "--replay-dir", s(dir.path())]);
    assert_eq!(res.status.code(), Some(1));
    let table = String::from_utf8(res.stdout).unwrap();
    let pairs = table.lines().find(|l| l.starts_with("optimal pairs")).unwrap();
    assert!(pairs.trim_end().ends_with(" 5"), "{pairs}");
    let replay = dir.path().join("verify-failure-seed-11.json");
    let file = InstanceFile::from_json(&std::fs::read_to_string(&replay).unwrap()).unwrap();
    assert_eq!(file.seed, Some(11));
    // the replayed instance itself is fine
    let res = l1path(&["verify", "--input", s(&replay), "--replay-dir", s(dir.path())]);
    assert!(res.status.success());
}

#[test]
fn gen_is_reproducible_and_solves_to_x_bar() {
    let dir = TempDir::new().unwrap();
    let (g1, g2) = (dir.path().join("g1.json"), dir.path().join("g2.json"));
    let args = |out: &Path| {
        l1path(&["gen", "-m", "10", "-n", "20", "--sparsity", "3", "--delta", "0.5", "--seed", "42", "-o", s(out)])
    };
    assert!(args(&g1).status.success());
    assert!(args(&g2).status.success());
    assert_eq!(std::fs::read(&g1).unwrap(), std::fs::read(&g2).unwrap());

    let file = InstanceFile::from_json(&std::fs::read_to_string(&g1).unwrap()).unwrap();
    let want = norm1(file.x_bar.as_ref().unwrap());
    let path = dir.path().join("path.json");
    assert!(l1path(&["solve", s(&g1), "-o", s(&path)]).status.success());
    let got = read_export(&path).breakpoints.last().unwrap().objective;
    assert!((got - want).abs() <= 1e-7 * want.max(1.0), "{got} vs {want}");
    assert!(l1path(&["plot", s(&path), s(&dir.path().join("g.svg"))]).status.success());
}

#[test]
fn gen_rejects_excess_sparsity() {
    let res = l1path(&["gen", "-m", "4", "-n", "8", "--sparsity", "5", "--delta", "0.1"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn solve_then_plot_on_generated_instances() {
    let dir = TempDir::new().unwrap();
    for seed in 0..8 {
        let g = dir.path().join(format!("g{seed}.json"));
        let seed = seed.to_string();
        let mut args = vec!["gen", "-m", "8", "-n", "16", "--sparsity", "2", "--delta", "0.2", "--seed", &seed, "-o", s(&g)];
        if seed.parse::<u32>().unwrap() % 2 == 1 {
            args.push("--dense");
        }
        assert!(l1path(&args).status.success());
        let p = dir.path().join("p.json");
        assert!(l1path(&["solve", s(&g), "-o", s(&p)]).status.success());
        assert!(l1path(&["plot", s(&p), s(&dir.path().join("p.svg"))]).status.success());
    }
}
