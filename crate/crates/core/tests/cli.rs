//! Exit codes, artifacts and messages of the command-line tool.

use std::path::Path;
use std::process::{Command, Output};

fn splitfeas(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitfeas"))
        .args(args)
        .env_remove("SPLITFEAS_SEED")
        .output()
        .expect("binary runs")
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> String {
    let out = path(dir, name);
    let mut args = vec!["generate", "--n", "8", "--m", "8", "--set-c", "ball", "--set-q", "box", "--consistent", "--seed", "7", "--out", &out];
    args.extend_from_slice(extra);
    let o = splitfeas(&args);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    out
}

#[test]
fn generate_prints_zero_witness_residuals_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.json", &[]);
    let b = generate(dir.path(), "b.json", &[]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    let o = splitfeas(&["generate", "--n", "20", "--m", "15", "--set-c", "ball", "--set-q", "box", "--consistent", "--seed", "7", "--out", &path(dir.path(), "c.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(text(&o).contains("residual"), "{}", text(&o));
}

#[test]
fn requirement_report_for_the_linearized_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "p.json");
    let o = splitfeas(&["generate", "--n", "2", "--m", "2", "--set-c", "ball", "--set-q", "box", "--spectrum", "1.2,1.0", "--require", "alg7", "--seed", "1", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("κ(AᵀA) 1.44"), "{}", text(&o));
}

#[test]
fn cq_solve_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    let trace = path(dir.path(), "t.csv");
    let o = splitfeas(&["solve", "--problem", &p, "--algorithm", "cq", "--trace-out", &trace, "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let csv = std::fs::read_to_string(&trace).unwrap();
    let rows = splitfeas::problems::parse_trace_csv(&csv).unwrap();
    let last = rows.last().unwrap();
    assert!(last.residual_c.max(last.residual_q) <= 1e-8);
}

#[test]
fn ill_conditioned_linearized_run_is_a_requirement_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &["--spectrum", "3,2,2,2,2,2,2,1"]);
    let trace = path(dir.path(), "t.csv");
    let args = ["solve", "--problem", &p, "--algorithm", "wpadmm-lin", "--trace-out", &trace];
    let o = splitfeas(&args);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("κ(AᵀA) < 2"), "{}", text(&o));
    let mut with_override = args.to_vec();
    with_override.push("--override");
    let o = splitfeas(&with_override);
    assert_ne!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn proximal_admm_prints_experimental_banner() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    let trace = path(dir.path(), "t.csv");
    let o = splitfeas(&["solve", "--problem", &p, "--algorithm", "padmm-sf1", "--trace-out", &trace]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("experimental: convergence Unknown"));
}

#[test]
fn certify_cq_and_wpadmm_traces() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    for (alg, expected) in [("cq", vec!["C1", "C2", "C3"]), ("wpadmm-prox", vec!["LagrangianDecrease", "MultiplierIdentity"])] {
        let trace = path(dir.path(), &format!("{alg}.csv"));
        let o = splitfeas(&["solve", "--problem", &p, "--algorithm", alg, "--trace-out", &trace, "--full-trace"]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o));
        let json = trace.replace(".csv", ".json");
        let o = splitfeas(&["certify", "--trace", &json, "--problem", &p]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o));
        let report = std::fs::read_to_string(trace.replace(".csv", ".cert.json")).unwrap();
        for name in expected {
            assert!(report.contains(name), "{alg}: {name} missing");
        }
    }
}

#[test]
fn certify_rejects_a_corrupted_trace_with_its_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    let trace = path(dir.path(), "t.csv");
    splitfeas(&["solve", "--problem", &p, "--algorithm", "cq", "--trace-out", &trace, "--full-trace"]);
    let json = trace.replace(".csv", ".json");
    let mut body = std::fs::read_to_string(&json).unwrap();
    body.truncate(body.len() / 2);
    std::fs::write(&json, body).unwrap();
    let o = splitfeas(&["certify", "--trace", &json, "--problem", &p]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o).contains("line"), "{}", text(&o));
}

#[test]
fn certify_rejects_a_trace_of_another_problem() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    let other = path(dir.path(), "q.json");
    splitfeas(&["generate", "--n", "8", "--m", "8", "--set-c", "ball", "--set-q", "box", "--seed", "8", "--out", &other]);
    let trace = path(dir.path(), "t.csv");
    splitfeas(&["solve", "--problem", &p, "--algorithm", "cq", "--trace-out", &trace, "--full-trace"]);
    let o = splitfeas(&["certify", "--trace", &trace.replace(".csv", ".json"), "--problem", &other]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
}

#[test]
fn sweep_writes_one_trace_per_cell_and_marks_experimental() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    let out = path(dir.path(), "sweep");
    let o = splitfeas(&["sweep", "--problem", &p, "--algorithms", "cq,pg-sf3", "--grid", "tau=2,3,4", "--out-dir", &out, "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let traces = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("cell_"))
        .count();
    assert_eq!(traces, 6);
    let summary = std::fs::read_to_string(format!("{out}/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 7);

    let out2 = path(dir.path(), "sweep2");
    splitfeas(&["sweep", "--problem", &p, "--algorithms", "padmm-sf1", "--out-dir", &out2]);
    let summary = std::fs::read_to_string(format!("{out2}/summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().contains("true"), "{summary}");
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate(dir.path(), "p.json", &[]);
    let trace = path(dir.path(), "t.csv");
    splitfeas(&["solve", "--problem", &p, "--algorithm", "cq", "--trace-out", &trace]);
    let svg = path(dir.path(), "t.svg");
    let o = splitfeas(&["plot", "--trace", &trace, "--out", &svg]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(std::fs::read_to_string(svg).unwrap().starts_with("<svg"));
}

#[test]
fn operational_errors_exit_one() {
    let o = splitfeas(&["solve", "--problem", "/nonexistent.json", "--algorithm", "cq", "--trace-out", "/tmp/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let o = splitfeas(&["solve", "--algorithm", "nope"]);
    assert_eq!(o.status.code(), Some(1));
}
