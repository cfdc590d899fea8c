//! End-to-end runs of the binary: exit codes, file layout, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plap-limit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn plap-limit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const OBSTACLE_CFG: &str = r#"{
  "problem": {
    "kind": "flat",
    "a": 0.0,
    "b": 3.0,
    "f": {"domain": [0.0, 3.0], "breaks": [1.0, 1.5, 2.0], "coeffs": [[0.0], [1.0], [-1.0], [0.0]]},
    "obstacle": {"domain": [0.0, 3.0], "breaks": [], "coeffs": [[0.0]]},
    "bc": [0.0, 0.0]
  },
  "p_list": [4.0, 8.0, 12.0],
  "n_nodes": 201,
  "tol": 1e-6
}"#;

#[test]
fn verify_example_converges_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    let mut args = vec!["verify-example", "1", "--p", "4,8", "--nodes", "201", "--tol", "1e-6"];
    let o1 = run(&[args.clone(), vec!["--out", out1.to_str().unwrap()]].concat());
    assert_eq!(code(&o1), 0, "stderr: {}", stderr(&o1));
    assert!(stdout(&o1).contains("strictly decreasing"));
    args.extend(["--out", out2.to_str().unwrap()]);
    let o2 = run(&args);
    assert_eq!(code(&o2), 0);
    let a = std::fs::read(out1.join("convergence.csv")).unwrap();
    let b = std::fs::read(out2.join("convergence.csv")).unwrap();
    assert_eq!(a, b, "reruns must be byte-identical");
}

#[test]
fn limit_prints_the_example_pieces() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&["limit", "--example", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("slope +1"), "{text}");
    assert!(text.contains("slope -1"), "{text}");
    assert!(text.contains("obstacle"), "{text}");
    let csv = std::fs::read_to_string(out.join("limit.csv")).unwrap();
    assert!(csv.starts_with("x,U\n"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("limit.json")).unwrap()).unwrap();
    assert!(json.get("pieces").is_some());
}

#[test]
fn empty_p_list_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "cfg.json", r#"{"example": 1, "p_list": []}"#);
    let o = run(&["sweep", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn malformed_config_points_at_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "cfg.json", "{\n  \"example\": 1,\n  \"p_lost\": [4]\n}");
    let o = run(&["sweep", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("cfg.json:3:"), "{err}");
}

#[test]
fn solve_writes_the_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "solve", "--example", "2", "--p", "8", "--nodes", "201", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("solution_p8.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,u"));
    assert_eq!(csv.lines().count(), 202);
    assert!(lines.next().unwrap().starts_with("0,"));
}

#[test]
fn unknown_example_is_refused() {
    let o = run(&["limit", "--example", "9"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_and_double_sources_are_refused() {
    let o = run(&["sweep"]);
    assert_eq!(code(&o), 2);
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "cfg.json", OBSTACLE_CFG);
    let both = run(&["sweep", "--config", &cfg, "--example", "1"]);
    assert_eq!(code(&both), 2);
}

#[test]
fn svg_overlay_is_emitted() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "verify-example", "2", "--p", "4,8", "--nodes", "201", "--tol", "1e-6", "--svg",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let svg = std::fs::read_to_string(out.join("overlay.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn report_emits_all_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_cfg(tmp.path(), "cfg.json", OBSTACLE_CFG);
    let o = run(&["report", "--config", &cfg, "--svg", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    for name in [
        "convergence.csv",
        "solution_p4.csv",
        "solution_p8.csv",
        "solution_p12.csv",
        "limit.csv",
        "limit.json",
        "overlay.svg",
    ] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let conv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(conv.starts_with("p,sup_dist,gamma_lo,gamma_hi,ls_lower,ls_upper,max_slope\n"));
    assert_eq!(conv.lines().count(), 4);
}

#[test]
fn oversized_p_fails_with_the_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(&[
        "solve", "--example", "2", "--p", "200", "--nodes", "101", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("128"), "{}", stderr(&o));
}

#[test]
fn steep_dirichlet_config_falls_back_to_the_affine_connector() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_cfg(
        tmp.path(),
        "cfg.json",
        r#"{
          "problem": {
            "kind": "flat",
            "a": 0.0,
            "b": 1.0,
            "f": {"domain": [0.0, 1.0], "breaks": [], "coeffs": [[0.5]]},
            "obstacle": null,
            "bc": [0.0, 1.5]
          }
        }"#,
    );
    let o = run(&["limit", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    assert!(stdout(&o).contains("slope +1.5"), "{}", stdout(&o));
}

#[test]
fn radial_config_tabulates_the_contact_set() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_cfg(
        tmp.path(),
        "cfg.json",
        r#"{
          "problem": {
            "kind": "radial",
            "n": 2,
            "r1": 0.0,
            "r2": 2.0,
            "g": {"domain": [0.0, 2.0], "breaks": [], "coeffs": [[0.0]]},
            "obstacle": {"domain": [0.0, 2.0], "breaks": [], "coeffs": [[1.0, 0.0, -1.0]]}
          },
          "p_list": [4.0, 8.0, 12.0],
          "n_nodes": 201,
          "tol": 1e-6
        }"#,
    );
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "stderr: {}", stderr(&o));
    let conv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let last = conv.lines().last().unwrap();
    let cells: Vec<&str> = last.split(',').collect();
    assert_eq!(cells.len(), 7);
    assert!(!cells[2].is_empty() && !cells[3].is_empty(), "gamma cells empty: {last}");
    let hi: f64 = cells[3].parse().unwrap();
    assert!(hi > 0.2 && hi < 0.45, "contact endpoint {hi} far from 2 - sqrt(3)");
}

#[test]
fn obstacle_config_with_nonzero_boundary_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "cfg.json",
        r#"{
          "problem": {
            "kind": "flat",
            "a": 0.0,
            "b": 1.0,
            "f": {"domain": [0.0, 1.0], "breaks": [], "coeffs": [[0.0]]},
            "obstacle": {"domain": [0.0, 1.0], "breaks": [], "coeffs": [[-1.0]]},
            "bc": [0.0, 0.5]
          }
        }"#,
    );
    let o = run(&["limit", "--config", &cfg]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("zero boundary"), "{}", stderr(&o));
}
