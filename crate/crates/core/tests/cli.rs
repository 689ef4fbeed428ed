use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use varinf::cli::{run, run_with_operator, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};
use varinf::exponent::ExponentField;
use varinf::grid::{GridFunction, Node};
use varinf::io::{load_config, read_solution_csv};
use varinf::operator::{full_operator_discrete_with, Probe, SchemeOptions, SmoothProbe};

fn problem(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("problems")
        .join(name)
        .display()
        .to_string()
}

fn varinf(args: &[&str]) -> i32 {
    let mut all = vec!["varinf"];
    all.extend_from_slice(args);
    run(all)
}

fn report(dir: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn solve_affine_demo() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(varinf(&["solve", "--config", &problem("affine.json"), "--out", o]), EXIT_OK);
    for f in ["solution.csv", "solution.pgm", "report.json"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    let r = report(out.path());
    let tol = r["provenance"]["tolerances"]["residual_tol"].as_f64().unwrap();
    assert!(r["result"]["residual_sup"].as_f64().unwrap() <= tol);
    assert!(r["result"]["solve"]["converged"].as_bool().unwrap());
    assert_eq!(r["provenance"]["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_aronsson_matches_closed_form() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let cfg = problem("aronsson.json");
    assert_eq!(varinf(&["solve", "--config", &cfg, "--out", o]), EXIT_OK);
    let loaded = load_config(Path::new(&cfg)).unwrap();
    let d = loaded.config.build_domain().unwrap();
    let u = read_solution_csv(&out.path().join("solution.csv"), &d).unwrap();
    let err = d
        .interior()
        .iter()
        .fold(0.0f64, |m, &i| m.max((u.get(i) - Probe::Aronsson.value(d.position(i))).abs()));
    // documented in problems/README.md
    assert!(err <= 5e-4, "{err}");
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(varinf(&["solve", "--config", "no/such/file.json", "--out", o]), EXIT_USAGE);
    assert_eq!(varinf(&["solve", "--out", o]), EXIT_USAGE);
    assert_eq!(varinf(&["solve", "--scheme", "bogus"]), EXIT_USAGE);
    assert_eq!(varinf(&["--help"]), EXIT_OK);
}

#[test]
fn non_convergence_exits_three_with_report() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.json");
    std::fs::write(
        &cfg,
        r#"{ "domain": {"nx": 17, "ny": 17, "h": 0.0625},
             "boundary": {"kind": "expression", "expr": "x * y"},
             "exponent": {"family": "constant", "value": 2},
             "tolerances": {"max_iters": 3} }"#,
    )
    .unwrap();
    assert_eq!(varinf(&["solve", "--config", cfg.to_str().unwrap(), "--out", o]), EXIT_NUMERICAL);
    let r = report(out.path());
    assert_eq!(r["result"]["solve"]["converged"], Value::Bool(false));
    assert!(out.path().join("solution.csv").exists());
}

#[test]
fn sandwich_runs() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let cfg = problem("sandwich.json");
    assert_eq!(varinf(&["sandwich", "--config", &cfg, "--eps", "0.2,0.1,0.05", "--out", o]), EXIT_OK);
    let r = report(out.path());
    let rows = r["result"]["rows"].as_array().unwrap();
    let diffs: Vec<f64> = rows.iter().map(|x| x["diff_sup"].as_f64().unwrap()).collect();
    assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    let csv = std::fs::read_to_string(out.path().join("sandwich.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);

    assert_eq!(varinf(&["sandwich", "--config", &cfg, "--eps", "0.1", "--out", o]), EXIT_OK);
    assert_eq!(report(out.path())["result"]["kappa"], Value::Null);

    assert_eq!(varinf(&["sandwich", "--config", &cfg, "--eps", "1.5,0.1", "--out", o]), EXIT_USAGE);
}

#[test]
fn triple_and_harnack_run() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(
        varinf(&["triple", "--config", &problem("sandwich.json"), "--eps", "0.2", "--kmax", "24", "--out", o]),
        EXIT_OK
    );
    assert!(out.path().join("upper.csv").exists());
    assert_eq!(report(out.path())["result"]["ordering_ok"], Value::Bool(true));

    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(varinf(&["harnack", "--config", &problem("harnack.json"), "--out", o]), EXIT_OK);
    let csv = std::fs::read_to_string(out.path().join("harnack.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn convergence_reports_orders() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    assert_eq!(varinf(&["convergence", "--out", o]), EXIT_OK);
    let r = report(out.path());
    for entry in r["result"].as_array().unwrap() {
        assert!(entry["report"]["full_order"]["order"].as_f64().unwrap() >= 1.0);
    }
}

#[test]
fn verify_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "verify".to_string(),
            "--seed".into(),
            "42".into(),
            "--cases".into(),
            "20000".into(),
            "--out".into(),
            d.display().to_string(),
        ]
    };
    let run_in = |d: &Path| {
        let mut v = vec!["varinf".to_string()];
        v.extend(args(d));
        run(v)
    };
    assert_eq!(run_in(a.path()), EXIT_OK);
    assert_eq!(run_in(b.path()), EXIT_OK);
    let ra = std::fs::read(a.path().join("report.json")).unwrap();
    let rb = std::fs::read(b.path().join("report.json")).unwrap();
    assert_eq!(ra, rb);
    assert_eq!(report(a.path())["result"]["passed"], Value::Bool(true));
}

#[test]
fn verify_detects_a_faulty_operator() {
    // drops the log term's sign
    let faulty = |u: &GridFunction, node: Node, field: &ExponentField, opts: &SchemeOptions| {
        let full = full_operator_discrete_with(u, node, field, opts)?;
        let normalized = varinf::operator::normalized_inf_discrete_with(u, node, opts)?;
        Ok(2.0 * normalized - full + 1e-3)
    };
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let code = run_with_operator(["varinf", "verify", "--cases", "1000", "--out", o], &faulty);
    assert_eq!(code, EXIT_NUMERICAL);
    let r = report(out.path());
    let failed: Vec<&str> = r["result"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failed.contains(&"operator-reduction"), "{failed:?}");
    assert!(failed.contains(&"operator-consistency"), "{failed:?}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_varinf");
    let out = tempfile::tempdir().unwrap();
    let status = Command::new(bin)
        .args(["solve", "--config", "missing.json", "--out"])
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    assert!(String::from_utf8_lossy(&status.stderr).contains("missing.json"));
    let status = Command::new(bin).arg("--version").output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
}
