use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_homodyne-lab");

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn run_env(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("HOMODYNE_LAB_SEED");
    if let Some(s) = seed_env {
        cmd.env("HOMODYNE_LAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

const SMALL_OPT: &[&str] = &["verify-optimality", "--pure-cases", "6", "--mixed-cases", "2", "--em-trials", "2"];
const SMALL_LOGSOB: &[&str] = &["verify-logsob", "--psi-count", "4", "--derivative-cases", "3", "--appendix-n", "20"];

#[test]
fn sweep_header_and_rows() {
    let o = run(&["sweep", "--energy-min", "0.5", "--energy-max", "2", "--steps", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "E,capacity_nats,upper_bound_nats,alpha_p,alpha_q,delta,gamma");
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[1], "0.5,0,0,0.5,0.5,0.5,0");
    assert!(lines[2].starts_with("1,0.264497094316,0.287682072452,"), "{}", lines[2]);
}

#[test]
fn capacity_in_bits() {
    let o = run(&["capacity", "--energy", "2", "--beta", "0", "--unit", "bits"]);
    assert_eq!(o.status.code(), Some(0));
    let row = stdout(&o).lines().nth(1).unwrap().to_owned();
    assert!(row.starts_with("2,0,2,2,"), "{row}");
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["capacity", "--energy", "0.4"][..],
        &["capacity", "--beta", "-1"],
        &["capacity", "--energy", "abc"],
        &["sweep", "--steps", "1"],
        &["simulate", "--samples", "10"],
        &["verify-logsob", "--workers", "0"],
        &["no-such-command"],
        &["capacity", "--no-such-flag"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(run_env(&["simulate", "--samples", "10000"], Some("x")).status.code(), Some(2));
}

#[test]
fn config_file_sits_between_flags_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"energy": 2, "beta": 0, "seed": 5}"#);
    let sim = write(dir.path(), "s.json", r#"{"seed": 5, "samples": 10000}"#);

    let o = run(&["capacity", "--config", &cfg]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("2,0,1.38629436112,"));
    let o = run(&["capacity", "--config", &cfg, "--energy", "1"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("1,0,0.69314718056,"));

    let seed_of = |o: &Output| json(o)["params"]["seed"].as_u64().unwrap();
    let base = ["simulate", "--samples", "10000"];
    assert_eq!(seed_of(&run_env(&base, None)), 7);
    assert_eq!(seed_of(&run_env(&base, Some("9"))), 9);
    let with_cfg = ["simulate", "--config", &sim];
    assert_eq!(seed_of(&run_env(&with_cfg, Some("9"))), 5);
    let with_flag = ["simulate", "--config", &sim, "--seed", "3"];
    assert_eq!(seed_of(&run_env(&with_flag, Some("9"))), 3);
}

#[test]
fn bad_config_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("unknown.json", r#"{"energy": 1, "bogus": 2}"#),
        ("wrong_type.json", r#"{"energy": "one"}"#),
        ("not_object.json", "[1, 2]"),
        ("broken.json", "{"),
        ("nested.json", r#"{"config": "x.json"}"#),
    ] {
        let cfg = write(dir.path(), name, text);
        assert_eq!(run(&["capacity", "--config", &cfg]).status.code(), Some(2), "{name}");
    }
    assert_eq!(run(&["capacity", "--config", "/nonexistent/c.json"]).status.code(), Some(2));
    // Keys of another subcommand are rejected too.
    let cfg = write(dir.path(), "other.json", r#"{"samples": 10000}"#);
    assert_eq!(run(&["capacity", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn report_shape_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let mut args = SMALL_OPT.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let keys: Vec<_> = r.as_object().unwrap().keys().cloned().collect();
    for k in ["suite", "params", "n_cases", "worst_margin", "violations", "pass", "wall_time_s"] {
        assert!(keys.iter().any(|x| x == k), "missing {k}");
    }
    assert_eq!(r["suite"], "verify-optimality");
    assert_eq!(r["pass"], true);
    assert!(r["wall_time_s"].is_null());
}

#[test]
fn violations_exit_1_with_details() {
    let mut args = SMALL_OPT.to_vec();
    args.extend(["--perturb-delta", "1.2"]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["pass"], false);
    let v = &r["violations"][0];
    for k in ["case_id", "params", "seed", "value", "threshold"] {
        assert!(v.get(k).is_some(), "violation lacks {k}: {v}");
    }

    let mut args = SMALL_LOGSOB.to_vec();
    args.push("--negate-rhs");
    assert_eq!(run(&args).status.code(), Some(1));
    assert_eq!(run(SMALL_LOGSOB).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical() {
    for args in [SMALL_OPT, SMALL_LOGSOB, &["simulate", "--samples", "50000", "--estimator", "both"]] {
        let mut one = args.to_vec();
        one.extend(["--workers", "1"]);
        let mut three = args.to_vec();
        three.extend(["--workers", "3"]);
        let a = run(&one).stdout;
        assert!(!a.is_empty());
        assert_eq!(a, run(&one).stdout, "{args:?}");
        assert_eq!(a, run(&three).stdout, "{args:?}");
    }
}

#[test]
fn timing_flag_fills_wall_time() {
    let o = run(&["simulate", "--samples", "10000", "--timing"]);
    assert!(json(&o)["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn simulate_csv() {
    let o = run(&["simulate", "--samples", "10000", "--runs", "2", "--format", "csv"]);
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "run,seed,estimator,samples,estimate_nats,standard_error_nats,analytic_nats,z_score");
    assert!(lines[1].starts_with("0,7,gaussian-mle,10000,"));
    assert!(lines[2].starts_with("1,8,gaussian-mle,10000,"));
}
