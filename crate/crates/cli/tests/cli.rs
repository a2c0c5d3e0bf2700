use std::path::PathBuf;
use std::process::{Command, Output};

fn sigroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sigroute")).args(args).output().expect("run sigroute")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("sigroute-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn missing_rate_is_a_usage_error() {
    assert_eq!(sigroute(&["simulate", "--mu", "0.5"]).status.code(), Some(2));
}

#[test]
fn unknown_flag_and_bad_values_are_usage_errors() {
    for args in [
        vec!["simulate", "--lambda", "0.3", "--mu", "0.5", "--frobnicate"],
        vec!["simulate", "--lambda", "0.3", "--mu", "0.5", "--policy", "jsq"],
        vec!["simulate", "--lambda", "1.5", "--mu", "0.5"],
        vec!["simulate", "--lambda", "0.3", "--mu", "0.5", "--cost", "poly:3,-1"],
        vec!["simulate", "--lambda", "0.3", "--mu", "0.5", "--init", "eq:x"],
        vec!["exact", "--lambda", "0.6", "--mu", "0.5", "--convention", "exclusive"],
        vec!["steady", "--lambda", "0.3", "--mu", "0.5", "--format", "xml"],
    ] {
        assert_eq!(sigroute(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn simulate_summary_is_deterministic() {
    let args = ["simulate", "--lambda", "0.3", "--mu", "0.5", "--horizon", "200", "--replications", "20", "--seed", "5"];
    let a = sigroute(&args);
    let b = sigroute(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["schema_version"], "sigroute-summary/1");
    assert_eq!(v["passed"], true);
    assert_eq!(v["replications"], 20);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = scratch("run.toml");
    std::fs::write(&cfg, "lambda = 0.1\nmu = 0.5\nhorizon = 50\nseed = 11\npolicy = \"g0\"\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = json(&sigroute(&["simulate", "--config", cfg]));
    assert_eq!(from_file["policy"], "g0");
    assert_eq!(from_file["horizon"], 50);
    let over = json(&sigroute(&["simulate", "--config", cfg, "--policy", "ghat", "--horizon", "30"]));
    assert_eq!(over["policy"], "ghat");
    assert_eq!(over["horizon"], 30);
    assert_eq!(over["seed"], 11);
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg = scratch("bad.toml");
    std::fs::write(&cfg, "lambda = 0.1\nmu = 0.5\nlamda = 0.2\n").unwrap();
    assert_eq!(sigroute(&["simulate", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn csv_trace_goes_to_out_file() {
    let path = scratch("trace.csv");
    let out = sigroute(&[
        "simulate", "--lambda", "0.3", "--mu", "0.5", "--horizon", "25", "--replications", "2",
        "--format", "csv", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("#schema=sigroute-trace/1"));
    assert!(lines.next().unwrap().starts_with("replication,t,x1,x2"));
    assert_eq!(lines.count(), 50);
    let records = sigroute::harness::output::read_trace_csv(text.as_bytes()).unwrap();
    for rep in 0..2 {
        let trace: Vec<_> = records.iter().filter(|r| r.replication == rep).cloned().collect();
        assert!(sigroute::harness::assert_s_identity(&trace).unwrap().passed());
    }
}

#[test]
fn exact_reports_both_conventions() {
    let v = json(&sigroute(&[
        "exact", "--lambda", "0.1", "--mu", "0.5", "--cost", "zero/square",
        "--init", r#"[[0,0,0,1],[0,0.9,0,0,0,0.1]]"#, "--convention", "both", "--dp",
    ]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 8);
    let cost = |p: &str, c: &str| {
        rows.iter().find(|r| r["policy"] == p && r["convention"] == c).unwrap()["cost"].as_f64().unwrap()
    };
    assert!((cost("ghat", "independent") - 8.26).abs() < 1e-9);
    assert!((cost("gtilde", "independent") - 8.08).abs() < 1e-9);
    assert!((cost("ghat", "exclusive") - 8.48).abs() < 1e-9);
    assert!((cost("gtilde", "exclusive") - 8.28).abs() < 1e-9);
    for c in ["independent", "exclusive"] {
        assert!(cost("centralized", c) <= cost("gtilde", c));
    }
}

#[test]
fn steady_reports_known_g0_cost() {
    let v = json(&sigroute(&["steady", "--lambda", "0.1", "--mu", "0.5"]));
    assert!((v["j_g0"].as_f64().unwrap() - 0.45).abs() < 1e-9);
    assert!(v["j_ghat"].as_f64().unwrap() < 0.45);
}

#[test]
fn compare_runs_each_policy_and_coupling() {
    let v = json(&sigroute(&["compare", "--lambda", "0.3", "--mu", "0.5", "--horizon", "100", "--replications", "50"]));
    let names: Vec<_> = v.as_array().unwrap().iter().map(|r| r["policy"].as_str().unwrap().to_string()).collect();
    assert_eq!(names, ["ghat", "g0", "gtilde"]);

    let v = json(&sigroute(&[
        "compare", "--coupling", "--lambda", "0.3", "--mu", "0.5", "--horizon", "30", "--replications", "2000",
        "--init", r#"[[0,0,0,1],[0,0.9,0,0,0,0.1]]"#, "--checkpoints", "1,5",
    ]));
    assert_eq!(v["tv"].as_array().unwrap().len(), 4);
    assert_eq!(v["steps_checked"], 60_000);
}

#[test]
fn t0_histogram_csv() {
    let out = sigroute(&[
        "t0", "--lambda", "0.1", "--mu", "0.5", "--horizon", "100", "--replications", "200",
        "--init", r#"[[0,0,0,1],[0,0.9,0,0,0,0.1]]"#, "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let total: u64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 200);
}
