use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use towerlab::harness::{
    execute, input_hash, ExperimentKind, Payload, Registry, RunConfig, RunRecord,
};

fn towerlab(registry: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_towerlab"))
        .args(args)
        .env("TOWERLAB_REGISTRY", registry)
        .output()
        .expect("spawn towerlab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn records(registry: &Path) -> Vec<RunRecord> {
    Registry::open(registry)
        .unwrap()
        .records()
        .unwrap()
        .into_iter()
        .map(|(_, r)| r)
        .collect()
}

#[test]
fn limit_checks_reproduce_quantized_masses() {
    let dir = TempDir::new().unwrap();
    let out = towerlab(
        dir.path(),
        &["limit-checks", "-o", "alphas=[2,6,10]", "--json"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let record: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let masses = record["payload"]["data"]["masses"].as_array().unwrap();
    for (m, alpha) in masses.iter().zip([2.0, 6.0, 10.0]) {
        let want = 4.0 * std::f64::consts::PI * alpha;
        let got = m["mass"].as_f64().unwrap();
        assert!((got - want).abs() < 1e-8 * want, "alpha {alpha}: {got}");
    }
    assert_eq!(records(dir.path()).len(), 1);
}

#[test]
fn limit_checks_pass_for_any_seed() {
    let dir = TempDir::new().unwrap();
    for seed in ["0", "7", "10", "123"] {
        let out = towerlab(dir.path(), &["limit-checks", "--seed", seed, "-o", "alphas=[2,6,10,14]"]);
        assert_eq!(out.status.code(), Some(0), "seed {seed}: {}", stdout(&out));
    }
}

#[test]
fn params_table_for_two_bubbles() {
    let dir = TempDir::new().unwrap();
    let csv_dir = dir.path().join("csv");
    let out = towerlab(
        dir.path(),
        &[
            "params",
            "--k",
            "2",
            "--lambda",
            "1e-3",
            "--out",
            csv_dir.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("PASS balance"));
    let csv = fs::read_dir(&csv_dir)
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,i,alpha,log_delta,d,balance"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2], "2");
    assert_eq!(rows[1][2], "6");
    let log_delta2: f64 = rows[1][3].parse().unwrap();
    assert!((log_delta2 - (1e-3f64 / 72.0).ln() / 6.0).abs() < 1e-12);
}

#[test]
fn invalid_config_exits_one_without_a_record() {
    let dir = TempDir::new().unwrap();
    let out = towerlab(dir.path(), &["params", "--lambda", "-1e-3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda"));
    assert!(records(dir.path()).is_empty());

    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        "{\n  \"kind\": \"params\",\n  \"k\": 2,\n  \"lambda\": -0.5\n}\n",
    )
    .unwrap();
    let out = towerlab(dir.path(), &["params", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        towerlab(dir.path(), &["params", "--bogus"]).status.code(),
        Some(1)
    );
    assert_eq!(towerlab(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn wrong_kind_in_config_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("solve.json");
    fs::write(&cfg, r#"{"kind": "solve", "lambda": 1e-3}"#).unwrap();
    let out = towerlab(dir.path(), &["params", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reruns_append() {
    let dir = TempDir::new().unwrap();
    for _ in 0..3 {
        let out = towerlab(dir.path(), &["params", "--lambda", "1e-2"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 3);
    let recs = records(dir.path());
    assert!(recs.windows(2).all(|w| w[0].input_hash == w[1].input_hash));
    assert!(recs.windows(2).all(|w| w[0].payload == w[1].payload));
}

#[test]
fn science_failure_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = towerlab(
        dir.path(),
        &[
            "ansatz", "--k", "3", "--from", "1e-2", "--to", "1e-5", "--points", "4",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", stdout(&out));
    assert!(stdout(&out).contains("FAIL theta_spread_j3"));
    assert_eq!(records(dir.path()).len(), 1);
}

#[test]
fn report_filters_and_summarises() {
    let dir = TempDir::new().unwrap();
    let reg = dir.path().join("reg");
    let reg_s = reg.to_str().unwrap();
    let run = |args: &[&str]| towerlab(&reg, args).status.code();
    assert_eq!(
        run(&[
            "residual-scan",
            "--k",
            "1",
            "--from",
            "1e-2",
            "--to",
            "1e-4",
            "--points",
            "3"
        ]),
        Some(0)
    );
    assert_eq!(
        run(&[
            "residual-scan",
            "--k",
            "2",
            "--from",
            "1e-2",
            "--to",
            "1e-4",
            "--points",
            "3"
        ]),
        Some(0)
    );
    assert_eq!(run(&["params", "--lambda", "1e-3"]), Some(0));
    assert_eq!(
        run(&["ansatz", "--k", "3", "--from", "1e-2", "--to", "1e-5", "--points", "4"]),
        Some(2)
    );

    let out_dir = dir.path().join("report");
    let out = towerlab(
        &reg,
        &[
            "report",
            "--kind",
            "residual-scan",
            "--k",
            "1",
            "--out",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(out_dir.join("residual-scan.csv")).unwrap();
    assert!(csv.starts_with("record,series,p,ln_lambda,ln_norm,ln_reference\n"));
    assert!(csv
        .lines()
        .any(|l| l.starts_with('#') && l.contains("slope series=R p=1 ")));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["records"], 1);
    assert!(summary["warnings"].as_array().unwrap().is_empty());

    let out_dir = dir.path().join("failures");
    let out = towerlab(
        &reg,
        &[
            "report",
            "--verdict",
            "fail",
            "--out",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["records"], 1);
    assert_eq!(summary["by_kind"]["ansatz"]["failed"], 1);
    assert!(out_dir.join("ansatz.csv").exists());
    assert!(!out_dir.join("params.csv").exists());

    let out = towerlab(&reg, &["report", "--registry", reg_s]);
    let text = stdout(&out);
    assert!(text.contains("## params") && text.contains("## residual-scan"));
}

#[test]
fn tampered_record_is_flagged() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        towerlab(dir.path(), &["params", "--lambda", "1e-2"])
            .status
            .code(),
        Some(0)
    );
    let path = fs::read_dir(dir.path())
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let mut json: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    json["config"]["k"] = 2.into();
    fs::write(&path, serde_json::to_string(&json).unwrap()).unwrap();
    let out = towerlab(dir.path(), &["report"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("input hash"));
}

#[test]
fn hash_and_verdicts_are_reproducible() {
    let mut config = RunConfig::new(ExperimentKind::Params);
    config.lambda = Some(1e-3);
    config.k = 3;
    let a = execute(&config).unwrap();
    let b = execute(&config).unwrap();
    assert_eq!(a.input_hash, b.input_hash);
    assert_eq!(
        a.input_hash,
        input_hash(&a.config, &a.thresholds, &a.version)
    );
    assert_eq!(a.payload, b.payload);
    assert_eq!(a.recompute_verdicts(), a.verdicts);

    config.thresholds.insert("balance_abs".into(), 1e-30);
    let c = execute(&config).unwrap();
    assert_ne!(a.input_hash, c.input_hash);
    assert!(matches!(c.payload, Payload::Params(_)));
}
