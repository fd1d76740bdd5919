use std::fs;
use std::process::{Command, Output};

fn suppsize(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_suppsize")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_test_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let log = dir.path().join("t.jsonl");
    let wit = dir.path().join("w.json");
    let o = suppsize(&["gen", "--family", "uniform-far", "--m", "2", "--n", "64", "--seed", "4", "--out", inst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(meta["family"], "uniform-far");

    let o = suppsize(&[
        "test", "--instance", inst.to_str().unwrap(), "--m", "2", "--eps", "0.25", "--tester", "nonadaptive",
        "--seed", "1", "--transcript", log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(verdict["verdict"], "reject");
    assert!(verdict["queries"].as_u64().unwrap() > 0);
    fs::write(&wit, verdict["witness"].to_string()).unwrap();

    let o = suppsize(&["verify-witness", "--transcript", log.to_str().unwrap(), "--m", "2", "--witness", wit.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "reject");
    assert_eq!(report["check"]["valid"], true);

    let o = suppsize(&["verify-witness", "--transcript", log.to_str().unwrap(), "--m", "3"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["verdict"], "accept");
}

#[test]
fn campaign_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    let summary = dir.path().join("summary.csv");
    let cfg = dir.path().join("cfg.json");
    let text = serde_json::json!({
        "families": ["point-mass", "uniform-far"],
        "m": [2], "eps": [0.25], "n": [32],
        "testers": ["nonadaptive", "adaptive", "baseline"],
        "seeds": {"base": 0, "count": 3},
        "output": out, "summary": summary,
    });
    fs::write(&cfg, text.to_string()).unwrap();
    let o = suppsize(&["campaign", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(&out).unwrap();
    assert!(rows.starts_with("schema_version,family,"));
    assert_eq!(rows.lines().count(), 1 + 2 * 3 * 3);
    assert_eq!(fs::read_to_string(&summary).unwrap().lines().count(), 1 + 2 * 3);
    let again = suppsize(&["campaign", "--config", cfg.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&out).unwrap(), rows);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(suppsize(&["nonsense"]).status.code(), Some(1));
    assert_eq!(suppsize(&["test", "--m", "2"]).status.code(), Some(1));
    assert_eq!(
        suppsize(&["test", "--instance", "/no/such/file", "--m", "2", "--eps", "0.1", "--tester", "adaptive"]).status.code(),
        Some(1)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"families":[],"m":[2],"eps":[0.1],"n":[8],"testers":["adaptive"],"seeds":{"base":0,"count":1}}"#).unwrap();
    assert_eq!(suppsize(&["campaign", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(suppsize(&["gen", "--family", "dno", "--eps", "0.3"]).status.code(), Some(1));
    assert_eq!(suppsize(&["--help"]).status.code(), Some(0));
}

#[test]
fn validate_bounds_reports_every_check() {
    let o = suppsize(&["validate-bounds", "--trials", "4000", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 55 + 1);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
}
