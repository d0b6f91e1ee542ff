use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn genlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genlift"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_json(path: &Path, v: &Value) {
    fs::write(path, serde_json::to_string_pretty(v).unwrap()).unwrap();
}

fn product_config() -> Value {
    json!({
        "y": { "kind": "sturmian", "len": 40000 },
        "joining": { "kind": "product" },
        "checkpoints": [4000, 30000],
        "tolerances": { "pair": 0.1, "x": null }
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn lift_writes_word_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lift.json");
    write_json(&cfg, &product_config());
    let out = dir.path().join("out");
    let res = genlift(&["lift", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));

    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["command"], "lift");
    assert_eq!(report["passed"], true);
    // defaults are filled in
    assert_eq!(report["resolved_config"]["joining"]["nu_depth"], 12);
    assert_eq!(report["resolved_config"]["schedule"]["first_block"], 10);
    let x = fs::read_to_string(out.join("x.txt")).unwrap();
    assert_eq!(x.trim().len() as u64, report["report"]["horizon"].as_u64().unwrap());
    let csv = fs::read_to_string(out.join("distances.csv")).unwrap();
    assert!(csv.starts_with("series,n,value\n"));
    assert!(csv.contains("pair_checkpoint,"));
}

#[test]
fn rerun_from_report_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lift.json");
    let mut c = product_config();
    c["y"] = json!({ "kind": "sample", "measure": { "kind": "Bernoulli", "params": [0.5, 0.5] }, "len": 40000 });
    c["joining"] = json!({ "kind": "diagonal" });
    write_json(&cfg, &c);
    let first = dir.path().join("first");
    let res = genlift(&["lift", "--config", cfg.to_str().unwrap(), "--out", first.to_str().unwrap(), "--seed", "0x2a"]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));

    let second = dir.path().join("second");
    let report = first.join("report.json");
    let res = genlift(&["lift", "--config", report.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    for f in ["x.txt", "report.json", "distances.csv"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }

    let third = dir.path().join("third");
    genlift(&["lift", "--config", cfg.to_str().unwrap(), "--out", third.to_str().unwrap(), "--seed", "43"]);
    assert_ne!(fs::read(first.join("x.txt")).unwrap(), fs::read(third.join("x.txt")).unwrap());
}

#[test]
fn non_mixing_sft_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let sft = dir.path().join("period2.json");
    write_json(&sft, &json!({ "alphabet_size": 2, "transitions": [[0, 1], [1, 0]] }));
    let mut c = product_config();
    c["sft"] = json!("period2.json");
    let cfg = dir.path().join("lift.json");
    write_json(&cfg, &c);
    let res = genlift(&["lift", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err = stderr(&res);
    assert!(err.contains("not mixing"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
}

#[test]
fn zero_tolerance_is_a_tolerance_failure() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = product_config();
    c["tolerances"] = json!({ "pair": 0.0 });
    let cfg = dir.path().join("lift.json");
    write_json(&cfg, &c);
    let out = dir.path().join("o");
    let res = genlift(&["lift", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();
    assert_eq!(genlift(&["lift", "--out", o]).status.code(), Some(1));
    assert_eq!(genlift(&["lift", "--config", "/nonexistent.json", "--out", o]).status.code(), Some(1));
    assert_eq!(genlift(&["bogus"]).status.code(), Some(1));
    assert_eq!(genlift(&["markers", "--seed", "nope"]).status.code(), Some(1));
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"count": 10, "unknown": true}"#).unwrap();
    assert_eq!(genlift(&["markers", "--config", cfg.to_str().unwrap(), "--out", o]).status.code(), Some(1));
    assert_eq!(genlift(&["--help"]).status.code(), Some(0));
}

#[test]
fn markers_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let res = genlift(&["markers", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let csv = fs::read_to_string(out.join("markers.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("series,l,value\n"));
}

#[test]
fn oscillate_and_genericize() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("osc.json");
    write_json(
        &cfg,
        &json!({
            "mu": { "kind": "Bernoulli", "params": [0.5, 0.5] },
            "nu": { "kind": "Bernoulli", "params": [1.0, 0.0] },
            "stages": 4
        }),
    );
    let out = dir.path().join("osc");
    let res = genlift(&["oscillate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    assert_eq!(fs::read_to_string(out.join("averages.csv")).unwrap().lines().count(), 5);

    let x0 = dir.path().join("x0.txt");
    fs::write(&x0, "01".repeat(20_000)).unwrap();
    let cfg = dir.path().join("gen.json");
    write_json(
        &cfg,
        &json!({
            "x0": { "kind": "file", "path": "x0.txt" },
            "checkpoints": [4000, 40000],
            "tolerances": { "distance": 0.2, "agreement": 0.5 }
        }),
    );
    let out = dir.path().join("gen");
    let res = genlift(&["genericize", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["report"]["agreement_ranges"].is_array());
}

#[test]
fn suite_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    let o = o.to_str().unwrap();

    let empty = dir.path().join("empty.json");
    write_json(&empty, &json!({ "runs": [] }));
    let res = genlift(&["suite", "--config", empty.to_str().unwrap(), "--out", o]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"], json!([]));

    let failing = dir.path().join("failing.json");
    write_json(
        &failing,
        &json!({ "runs": [
            { "name": "ok", "command": "markers", "config": { "count": 1000, "tolerance": 0.5 } },
            { "name": "tight", "command": "markers", "seed": 3, "config": { "count": 1000, "tolerance": 0.0 } }
        ]}),
    );
    let res = genlift(&["suite", "--config", failing.to_str().unwrap(), "--out", o]);
    assert_eq!(res.status.code(), Some(2));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], 1);
    assert_eq!(summary["runs"][1]["seed"], 3);
    assert_eq!(summary["runs"][1]["status"], "tolerance_failure");

    let missing = dir.path().join("missing.json");
    write_json(&missing, &json!({ "runs": [{ "name": "no-command" }] }));
    assert_eq!(genlift(&["suite", "--config", missing.to_str().unwrap(), "--out", o]).status.code(), Some(1));
    let nameless = dir.path().join("nameless.json");
    write_json(&nameless, &json!({ "runs": [{ "command": "lift" }] }));
    assert_eq!(genlift(&["suite", "--config", nameless.to_str().unwrap(), "--out", o]).status.code(), Some(1));
    let needs_config = dir.path().join("needs.json");
    write_json(&needs_config, &json!({ "runs": [{ "name": "l", "command": "lift" }] }));
    assert_eq!(genlift(&["suite", "--config", needs_config.to_str().unwrap(), "--out", o]).status.code(), Some(1));
}

#[test]
fn shipped_manifest_parses() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests/acceptance.json");
    let v: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    let names: Vec<&str> = v["runs"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"lift-product") && names.contains(&"genericize"));
}
