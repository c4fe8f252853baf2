use std::path::Path;
use std::process::{Command, Output};

use serde_json::json;

fn tsadbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsadbench"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn write_synth(dir: &Path) {
    let cfg = json!({
        "name": "mini",
        "k_delay": 2,
        "curves": [
            {"id": "a", "length": 400, "seed": 1, "components": [{"period": 40.0, "amplitude": 1.0}], "noise_std": 0.1,
             "anomalies": [{"kind": "global", "count": 2}]},
            {"id": "b", "length": 400, "seed": 2, "components": [{"period": 40.0, "amplitude": 1.0}], "noise_std": 0.1,
             "anomalies": [{"kind": "shapelet", "count": 1, "min_len": 10, "max_len": 20}]}
        ]
    });
    std::fs::write(dir.join("synth.json"), cfg.to_string()).unwrap();
    let out = tsadbench(&["gen", "-c", "synth.json", "-o", "data"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn write_run_config(dir: &Path) {
    let cfg = json!({
        "datasets": ["data"],
        "detectors": [{"builtin": {"kind": "first_diff"}}, {"builtin": {"kind": "ar", "window": 8}}],
        "criteria": ["event_wise_pa", "reduced_length_pa:k=dataset"],
        "output_dir": "out"
    });
    std::fs::write(dir.join("run.json"), cfg.to_string()).unwrap();
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(tsadbench(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(tsadbench(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(tsadbench(&["run"], dir.path()).status.code(), Some(1));
}

#[test]
fn config_and_dataset_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), "{\"datasets\": []").unwrap();
    assert_eq!(tsadbench(&["run", "-c", "bad.json", "-o", "out"], d).status.code(), Some(1));
    assert_eq!(tsadbench(&["run", "-c", "missing.json", "-o", "out"], d).status.code(), Some(1));

    let cfg = json!({"datasets": ["nowhere"], "detectors": [{"builtin": {"kind": "first_diff"}}]});
    std::fs::write(d.join("run.json"), cfg.to_string()).unwrap();
    assert_eq!(tsadbench(&["run", "-c", "run.json", "-o", "out"], d).status.code(), Some(2));
    assert_eq!(tsadbench(&["split", "-d", "nowhere"], d).status.code(), Some(2));
    assert_eq!(tsadbench(&["run", "-c", "run.json", "--k-delay", "x=-1"], d).status.code(), Some(1));
}

#[test]
fn run_report_and_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_synth(d);
    write_run_config(d);
    let out = tsadbench(&["run", "-c", "run.json", "--workers", "2"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for file in [
        "out/results.json",
        "out/runtime.csv",
        "out/plotdata/tradeoff.csv",
        "out/tables/event_wise_pa_l9.csv",
        "out/tables/event_wise_pa_l9-auprc.csv",
        "out/tables/reduced_length_pa_kdataset_l9.csv",
        "out/scores/mini/first_diff/naive/a.csv",
    ] {
        assert!(d.join(file).is_file(), "missing {file}");
    }
    let results = std::fs::read(d.join("out/results.json")).unwrap();

    // Tables re-emitted from results.json match the originals.
    assert!(tsadbench(&["report", "-i", "out/results.json", "-o", "again"], d).status.success());
    for table in ["event_wise_pa_l9.csv", "reduced_length_pa_kdataset_l9-auprc.csv"] {
        assert_eq!(
            std::fs::read(d.join("out/tables").join(table)).unwrap(),
            std::fs::read(d.join("again/tables").join(table)).unwrap()
        );
    }
    assert_eq!(std::fs::read(d.join("out/runtime.csv")).unwrap(), std::fs::read(d.join("again/runtime.csv")).unwrap());

    // Rescoring the dumps reproduces the metrics.
    let out = tsadbench(
        &["eval", "-s", "out/scores", "-d", "data", "--criteria", "event_wise_pa,reduced_length_pa:k=dataset", "-o", "re"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let a: serde_json::Value = serde_json::from_slice(&results).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("re/results.json")).unwrap()).unwrap();
    assert_eq!(a["metrics"], b["metrics"]);
    assert_eq!(a["aggregates"], b["aggregates"]);

    // A command-line k override changes only the k=dataset rows.
    let out = tsadbench(&["run", "-c", "run.json", "-o", "k0", "--k-delay", "0"], d);
    assert!(out.status.success());
    let c: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("k0/results.json")).unwrap()).unwrap();
    let rows = |v: &serde_json::Value, crit: &str| {
        v["metrics"].as_array().unwrap().iter().filter(|m| m["criterion"] == crit).cloned().collect::<Vec<_>>()
    };
    assert_eq!(rows(&a, "event_wise_pa:l=9"), rows(&c, "event_wise_pa:l=9"));
    assert_eq!(rows(&c, "reduced_length_pa:k=dataset:l=9")[0]["report"]["criterion"]["k_delay"], 0);
}

#[test]
fn split_prints_a_plan() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write_synth(d);
    let out = tsadbench(&["split", "-d", "data", "--schema", "all_in_one"], d);
    assert!(out.status.success());
    let plan: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(plan["tasks"].as_array().unwrap().len(), 1);
    assert_eq!(tsadbench(&["split", "-d", "data", "--schema", "bogus"], d).status.code(), Some(1));
}
