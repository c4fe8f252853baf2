use std::collections::BTreeMap;
use std::path::Path;

use tsadbench_core::bench::{
    dump_path, evaluate_scores, load_datasets, parse_results_json, run, BenchError, CriterionSpec, DetectorSpec,
    KDelaySpec, RunConfig, TaskStatus,
};
use tsadbench_core::detectors::{DetectorConfig, DetectorKind};
use tsadbench_core::metrics::PaVariant;
use tsadbench_core::schemas::Schema;
use tsadbench_core::synth::{generate_dataset, AnomalyKind, AnomalyRequest, SynthConfig, SynthDatasetConfig};
use tsadbench_core::SeriesError;

fn synth(root: &Path, name: &str, curves: usize, k_delay: Option<usize>) {
    let curves = (0..curves)
        .map(|i| {
            let mut c = SynthConfig::new(format!("c{i}"), 400, 100 + i as u64);
            c.noise_std = 0.05;
            c.anomalies = vec![
                AnomalyRequest::new(AnomalyKind::Global, 2),
                AnomalyRequest::new(AnomalyKind::Shapelet, 1).with_len(10, 20),
            ];
            c
        })
        .collect();
    generate_dataset(
        &SynthDatasetConfig {
            name: name.into(),
            k_delay,
            curves,
        },
        root,
    )
    .unwrap();
}

fn builtin(kind: DetectorKind) -> DetectorSpec {
    DetectorSpec::builtin(DetectorConfig::new(kind).with_window(16))
}

#[test]
fn one_metric_row_per_curve() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("d"), "d", 3, None);
    let mut cfg = RunConfig::new(vec![dir.path().join("d")], vec![builtin(DetectorKind::FirstDiff)]);
    cfg.criteria = vec![CriterionSpec::new(PaVariant::PointWisePa)];
    let out = dir.path().join("out");
    let report = run(&cfg, &out).unwrap();
    assert_eq!(report.metrics.len(), 3);
    assert_eq!(report.tasks.len(), 3);
    assert!(report.tasks.iter().all(|t| t.status == TaskStatus::Success));
    assert_eq!(report.aggregates.len(), 1);
    for f in ["results.json", "runtime.csv", "plotdata/tradeoff.csv", "tables/point_wise_pa_l9.csv", "tables/point_wise_pa_l9-auprc.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(dump_path(&out.join("scores"), "d", "first_diff", Schema::Naive, "c0").is_file());
    let back = parse_results_json(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(back.metrics, report.metrics);
    let runtime = std::fs::read_to_string(out.join("runtime.csv")).unwrap();
    assert_eq!(runtime.lines().count(), 2);
}

#[test]
fn statistical_detectors_refuse_pooled_schemas() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("d"), "d", 4, None);
    let mut cfg = RunConfig::new(vec![dir.path().join("d")], vec![builtin(DetectorKind::SubLof)]);
    cfg.schemas = vec![Schema::AllInOne, Schema::ZeroShot];
    cfg.criteria = vec![CriterionSpec::new(PaVariant::EventWisePa)];
    let report = run(&cfg, &dir.path().join("out")).unwrap();
    // all-in-one evaluates 4 curves, zero-shot 2.
    assert_eq!(report.tasks.len(), 6);
    assert!(report.tasks.iter().all(|t| t.status == TaskStatus::Unsupported));
    assert!(report.metrics.is_empty());
    assert!(!report.has_failures());

    cfg.allow_statistical_pooling = true;
    let report = run(&cfg, &dir.path().join("out2")).unwrap();
    assert!(report.tasks.iter().all(|t| t.status == TaskStatus::Success));
    assert_eq!(report.metrics.len(), 6);
}

#[test]
fn anomaly_free_curves_are_excluded_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("d");
    let mut curves: Vec<SynthConfig> = (0..3)
        .map(|i| {
            let mut c = SynthConfig::new(format!("c{i}"), 300, i);
            c.anomalies = vec![AnomalyRequest::new(AnomalyKind::Global, 1)];
            c
        })
        .collect();
    curves.push(SynthConfig::new("clean", 300, 9));
    generate_dataset(
        &SynthDatasetConfig {
            name: "d".into(),
            k_delay: None,
            curves,
        },
        &root,
    )
    .unwrap();
    let mut cfg = RunConfig::new(vec![root], vec![builtin(DetectorKind::Ar)]);
    cfg.schemas = vec![Schema::Naive, Schema::AllInOne];
    cfg.allow_statistical_pooling = true;
    let report = run(&cfg, &dir.path().join("out")).unwrap();
    assert_eq!(report.exclusions.len(), 1);
    assert_eq!(report.exclusions[0].curve, "clean");
    assert!(report.tasks.iter().all(|t| t.curve != "clean"));
    assert_eq!(report.metrics.len(), 2 * 3 * 3);
}

#[test]
fn every_combination_appears_once() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("a"), "a", 3, Some(2));
    synth(&dir.path().join("b"), "b", 2, None);
    let mut cfg = RunConfig::new(
        vec![dir.path().join("a"), dir.path().join("b")],
        vec![builtin(DetectorKind::FirstDiff), builtin(DetectorKind::Ar)],
    );
    cfg.schemas = vec![Schema::Naive, Schema::AllInOne];
    cfg.allow_statistical_pooling = true;
    cfg.criteria = vec![
        CriterionSpec::new(PaVariant::ReducedLengthPa),
        CriterionSpec::new(PaVariant::EventWisePa).with_k_delay(KDelaySpec::Dataset),
    ];
    let report = run(&cfg, &dir.path().join("out")).unwrap();
    assert_eq!(report.metrics.len(), 5 * 2 * 2 * 2);
    let mut keys: Vec<_> = report
        .metrics
        .iter()
        .map(|m| (&m.dataset, &m.curve, &m.detector, m.schema, m.criterion))
        .collect();
    keys.dedup();
    assert_eq!(keys.len(), report.metrics.len());
    // k=dataset resolves from the manifest of `a` and stays off for `b`.
    for m in &report.metrics {
        if m.criterion.k_delay == KDelaySpec::Dataset {
            let expected = if m.dataset == "a" { Some(2) } else { None };
            assert_eq!(m.report.criterion.k_delay, expected);
        }
    }
    assert_eq!(report.aggregates.len(), 2 * 2 * 2);
    for a in &report.aggregates {
        let mean = a.datasets.iter().map(|d| d.f1_best).sum::<f64>() / a.datasets.len() as f64;
        assert!((a.f1_best - mean).abs() < 1e-12);
    }
}

#[test]
fn k_delay_override_beats_manifest() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("a"), "a", 2, Some(2));
    let mut cfg = RunConfig::new(vec![dir.path().join("a")], vec![builtin(DetectorKind::FirstDiff)]);
    cfg.criteria = vec![CriterionSpec::new(PaVariant::EventWisePa).with_k_delay(KDelaySpec::Dataset)];
    cfg.k_delay_overrides = BTreeMap::from([("a".to_string(), 7)]);
    let report = run(&cfg, &dir.path().join("out")).unwrap();
    assert!(report.metrics.iter().all(|m| m.report.criterion.k_delay == Some(7)));
    cfg.k_delay_overrides = BTreeMap::from([("*".to_string(), 1)]);
    let report = run(&cfg, &dir.path().join("out")).unwrap();
    assert!(report.metrics.iter().all(|m| m.report.criterion.k_delay == Some(1)));
}

#[test]
fn rerun_and_rescore_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("d"), "d", 3, None);
    let cfg = RunConfig::new(
        vec![dir.path().join("d")],
        vec![builtin(DetectorKind::MatrixProfile), builtin(DetectorKind::Ar)],
    );
    let out = dir.path().join("out");
    let first = run(&cfg, &out).unwrap();
    let second = run(&cfg, &dir.path().join("out2")).unwrap();
    assert_eq!(first.to_json(), second.to_json());
    let tables = |d: &Path| std::fs::read_to_string(d.join("tables/reduced_length_pa_l9.csv")).unwrap();
    assert_eq!(tables(&out), tables(&dir.path().join("out2")));

    let datasets = load_datasets(&cfg.datasets).unwrap();
    let rescored = evaluate_scores(&out.join("scores"), &datasets, &cfg.criteria, &BTreeMap::new(), None).unwrap();
    assert_eq!(rescored.metrics, first.metrics);
    assert_eq!(rescored.aggregates, first.aggregates);
}

#[test]
fn added_criterion_only_computes_new_rows() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("d"), "d", 2, None);
    let mut cfg = RunConfig::new(vec![dir.path().join("d")], vec![builtin(DetectorKind::FirstDiff)]);
    cfg.criteria = vec![CriterionSpec::new(PaVariant::PointWisePa)];
    let out = dir.path().join("out");
    let mut previous = run(&cfg, &out).unwrap();
    // A sentinel that would be overwritten by recomputation.
    previous.metrics[0].report.f1_best = -1.0;
    let datasets = load_datasets(&cfg.datasets).unwrap();
    let criteria = [
        CriterionSpec::new(PaVariant::PointWisePa),
        CriterionSpec::new(PaVariant::ReducedLengthPa).with_prolong_len(0),
    ];
    let merged = evaluate_scores(&out.join("scores"), &datasets, &criteria, &BTreeMap::new(), Some(&previous)).unwrap();
    assert_eq!(merged.metrics.len(), 4);
    assert!(merged.metrics.iter().any(|m| m.report.f1_best == -1.0));
    assert_eq!(merged.tasks, previous.tasks);
}

#[test]
fn truncated_dump_is_a_length_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    synth(&dir.path().join("d"), "d", 2, None);
    let mut cfg = RunConfig::new(vec![dir.path().join("d")], vec![builtin(DetectorKind::FirstDiff)]);
    cfg.criteria = vec![CriterionSpec::new(PaVariant::PointWisePa)];
    let out = dir.path().join("out");
    run(&cfg, &out).unwrap();
    let path = dump_path(&out.join("scores"), "d", "first_diff", Schema::Naive, "c1");
    let text = std::fs::read_to_string(&path).unwrap();
    let truncated: Vec<&str> = text.lines().collect();
    std::fs::write(&path, truncated[..truncated.len() - 1].join("\n")).unwrap();
    let datasets = load_datasets(&cfg.datasets).unwrap();
    let err = evaluate_scores(&out.join("scores"), &datasets, &cfg.criteria, &BTreeMap::new(), None).unwrap_err();
    assert!(matches!(err, BenchError::Series(SeriesError::LengthMismatch { .. })), "{err}");
    assert_eq!(err.exit_code(), 2);

    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let last = lines.pop().unwrap();
    lines.push(format!("{},NaN", last.split(',').next().unwrap()));
    std::fs::write(&path, lines.join("\n")).unwrap();
    let err = evaluate_scores(&out.join("scores"), &datasets, &cfg.criteria, &BTreeMap::new(), None).unwrap_err();
    assert!(matches!(err, BenchError::Series(SeriesError::NonFiniteScore { .. })), "{err}");
}

#[test]
fn config_and_dataset_errors_abort() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::new(vec![dir.path().join("missing")], vec![builtin(DetectorKind::Ar)]);
    let err = run(&cfg, dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 2, "{err}");
    let cfg = RunConfig::new(vec![], vec![builtin(DetectorKind::Ar)]);
    assert_eq!(run(&cfg, dir.path()).unwrap_err().exit_code(), 1);
}
