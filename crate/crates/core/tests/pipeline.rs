use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use comfort_forge::pipeline::config::DatasetConfig;
use comfort_forge::pipeline::{self, ChartSummary, PipelineConfig};
use comfort_forge::Error;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/db2_sample.csv")
}

fn config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        datasets: vec![DatasetConfig { name: "fixture".into(), path: fixture(), mapping: "db2".into() }],
        out: Some(out.to_path_buf()),
        ..Default::default()
    };
    cfg.train.methods = vec!["fine-tree".into(), "fine-knn".into(), "gaussian-nb".into(), "narrow-nn".into()];
    cfg.grid.method = Some("fine-knn".into());
    cfg.grid.temp = comfort_forge::GridAxis::new(10.0, 40.0, 1.0);
    cfg.grid.rh = comfort_forge::GridAxis::new(0.0, 100.0, 5.0);
    cfg
}

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn full_run_produces_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    let outputs = pipeline::cmd_run(&cfg).unwrap();
    assert_eq!(outputs.len(), 8);
    for rel in [
        "config.toml",
        "ingest/fixture.csv",
        "ingest/fixture.load.json",
        "filter/fixture.csv",
        "filter/fixture.report.json",
        "filter/combined.csv",
        "augment/augmented.csv",
        "augment/training.csv",
        "augment/summary.json",
        "models/fine-knn.cfm",
        "models/fine-knn.full.cfm",
        "models/narrow-nn.json",
        "eval/fine-tree.holdout.json",
        "eval/fine-tree.all.json",
        "chart/map.svg",
        "chart/summary.json",
        "chart/db_original.svg",
        "chart/db_retained.svg",
        "sweep/sweep_age_30.svg",
        "sweep/sweep_age_75.svg",
        "sweep/bands.csv",
        "reports/missing.csv",
        "reports/filter.csv",
        "reports/accuracy.csv",
        "reports/manifest.json",
    ] {
        assert!(dir.path().join(rel).is_file(), "missing {rel}");
    }
    let summary: ChartSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("chart/summary.json")).unwrap()).unwrap();
    assert_eq!(summary.grid_rows, 31 * 21);
    assert_eq!(summary.class_counts.values().sum::<usize>(), summary.grid_rows);
    assert_eq!(summary.fixed_source, "median");
}

#[test]
fn reruns_are_byte_identical_across_output_directories() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    pipeline::cmd_run(&config(a.path())).unwrap();
    pipeline::cmd_run(&config(b.path())).unwrap();
    let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (k, v) in &sa {
        assert!(v == &sb[k], "{k} differs between runs");
    }
}

#[test]
fn downstream_commands_need_upstream_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    assert!(matches!(pipeline::cmd_train(&cfg), Err(Error::MissingArtifact(p)) if p.ends_with("augment/training.csv")));
    pipeline::cmd_ingest(&cfg).unwrap();
    assert!(matches!(pipeline::cmd_augment(&cfg), Err(Error::MissingArtifact(p)) if p.ends_with("filter/combined.csv")));
    assert!(matches!(pipeline::cmd_chart(&cfg), Err(Error::MissingArtifact(_))));
}

#[test]
fn inputs_are_not_modified() {
    let before = std::fs::read(fixture()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path());
    pipeline::cmd_ingest(&cfg).unwrap();
    pipeline::cmd_filter(&cfg).unwrap();
    let ingested = std::fs::read(dir.path().join("ingest/fixture.csv")).unwrap();
    pipeline::cmd_filter(&cfg).unwrap();
    assert_eq!(std::fs::read(dir.path().join("ingest/fixture.csv")).unwrap(), ingested);
    assert_eq!(std::fs::read(fixture()).unwrap(), before);
}

#[test]
fn unfiltered_variant_skips_all_data_scoring() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.filter = false;
    cfg.augment.enabled = false;
    for c in [pipeline::cmd_ingest, pipeline::cmd_filter, pipeline::cmd_augment, pipeline::cmd_train, pipeline::cmd_evaluate] {
        c(&cfg).unwrap();
    }
    assert!(dir.path().join("eval/fine-tree.holdout.json").exists());
    assert!(!dir.path().join("eval/fine-tree.all.json").exists());
    assert!(!dir.path().join("models/fine-tree.full.cfm").exists());
    let ingested = std::fs::read(dir.path().join("ingest/fixture.csv")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("filter/combined.csv")).unwrap(), ingested);
}

#[test]
fn report_combines_runs_into_columns() {
    let filtered = tempfile::tempdir().unwrap();
    let original = tempfile::tempdir().unwrap();
    let cfg = config(filtered.path());
    pipeline::cmd_run(&cfg).unwrap();
    let mut raw = config(original.path());
    raw.filter = false;
    raw.augment.enabled = false;
    pipeline::cmd_run(&raw).unwrap();
    pipeline::cmd_report(&cfg, &[original.path().to_path_buf()]).unwrap();
    let table = std::fs::read_to_string(filtered.path().join("reports/accuracy.csv")).unwrap();
    let header = table.lines().next().unwrap();
    assert_eq!(header, "method,filtered+augmented five,filtered+augmented five tested with all data,original five");
    assert_eq!(table.lines().count(), 1 + 4 + 1);
}
