//! End-to-end commands over a run directory.
//!
//! Every command reads only the artifacts named below and writes only its
//! own, all relative to the configured output directory:
//!
//! | command    | reads                                   | writes |
//! |------------|-----------------------------------------|--------|
//! | `ingest`   | dataset CSVs                            | `ingest/<name>.csv`, `ingest/<name>.load.json` |
//! | `filter`   | `ingest/<name>.csv`                     | `filter/<name>.csv`, `filter/<name>.report.json`, `filter/combined.csv` |
//! | `augment`  | `filter/combined.csv`                   | `augment/augmented.csv`, `augment/training.csv`, `augment/summary.json` |
//! | `train`    | `augment/training.csv`                  | `models/<method>.cfm`, `models/<method>.json`, `models/<method>.full.cfm` |
//! | `evaluate` | models, `augment/training.csv`, ingest  | `eval/<method>.holdout.json`, `eval/<method>.all.json` |
//! | `chart`    | chart model, `filter/combined.csv`, ingest | `chart/map.svg`, `chart/summary.json`, `chart/db_*.svg` |
//! | `sweep`    | chart model, `filter/combined.csv`      | `sweep/sweep_<param>_<value>.svg`, `sweep/bands.csv` |
//! | `report`   | load, filter and eval JSON              | `reports/*.csv`, `reports/manifest.json` |
//!
//! The `.full.cfm` models are fit on every training row and exist only when
//! filtering is on; they score the full original data.
//!
//! Each command also writes the effective configuration to `config.toml`.

pub mod config;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use config::{parse_fixed_flag, parse_grid_flag, Overrides, PipelineConfig, CACHE_ENV};

use crate::augment::{augment_to_balance, AugmentSummary};
use crate::chart::{parse_overlays, render_chart, ChartOptions, Polygon, YAxis};
use crate::error::{Error, Result};
use crate::filter::{filter_dataset, FilterReport};
use crate::ingest::{load_dataset, ColumnMapping, MissingReport, RowIssue};
use crate::model::persist::{load_model, to_bytes};
use crate::model::{
    assemble_features, evaluate, split, train, ClassifierSpec, EvalMode, EvalReport, FeatureMatrix, Method, SplitFractions,
    TrainedModel,
};
use crate::record::{ClassLabel, RecordSet};
use crate::report::{accuracy_table, filter_table, missing_table, sha256_hex, AccuracyCell};
use crate::validate::{band_csv, comfort_band, parametric_sweep, psychro_map, record_points, FixedParams, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Ingest,
    Filter,
    Augment,
    Train,
    Evaluate,
    Chart,
    Sweep,
    Report,
}

impl Command {
    pub const PIPELINE: [Command; 8] = [
        Command::Ingest,
        Command::Filter,
        Command::Augment,
        Command::Train,
        Command::Evaluate,
        Command::Chart,
        Command::Sweep,
        Command::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Filter => "filter",
            Command::Augment => "augment",
            Command::Train => "train",
            Command::Evaluate => "evaluate",
            Command::Chart => "chart",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

/// Files a command wrote, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CommandOutput {
    pub command: &'static str,
    pub artifacts: Vec<PathBuf>,
}

struct Run<'a> {
    cfg: &'a PipelineConfig,
    out: PathBuf,
    written: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    fn new(cfg: &'a PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let mut run = Run { cfg, out: cfg.out_dir(), written: Vec::new() };
        run.write("config.toml", cfg.effective_toml()?.as_bytes())?;
        Ok(run)
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.out.join(rel)
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(format!("creating {}", parent.display()), e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        self.written.push(PathBuf::from(rel));
        Ok(())
    }

    fn write_json<S: Serialize>(&mut self, rel: &str, value: &S) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    fn require(&self, rel: &str) -> Result<PathBuf> {
        let path = self.path(rel);
        if path.exists() {
            Ok(path)
        } else {
            Err(Error::MissingArtifact(path))
        }
    }

    fn read_records(&self, rel: &str) -> Result<RecordSet> {
        Ok(load_dataset(&self.require(rel)?, &ColumnMapping::canonical())?.records)
    }

    fn read_json<D: serde::de::DeserializeOwned>(&self, rel: &str) -> Result<D> {
        let path = self.require(rel)?;
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn finish(self, command: Command) -> CommandOutput {
        CommandOutput { command: command.as_str(), artifacts: self.written }
    }

    /// Every ingested dataset, concatenated in config order.
    fn original_records(&self) -> Result<RecordSet> {
        let mut all = RecordSet::default();
        for d in &self.cfg.datasets {
            all = all.concat(self.read_records(&format!("ingest/{}.csv", d.name))?);
        }
        Ok(all)
    }

    fn training_matrix(&self) -> Result<FeatureMatrix> {
        assemble_features(&self.read_records("augment/training.csv")?, self.cfg.feature_set)
    }

    fn model(&self, method: Method) -> Result<TrainedModel> {
        load_model(&self.require(&format!("models/{}.cfm", method.key()))?)
    }

    fn grid_spec(&self) -> Result<(GridSpec, &'static str)> {
        let (fixed, source) = match self.cfg.grid.fixed {
            Some(f) => (f, "config"),
            None => (FixedParams::median_of(&self.read_records("filter/combined.csv")?), "median"),
        };
        let spec = GridSpec { temp: self.cfg.grid.temp, rh: self.cfg.grid.rh, fixed, feature_set: self.cfg.feature_set };
        spec.validate()?;
        Ok((spec, source))
    }

    fn overlays(&self) -> Result<Vec<Polygon>> {
        match &self.cfg.grid.overlays {
            None => Ok(Vec::new()),
            Some(p) => {
                let path = self.cfg.resolve_input(p);
                if !path.exists() {
                    return Err(Error::FileNotFound(path));
                }
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                parse_overlays(&text)
            }
        }
    }

    fn variant(&self) -> String {
        format!(
            "{}{} {}",
            if self.cfg.filter { "filtered" } else { "original" },
            if self.cfg.augment.enabled { "+augmented" } else { "" },
            self.cfg.feature_set.as_str()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub dataset: String,
    pub mapping: String,
    pub source_sha256: String,
    pub rows_read: usize,
    pub loaded: usize,
    pub rejected: Vec<RowIssue>,
    pub diagnostics: Vec<RowIssue>,
    pub missing: MissingReport,
}

pub fn cmd_ingest(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    for d in &cfg.datasets {
        let path = cfg.resolve_input(&d.path);
        if !path.exists() {
            return Err(Error::FileNotFound(path));
        }
        let mapping = cfg.mapping_for(d)?;
        let outcome = load_dataset(&path, &mapping)?;
        let bytes = std::fs::read(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        run.write(&format!("ingest/{}.csv", d.name), &outcome.records.to_csv_bytes()?)?;
        let summary = LoadSummary {
            dataset: d.name.clone(),
            mapping: mapping.id.clone(),
            source_sha256: sha256_hex(&bytes),
            rows_read: outcome.rows_read,
            loaded: outcome.records.len(),
            rejected: outcome.rejected,
            diagnostics: outcome.diagnostics,
            missing: outcome.missing,
        };
        run.write_json(&format!("ingest/{}.load.json", d.name), &summary)?;
    }
    Ok(run.finish(Command::Ingest))
}

pub fn cmd_filter(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let mut combined = RecordSet::default();
    for d in &cfg.datasets {
        let records = run.read_records(&format!("ingest/{}.csv", d.name))?;
        let (retained, report) = filter_dataset(&records);
        run.write_json(&format!("filter/{}.report.json", d.name), &report)?;
        let kept = if cfg.filter { retained } else { records };
        run.write(&format!("filter/{}.csv", d.name), &kept.to_csv_bytes()?)?;
        combined = combined.concat(kept);
    }
    run.write("filter/combined.csv", &combined.to_csv_bytes()?)?;
    Ok(run.finish(Command::Filter))
}

pub fn cmd_augment(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let real = run.read_records("filter/combined.csv")?;
    let (augmented, summary) = if cfg.augment.enabled {
        let (a, s) = augment_to_balance(&real, &cfg.augment.ranges, cfg.augment.ratio, cfg.seed)?;
        (a, Some(s))
    } else {
        (RecordSet::default(), None::<AugmentSummary>)
    };
    run.write("augment/augmented.csv", &augmented.to_csv_bytes()?)?;
    run.write("augment/training.csv", &real.concat(augmented).to_csv_bytes()?)?;
    run.write_json("augment/summary.json", &summary)?;
    Ok(run.finish(Command::Augment))
}

pub fn cmd_train(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let data = run.training_matrix()?;
    let parts = split(&data, cfg.train.split, cfg.seed)?;
    for method in cfg.methods()? {
        let spec = ClassifierSpec { method, sgd: cfg.train.sgd };
        let mut model = train(&spec, &parts.train, &parts.val, cfg.seed)?;
        model.meta.split = Some(cfg.train.split);
        run.write(&format!("models/{}.cfm", method.key()), &to_bytes(&model)?)?;
        if cfg.filter {
            let empty = FeatureMatrix::new(data.feature_set, Vec::new(), Vec::new());
            let mut full = train(&spec, &data, &empty, cfg.seed)?;
            full.meta.split = Some(SplitFractions::ALL_TRAIN);
            run.write(&format!("models/{}.full.cfm", method.key()), &to_bytes(&full)?)?;
        }
        run.write_json(
            &format!("models/{}.json", method.key()),
            &serde_json::json!({
                "method": method.key(),
                "feature_set": cfg.feature_set.as_str(),
                "meta": model.meta,
            }),
        )?;
    }
    Ok(run.finish(Command::Train))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredEval {
    pub variant: String,
    pub report: EvalReport,
}

pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let data = run.training_matrix()?;
    let parts = split(&data, cfg.train.split, cfg.seed)?;
    let holdout = if parts.test.rows() > 0 { parts.test } else { parts.train };
    let original = if cfg.filter { Some(assemble_features(&run.original_records()?, cfg.feature_set)?) } else { None };
    let variant = run.variant();
    for method in cfg.methods()? {
        let model = run.model(method)?;
        let report = evaluate(&model, &holdout, EvalMode::HoldoutTest)?;
        run.write_json(&format!("eval/{}.holdout.json", method.key()), &StoredEval { variant: variant.clone(), report })?;
        if let Some(all) = &original {
            let full: TrainedModel = load_model(&run.require(&format!("models/{}.full.cfm", method.key()))?)?;
            let report = evaluate(&full, all, EvalMode::AllOriginalData)?;
            let v = format!("{variant} tested with all data");
            run.write_json(&format!("eval/{}.all.json", method.key()), &StoredEval { variant: v, report })?;
        }
    }
    Ok(run.finish(Command::Evaluate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSummary {
    pub method: String,
    pub fixed: FixedParams,
    pub fixed_source: String,
    pub grid_rows: usize,
    /// Grid points per predicted class, keyed by class name.
    pub class_counts: BTreeMap<String, usize>,
    pub band_rh: f64,
    pub band: Option<(f64, f64)>,
}

pub fn cmd_chart(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let method = cfg.chart_method()?;
    let model = run.model(method)?;
    let (spec, fixed_source) = run.grid_spec()?;
    let overlays = run.overlays()?;
    let points = psychro_map(&model, &spec)?;
    let title = format!("{} ({})", method.display_name(), run.variant());
    let doc = render_chart(&points, &overlays, &ChartOptions { y_axis: YAxis::HumidityRatio, title: Some(title) })?;
    run.write("chart/map.svg", &doc.svg)?;
    let mut class_counts = BTreeMap::new();
    for label in ClassLabel::ALL {
        class_counts.insert(label.name().to_string(), points.iter().filter(|p| p.label == label).count());
    }
    let summary = ChartSummary {
        method: method.key().to_string(),
        fixed: spec.fixed,
        fixed_source: fixed_source.to_string(),
        grid_rows: points.len(),
        class_counts,
        band_rh: cfg.grid.band_rh,
        band: comfort_band(&model, cfg.grid.band_rh, &spec)?,
    };
    run.write_json("chart/summary.json", &summary)?;

    let maps = [
        ("chart/db_original.svg", run.original_records()?, "original"),
        ("chart/db_retained.svg", run.read_records("filter/combined.csv")?, "retained"),
    ];
    for (rel, records, what) in maps {
        let (pts, _) = record_points(&records);
        if pts.is_empty() {
            continue;
        }
        let opts = ChartOptions { y_axis: YAxis::RelativeHumidity, title: Some(format!("Survey entries ({what})")) };
        run.write(rel, &render_chart(&pts, &[], &opts)?.svg)?;
    }
    Ok(run.finish(Command::Chart))
}

pub fn cmd_sweep(cfg: &PipelineConfig) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let model = run.model(cfg.chart_method()?)?;
    let (spec, _) = run.grid_spec()?;
    let overlays = run.overlays()?;
    let sweep = parametric_sweep(&model, cfg.sweep.param, &cfg.sweep.values, &spec, &overlays, &ChartOptions::default())?;
    for c in &sweep.charts {
        run.write(&format!("sweep/{}", c.file_name), &c.chart.svg)?;
    }
    run.write("sweep/bands.csv", band_csv(&sweep.bands).as_bytes())?;
    Ok(run.finish(Command::Sweep))
}

/// Tables from this run's artifacts; `extra_runs` contributes further
/// accuracy columns from other run directories.
pub fn cmd_report(cfg: &PipelineConfig, extra_runs: &[PathBuf]) -> Result<CommandOutput> {
    let mut run = Run::new(cfg)?;
    let mut missing = Vec::new();
    let mut filters = Vec::new();
    for d in &cfg.datasets {
        let load: LoadSummary = run.read_json(&format!("ingest/{}.load.json", d.name))?;
        missing.push((d.name.clone(), load.missing));
        let f: FilterReport = run.read_json(&format!("filter/{}.report.json", d.name))?;
        filters.push((d.name.clone(), f));
    }
    run.write("reports/missing.csv", missing_table(&missing).as_bytes())?;
    run.write("reports/filter.csv", filter_table(&filters).as_bytes())?;

    let mut cells = Vec::new();
    for dir in std::iter::once(run.out.clone()).chain(extra_runs.iter().cloned()) {
        cells.extend(eval_cells(&dir, cfg)?);
    }
    cells.sort_by_key(|c| Method::parse(&c.method).map(|m| m as usize).unwrap_or(usize::MAX));
    run.write("reports/accuracy.csv", accuracy_table(&cells).as_bytes())?;

    let mut manifest = BTreeMap::new();
    collect_hashes(&run.out, &run.out, &mut manifest)?;
    run.write_json("reports/manifest.json", &manifest)?;
    Ok(run.finish(Command::Report))
}

fn eval_cells(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<AccuracyCell>> {
    let eval_dir = dir.join("eval");
    if !eval_dir.exists() {
        return Err(Error::MissingArtifact(eval_dir));
    }
    let mut cells = Vec::new();
    for method in cfg.methods()? {
        for suffix in ["holdout", "all"] {
            let path = eval_dir.join(format!("{}.{suffix}.json", method.key()));
            if !path.exists() {
                continue;
            }
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
            let stored: StoredEval = serde_json::from_str(&text)?;
            cells.push(AccuracyCell::from_report(&stored.variant, &stored.report));
        }
    }
    Ok(cells)
}

fn collect_hashes(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) -> Result<()> {
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(format!("listing {}", dir.display()), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_hashes(root, &p, out)?;
        } else {
            let rel = p.strip_prefix(root).expect("under root").to_string_lossy().replace('\\', "/");
            if rel == "reports/manifest.json" {
                continue;
            }
            let bytes = std::fs::read(&p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
            out.insert(rel, sha256_hex(&bytes));
        }
    }
    Ok(())
}

/// Runs every command in order.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<Vec<CommandOutput>> {
    Command::PIPELINE
        .iter()
        .map(|&c| match c {
            Command::Ingest => cmd_ingest(cfg),
            Command::Filter => cmd_filter(cfg),
            Command::Augment => cmd_augment(cfg),
            Command::Train => cmd_train(cfg),
            Command::Evaluate => cmd_evaluate(cfg),
            Command::Chart => cmd_chart(cfg),
            Command::Sweep => cmd_sweep(cfg),
            Command::Report => cmd_report(cfg, &[]),
        })
        .collect()
}
