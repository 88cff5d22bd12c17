use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::augment::{AugmentationRanges, GridAxis};
use crate::error::{Error, Result};
use crate::ingest::ColumnMapping;
use crate::model::{FeatureSet, Method, SgdOptions, SplitFractions};
use crate::validate::{FixedParams, SweepParam};

pub const CACHE_ENV: &str = "COMFORT_FORGE_CACHE";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub name: String,
    /// Relative paths resolve against the config directory, then the cache.
    pub path: PathBuf,
    /// Built-in mapping name (`db2`, `rp884`, `canonical`) or a mapping file.
    pub mapping: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub enabled: bool,
    pub ratio: f64,
    pub ranges: AugmentationRanges,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig { enabled: true, ratio: 1.0, ranges: AugmentationRanges::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Method keys, e.g. `fine-tree`, `wide-nn`.
    pub methods: Vec<String>,
    pub split: SplitFractions,
    pub sgd: SgdOptions,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            methods: ["fine-tree", "fine-knn", "gaussian-nb", "wide-nn"].map(String::from).to_vec(),
            split: SplitFractions::HOLDOUT_70_15_15,
            sgd: SgdOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub temp: GridAxis,
    pub rh: GridAxis,
    /// `None` uses the medians of the retained training records.
    pub fixed: Option<FixedParams>,
    /// Method whose model is charted; the first trained method when unset.
    pub method: Option<String>,
    /// CSV of `polygon,temp_c,humidity_ratio` vertices.
    pub overlays: Option<PathBuf>,
    pub band_rh: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            temp: crate::validate::GridSpec::DEFAULT_TEMP,
            rh: crate::validate::GridSpec::DEFAULT_RH,
            fixed: None,
            method: None,
            overlays: None,
            band_rh: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { param: SweepParam::Age, values: vec![30.0, 75.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub feature_set: FeatureSet,
    pub filter: bool,
    pub datasets: Vec<DatasetConfig>,
    pub augment: AugmentConfig,
    pub train: TrainConfig,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    /// Not written to the effective config, so a run is reproducible
    /// regardless of where it is written.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            feature_set: FeatureSet::FiveParam,
            filter: true,
            datasets: vec![
                DatasetConfig { name: "rp884".into(), path: "rp884.csv".into(), mapping: "rp884".into() },
                DatasetConfig { name: "db2".into(), path: "db2.csv".into(), mapping: "db2".into() },
            ],
            augment: AugmentConfig::default(),
            train: TrainConfig::default(),
            grid: GridConfig::default(),
            sweep: SweepConfig::default(),
            out: None,
            base_dir: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// The serialized form written next to a run's outputs.
    pub fn effective_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::ConfigInvalid("dataset names must be unique".into()));
        }
        for d in &self.datasets {
            let ok = !d.name.is_empty() && d.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
            if !ok || d.name == "combined" {
                return Err(Error::ConfigInvalid(format!("invalid dataset name `{}`", d.name)));
            }
        }
        if self.augment.enabled {
            self.augment.ranges.validate()?;
        }
        if !(self.augment.ratio.is_finite() && self.augment.ratio >= 0.0) {
            return Err(Error::ConfigInvalid(format!("augment ratio must be >= 0, got {}", self.augment.ratio)));
        }
        if self.train.methods.is_empty() {
            return Err(Error::ConfigInvalid("at least one training method is required".into()));
        }
        self.methods()?;
        if let Some(m) = &self.grid.method {
            if !self.train.methods.contains(m) {
                return Err(Error::ConfigInvalid(format!("chart method `{m}` is not among the trained methods")));
            }
        }
        self.grid.temp.validate()?;
        self.grid.rh.validate()?;
        Ok(())
    }

    pub fn methods(&self) -> Result<Vec<Method>> {
        self.train
            .methods
            .iter()
            .map(|k| Method::parse(k).ok_or_else(|| Error::ConfigInvalid(format!("unknown method `{k}`"))))
            .collect()
    }

    pub fn chart_method(&self) -> Result<Method> {
        let key = self.grid.method.as_ref().unwrap_or(&self.train.methods[0]);
        Method::parse(key).ok_or_else(|| Error::ConfigInvalid(format!("unknown method `{key}`")))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Config directory first, then `$COMFORT_FORGE_CACHE`.
    pub fn resolve_input(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            return path.to_path_buf();
        }
        let mut candidates = Vec::new();
        if let Some(base) = &self.base_dir {
            candidates.push(base.join(path));
        }
        candidates.push(path.to_path_buf());
        if let Some(cache) = std::env::var_os(CACHE_ENV) {
            candidates.push(PathBuf::from(cache).join(path));
        }
        candidates.iter().find(|p| p.exists()).cloned().unwrap_or_else(|| candidates.last().cloned().expect("nonempty"))
    }

    pub fn mapping_for(&self, dataset: &DatasetConfig) -> Result<ColumnMapping> {
        match ColumnMapping::builtin(&dataset.mapping) {
            Some(m) => Ok(m),
            None => ColumnMapping::from_path(&self.resolve_input(Path::new(&dataset.mapping))),
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(fs) = o.feature_set {
            self.feature_set = fs;
        }
        if o.no_filter {
            self.filter = false;
        }
        if let Some(r) = o.augment_ratio {
            self.augment.ratio = r;
        }
        if let Some((t, rh)) = o.grid {
            self.grid.temp = t;
            self.grid.rh = rh;
        }
        if let Some(f) = o.fixed {
            self.grid.fixed = Some(f);
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        self.validate()
    }
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub feature_set: Option<FeatureSet>,
    pub no_filter: bool,
    pub augment_ratio: Option<f64>,
    pub grid: Option<(GridAxis, GridAxis)>,
    pub fixed: Option<FixedParams>,
    pub out: Option<PathBuf>,
}

/// `tmin,tmax,tstep,rhmin,rhmax,rhstep`.
pub fn parse_grid_flag(raw: &str) -> Result<(GridAxis, GridAxis)> {
    let bad = || Error::ConfigInvalid(format!("--grid expects tmin,tmax,tstep,rhmin,rhmax,rhstep, got `{raw}`"));
    let v: Vec<f64> =
        raw.split(',').map(|s| s.trim().parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad())?;
    if v.len() != 6 {
        return Err(bad());
    }
    let t = GridAxis::new(v[0], v[1], v[2]);
    let rh = GridAxis::new(v[3], v[4], v[5]);
    t.validate()?;
    rh.validate()?;
    Ok((t, rh))
}

/// `clo=..,met=..,age=..`; all three keys are required.
pub fn parse_fixed_flag(raw: &str) -> Result<FixedParams> {
    let bad = |why: &str| Error::ConfigInvalid(format!("--fixed `{raw}`: {why}"));
    let (mut clo, mut met, mut age) = (None, None, None);
    for part in raw.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
        let v: f64 = v.trim().parse().map_err(|_| bad("value is not a number"))?;
        if !v.is_finite() {
            return Err(bad("value is not finite"));
        }
        let slot = match k.trim() {
            "clo" => &mut clo,
            "met" => &mut met,
            "age" => &mut age,
            other => return Err(bad(&format!("unknown key `{other}`"))),
        };
        *slot = Some(v);
    }
    match (clo, met, age) {
        (Some(clo), Some(met), Some(age)) => Ok(FixedParams { clo, met, age }),
        _ => Err(bad("clo, met and age are all required")),
    }
}
