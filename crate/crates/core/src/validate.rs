//! Validation grids over temperature and humidity, comfort bands and
//! parameter sweeps.

use serde::{Deserialize, Serialize};

use crate::augment::{grid_count, GridAxis, DEFAULT_ROW_CAP};
use crate::chart::{render_chart, ChartDocument, ChartOptions, Polygon, PsychroPoint};
use crate::error::{Error, Result};
use crate::model::{predict, FeatureMatrix, FeatureSet, TrainedModel};
use crate::psychro::humidity_ratio_std;
use crate::record::{derive_label, ClassLabel, RecordSet};
use crate::scalar::Scalar;

/// Values held constant across a validation grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub clo: f64,
    pub met: f64,
    pub age: f64,
}

impl FixedParams {
    /// Used only when a dataset has no value at all for a parameter.
    pub const FALLBACK: FixedParams = FixedParams { clo: 0.6, met: 1.1, age: 40.0 };

    /// Per-parameter medians over the records that have the value.
    pub fn median_of(records: &RecordSet) -> Self {
        let med = |get: fn(&crate::ComfortRecord) -> Option<f64>, fallback: f64| {
            let mut v: Vec<f64> = records.iter().filter_map(get).filter(|x| x.is_finite()).collect();
            median(&mut v).unwrap_or(fallback)
        };
        FixedParams {
            clo: med(|r| r.clothing_insulation, Self::FALLBACK.clo),
            met: med(|r| r.metabolic_rate, Self::FALLBACK.met),
            age: med(|r| r.age, Self::FALLBACK.age),
        }
    }

    pub fn get(&self, param: SweepParam) -> f64 {
        match param {
            SweepParam::Age => self.age,
            SweepParam::Clo => self.clo,
            SweepParam::Met => self.met,
        }
    }

    pub fn with(mut self, param: SweepParam, value: f64) -> Self {
        match param {
            SweepParam::Age => self.age = value,
            SweepParam::Clo => self.clo = value,
            SweepParam::Met => self.met = value,
        }
        self
    }
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub temp: GridAxis,
    pub rh: GridAxis,
    pub fixed: FixedParams,
    pub feature_set: FeatureSet,
}

impl GridSpec {
    pub const DEFAULT_TEMP: GridAxis = GridAxis::new(10.0, 40.0, 0.25);
    pub const DEFAULT_RH: GridAxis = GridAxis::new(0.0, 100.0, 1.0);

    pub fn new(fixed: FixedParams, feature_set: FeatureSet) -> Self {
        GridSpec { temp: Self::DEFAULT_TEMP, rh: Self::DEFAULT_RH, fixed, feature_set }
    }

    pub fn validate(&self) -> Result<()> {
        self.temp.validate()?;
        self.rh.validate()?;
        let f = self.fixed;
        if ![f.clo, f.met, f.age].iter().all(|v| v.is_finite()) {
            return Err(Error::ConfigInvalid(format!("fixed grid values must be finite, got {f:?}")));
        }
        Ok(())
    }

    pub fn row_count(&self) -> Result<u128> {
        Ok(grid_count(&self.temp)? as u128 * grid_count(&self.rh)? as u128)
    }
}

fn push_row<T: Scalar>(values: &mut Vec<T>, spec: &GridSpec, t: f64, rh: f64) {
    let f = spec.fixed;
    values.extend([T::lit(t), T::lit(rh), T::lit(f.clo), T::lit(f.met)]);
    if spec.feature_set == FeatureSet::FiveParam {
        values.push(T::lit(f.age));
    }
}

/// Temperature-major Cartesian grid with the fixed columns filled in.
pub fn generate_grid<T: Scalar>(spec: &GridSpec) -> Result<FeatureMatrix<T>> {
    generate_grid_capped(spec, DEFAULT_ROW_CAP)
}

pub fn generate_grid_capped<T: Scalar>(spec: &GridSpec, cap: u64) -> Result<FeatureMatrix<T>> {
    spec.validate()?;
    let rows = spec.row_count()?;
    if rows > cap as u128 {
        return Err(Error::GridTooLarge { rows, cap });
    }
    let temps = spec.temp.values()?;
    let rhs = spec.rh.values()?;
    let mut values = Vec::with_capacity(rows as usize * spec.feature_set.width());
    for &t in &temps {
        for &rh in &rhs {
            push_row(&mut values, spec, t, rh);
        }
    }
    Ok(FeatureMatrix::unlabeled(spec.feature_set, values))
}

/// Predicts every grid point and places it on psychrometric coordinates.
pub fn psychro_map<T: Scalar>(model: &TrainedModel<T>, spec: &GridSpec) -> Result<Vec<PsychroPoint>> {
    let grid = generate_grid::<T>(spec)?;
    let labels = predict(model, &grid)?;
    labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let row = grid.row(i);
            let (t, rh) = (row[0].as_f64(), row[1].as_f64());
            Ok(PsychroPoint { temp_c: t, rh, humidity_ratio: humidity_ratio_std(t, rh)?, label })
        })
        .collect()
}

/// Surveyed entries with temperature, humidity and a label, for database
/// scatter maps. Returns the points and the number of entries skipped.
pub fn record_points(records: &RecordSet) -> (Vec<PsychroPoint>, usize) {
    let mut skipped = 0;
    let mut points = Vec::new();
    for r in records {
        let hit = (|| {
            let t = r.air_temperature?;
            let rh = r.relative_humidity?;
            let label = derive_label(r)?;
            let w = humidity_ratio_std(t, rh).ok()?;
            Some(PsychroPoint { temp_c: t, rh, humidity_ratio: w, label })
        })();
        match hit {
            Some(p) => points.push(p),
            None => skipped += 1,
        }
    }
    (points, skipped)
}

/// Lowest and highest grid temperature predicted NoChange at `rh`, at grid
/// resolution. `None` when no temperature is.
pub fn comfort_band<T: Scalar>(model: &TrainedModel<T>, rh: f64, spec: &GridSpec) -> Result<Option<(f64, f64)>> {
    let within = rh >= spec.rh.start.min(spec.rh.end) && rh <= spec.rh.end.max(spec.rh.start);
    if !within {
        return Err(Error::InvalidHumidity(rh));
    }
    spec.validate()?;
    let temps = spec.temp.values()?;
    let mut values = Vec::with_capacity(temps.len() * spec.feature_set.width());
    for &t in &temps {
        push_row(&mut values, spec, t, rh);
    }
    let labels = predict(model, &FeatureMatrix::unlabeled(spec.feature_set, values))?;
    let mut band: Option<(f64, f64)> = None;
    for (&t, label) in temps.iter().zip(labels) {
        if label == ClassLabel::NoChange {
            band = Some(band.map_or((t, t), |(lo, hi)| (lo.min(t), hi.max(t))));
        }
    }
    Ok(band)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Age,
    Clo,
    Met,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Age => "age",
            SweepParam::Clo => "clo",
            SweepParam::Met => "met",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match raw.trim().to_ascii_lowercase().as_str() {
            "age" => Some(SweepParam::Age),
            "clo" => Some(SweepParam::Clo),
            "met" => Some(SweepParam::Met),
            _ => None,
        }
    }
}

/// Comfort band at the sweep humidity for one parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub param: SweepParam,
    pub value: f64,
    pub rh: f64,
    pub band: Option<(f64, f64)>,
}

pub const SWEEP_BAND_RH: f64 = 50.0;

pub struct SweepChart {
    pub file_name: String,
    pub value: f64,
    pub chart: ChartDocument,
}

pub struct Sweep {
    pub charts: Vec<SweepChart>,
    pub bands: Vec<BandRow>,
}

/// `sweep_age_30.svg`, `sweep_clo_0.5.svg`; a minus sign becomes `m`.
pub fn sweep_file_name(param: SweepParam, value: f64) -> String {
    format!("sweep_{}_{}.svg", param.as_str(), format!("{value}").replace('-', "m"))
}

pub fn parametric_sweep<T: Scalar>(
    model: &TrainedModel<T>,
    param: SweepParam,
    values: &[f64],
    base: &GridSpec,
    overlays: &[Polygon],
    options: &ChartOptions,
) -> Result<Sweep> {
    if values.is_empty() {
        return Err(Error::EmptyValueList);
    }
    let mut charts = Vec::with_capacity(values.len());
    let mut bands = Vec::with_capacity(values.len());
    for &value in values {
        let spec = GridSpec { fixed: base.fixed.with(param, value), ..*base };
        let points = psychro_map(model, &spec)?;
        let rh = SWEEP_BAND_RH.clamp(spec.rh.start.min(spec.rh.end), spec.rh.end.max(spec.rh.start));
        bands.push(BandRow { param, value, rh, band: comfort_band(model, rh, &spec)? });
        charts.push(SweepChart {
            file_name: sweep_file_name(param, value),
            value,
            chart: render_chart(&points, overlays, options)?,
        });
    }
    Ok(Sweep { charts, bands })
}

/// `param,value,rh,t_min,t_max`; empty band columns when nothing is NoChange.
pub fn band_csv(rows: &[BandRow]) -> String {
    let mut out = String::from("param,value,rh,t_min,t_max\n");
    for r in rows {
        let (lo, hi) = match r.band {
            Some((lo, hi)) => (format!("{lo}"), format!("{hi}")),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("{},{},{},{},{}\n", r.param.as_str(), r.value, r.rh, lo, hi));
    }
    out
}
