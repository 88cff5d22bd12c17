//! Semantic grid augmentation for the two directional classes.
//!
//! Warmer-needed rows are synthesized only at temperatures at or below
//! 10 °C and cooler-needed rows only at or above 40 °C, so the generated
//! anchors never overlap the band covered by surveyed entries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{ComfortRecord, Preference, RecordSet, Source};

/// Upper bound of the warmer-class temperature axis, °C.
pub const WARMER_TEMP_MAX: f64 = 10.0;
/// Lower bound of the cooler-class temperature axis, °C.
pub const COOLER_TEMP_MIN: f64 = 40.0;
pub const DEFAULT_ROW_CAP: u64 = 5_000_000;

const GRID_EPS: f64 = 1e-9;

/// Inclusive `[start, end]` axis enumerated as `start + k * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl GridAxis {
    pub const fn new(start: f64, end: f64, step: f64) -> Self {
        GridAxis { start, end, step }
    }

    /// Single-value axis.
    pub const fn point(value: f64) -> Self {
        GridAxis { start: value, end: value, step: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok =
            self.start.is_finite() && self.end.is_finite() && self.step.is_finite() && self.step > 0.0 && self.start <= self.end;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidAxis { start: self.start, end: self.end, step: self.step })
        }
    }

    /// Value at index `k`; computed from the index, never accumulated.
    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let n = grid_count(self)?;
        Ok((0..n).map(|k| self.value(k)).collect())
    }
}

pub fn grid_count(axis: &GridAxis) -> Result<usize> {
    axis.validate()?;
    Ok(((axis.end - axis.start) / axis.step + GRID_EPS).floor() as usize + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationRanges {
    pub clo: GridAxis,
    pub met: GridAxis,
    pub temp_cooler: GridAxis,
    pub temp_warmer: GridAxis,
    pub rh: GridAxis,
    pub age: GridAxis,
}

impl Default for AugmentationRanges {
    fn default() -> Self {
        AugmentationRanges {
            clo: GridAxis::new(0.0, 2.89, 0.5),
            met: GridAxis::new(0.65, 6.83, 1.0),
            temp_cooler: GridAxis::new(COOLER_TEMP_MIN, 63.2, 2.0),
            temp_warmer: GridAxis::new(0.0, WARMER_TEMP_MAX, 2.0),
            rh: GridAxis::new(0.4, 100.0, 10.0),
            age: GridAxis::new(6.0, 99.0, 15.0),
        }
    }
}

impl AugmentationRanges {
    pub fn validate(&self) -> Result<()> {
        for axis in [&self.clo, &self.met, &self.temp_cooler, &self.temp_warmer, &self.rh, &self.age] {
            axis.validate()?;
        }
        if self.temp_warmer.end > WARMER_TEMP_MAX {
            return Err(Error::ConfigInvalid(format!("warmer temperature axis must end at or below {WARMER_TEMP_MAX} °C")));
        }
        if self.temp_cooler.start < COOLER_TEMP_MIN {
            return Err(Error::ConfigInvalid(format!("cooler temperature axis must start at or above {COOLER_TEMP_MIN} °C")));
        }
        Ok(())
    }

    fn temp_axis(&self, class: Preference) -> Result<&GridAxis> {
        match class {
            Preference::Warmer => Ok(&self.temp_warmer),
            Preference::Cooler => Ok(&self.temp_cooler),
            Preference::NoChange => Err(Error::ConfigInvalid("the no-change class is never augmented".into())),
        }
    }

    /// Rows [`generate_augmentation`] would produce for `class`.
    pub fn row_count(&self, class: Preference) -> Result<u128> {
        self.validate()?;
        let axes = [&self.clo, &self.met, self.temp_axis(class)?, &self.rh, &self.age];
        axes.iter().try_fold(1u128, |acc, a| Ok(acc * grid_count(a)? as u128))
    }
}

/// Cartesian product over (clo, met, temperature, RH, age), clo outermost.
pub fn generate_augmentation(ranges: &AugmentationRanges, class: Preference) -> Result<RecordSet> {
    generate_augmentation_capped(ranges, class, DEFAULT_ROW_CAP)
}

pub fn generate_augmentation_capped(ranges: &AugmentationRanges, class: Preference, cap: u64) -> Result<RecordSet> {
    let rows = ranges.row_count(class)?;
    if rows > cap as u128 {
        return Err(Error::GridTooLarge { rows, cap });
    }
    let clo = ranges.clo.values()?;
    let met = ranges.met.values()?;
    let temp = ranges.temp_axis(class)?.values()?;
    let rh = ranges.rh.values()?;
    let age = ranges.age.values()?;

    let mut records = Vec::with_capacity(rows as usize);
    for &c in &clo {
        for &m in &met {
            for &t in &temp {
                for &h in &rh {
                    for &a in &age {
                        let mut r = ComfortRecord::empty(Source::Augmented);
                        r.clothing_insulation = Some(c);
                        r.metabolic_rate = Some(m);
                        r.air_temperature = Some(t);
                        r.relative_humidity = Some(h);
                        r.age = Some(a);
                        r.thermal_preference = Some(class);
                        records.push(r);
                    }
                }
            }
        }
    }
    Ok(RecordSet::new(records))
}

/// Seeded uniform subsample without replacement, kept in original order.
pub fn balance_subsample(augmented: &RecordSet, target_count: usize, seed: u64) -> Result<RecordSet> {
    let population = augmented.len();
    if target_count > population {
        return Err(Error::TargetExceedsPopulation { target: target_count, population });
    }
    if target_count == population {
        return Ok(augmented.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, population, target_count).into_vec();
    picked.sort_unstable();
    Ok(augmented.with_records(picked.into_iter().map(|i| augmented.records[i].clone()).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAugmentation {
    pub class: Preference,
    pub real_count: usize,
    /// NoChange count minus this class's real count, floored at zero.
    pub deficit: usize,
    pub generated: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSummary {
    pub ratio: f64,
    pub no_change_count: usize,
    pub classes: Vec<ClassAugmentation>,
}

/// Generates both directional grids and subsamples each to
/// `round(ratio * deficit)` rows (capped at the grid size).
pub fn augment_to_balance(
    real: &RecordSet,
    ranges: &AugmentationRanges,
    ratio: f64,
    seed: u64,
) -> Result<(RecordSet, AugmentSummary)> {
    if !(ratio.is_finite() && ratio >= 0.0) {
        return Err(Error::ConfigInvalid(format!("augment ratio must be >= 0, got {ratio}")));
    }
    let count = |p: Preference| real.iter().filter(|r| r.thermal_preference == Some(p)).count();
    let no_change = count(Preference::NoChange);
    let mut out = RecordSet::default();
    let mut classes = Vec::new();
    for (i, class) in [Preference::Warmer, Preference::Cooler].into_iter().enumerate() {
        let real_count = count(class);
        let deficit = no_change.saturating_sub(real_count);
        let grid = generate_augmentation(ranges, class)?;
        let target = ((ratio * deficit as f64).round() as usize).min(grid.len());
        let kept = balance_subsample(&grid, target, seed.wrapping_add(i as u64))?;
        classes.push(ClassAugmentation { class, real_count, deficit, generated: grid.len(), kept: kept.len() });
        out = out.concat(kept);
    }
    Ok((out, AugmentSummary { ratio, no_change_count: no_change, classes }))
}
