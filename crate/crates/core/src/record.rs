//! Unified survey-record schema shared by both source databases and the
//! augmentation generator.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Desired change in the thermal environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Preference {
    Warmer,
    NoChange,
    Cooler,
}

impl Preference {
    pub const ALL: [Preference; 3] = [Preference::Warmer, Preference::NoChange, Preference::Cooler];

    /// Canonical spelling used in written CSVs.
    pub fn as_str(self) -> &'static str {
        match self {
            Preference::Warmer => "warmer",
            Preference::NoChange => "no change",
            Preference::Cooler => "cooler",
        }
    }

    /// Case-insensitive parse of the three canonical spellings.
    pub fn parse_canonical(raw: &str) -> Option<Self> {
        match normalize_token(raw).as_str() {
            "warmer" => Some(Preference::Warmer),
            "no change" => Some(Preference::NoChange),
            "cooler" => Some(Preference::Cooler),
            _ => None,
        }
    }
}

impl fmt::Display for Preference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Trimmed, lowercased, single-spaced form of a categorical cell.
pub(crate) fn normalize_token(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Three-class training target: -1 needs warmer, 0 no change, +1 needs cooler.
///
/// The derived ordering follows the numeric value, so `min` over labels
/// gives the deterministic tie-break winner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum ClassLabel {
    Warmer = -1,
    NoChange = 0,
    Cooler = 1,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [ClassLabel::Warmer, ClassLabel::NoChange, ClassLabel::Cooler];

    pub fn value(self) -> i8 {
        self as i8
    }

    /// Dense index 0..3 in label order.
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }

    pub fn from_value(value: i8) -> Option<Self> {
        match value {
            -1 => Some(ClassLabel::Warmer),
            0 => Some(ClassLabel::NoChange),
            1 => Some(ClassLabel::Cooler),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Warmer => "Warmer",
            ClassLabel::NoChange => "NoChange",
            ClassLabel::Cooler => "Cooler",
        }
    }
}

impl From<ClassLabel> for i8 {
    fn from(label: ClassLabel) -> i8 {
        label.value()
    }
}

impl TryFrom<i8> for ClassLabel {
    type Error = String;

    fn try_from(value: i8) -> std::result::Result<Self, Self::Error> {
        ClassLabel::from_value(value).ok_or_else(|| format!("invalid class label {value}"))
    }
}

impl From<Preference> for ClassLabel {
    fn from(p: Preference) -> Self {
        match p {
            Preference::Warmer => ClassLabel::Warmer,
            Preference::NoChange => ClassLabel::NoChange,
            Preference::Cooler => ClassLabel::Cooler,
        }
    }
}

impl From<ClassLabel> for Preference {
    fn from(label: ClassLabel) -> Self {
        match label {
            ClassLabel::Warmer => Preference::Warmer,
            ClassLabel::NoChange => Preference::NoChange,
            ClassLabel::Cooler => Preference::Cooler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Source {
    RP884,
    DatabaseII,
    Augmented,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::RP884 => "rp884",
            Source::DatabaseII => "db2",
            Source::Augmented => "augmented",
        }
    }

    pub fn parse(raw: &str) -> Option<Self> {
        match normalize_token(raw).as_str() {
            "rp884" | "rp-884" => Some(Source::RP884),
            "db2" | "databaseii" | "database ii" => Some(Source::DatabaseII),
            "augmented" => Some(Source::Augmented),
            _ => None,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Modeled fields of a [`ComfortRecord`], in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Field {
    AirTemperature,
    RelativeHumidity,
    ClothingInsulation,
    MetabolicRate,
    Age,
    ThermalSensation,
    ThermalAcceptability,
    ThermalPreference,
    ThermalComfort,
}

impl Field {
    pub const ALL: [Field; 9] = [
        Field::AirTemperature,
        Field::RelativeHumidity,
        Field::ClothingInsulation,
        Field::MetabolicRate,
        Field::Age,
        Field::ThermalSensation,
        Field::ThermalAcceptability,
        Field::ThermalPreference,
        Field::ThermalComfort,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Field::AirTemperature => "air_temperature",
            Field::RelativeHumidity => "relative_humidity",
            Field::ClothingInsulation => "clothing_insulation",
            Field::MetabolicRate => "metabolic_rate",
            Field::Age => "age",
            Field::ThermalSensation => "thermal_sensation",
            Field::ThermalAcceptability => "thermal_acceptability",
            Field::ThermalPreference => "thermal_preference",
            Field::ThermalComfort => "thermal_comfort",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.key() == key)
    }
}

/// One survey entry. Every measured or voted field may be missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComfortRecord {
    pub air_temperature: Option<f64>,
    pub relative_humidity: Option<f64>,
    pub clothing_insulation: Option<f64>,
    pub metabolic_rate: Option<f64>,
    pub age: Option<f64>,
    pub thermal_sensation: Option<f64>,
    /// `true` = acceptable (1), `false` = unacceptable (0).
    pub thermal_acceptability: Option<bool>,
    pub thermal_preference: Option<Preference>,
    pub thermal_comfort: Option<f64>,
    pub source: Source,
    /// Unmodeled source cells, aligned with [`RecordSet::extra_columns`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extras: Vec<String>,
}

impl ComfortRecord {
    pub fn empty(source: Source) -> Self {
        ComfortRecord {
            air_temperature: None,
            relative_humidity: None,
            clothing_insulation: None,
            metabolic_rate: None,
            age: None,
            thermal_sensation: None,
            thermal_acceptability: None,
            thermal_preference: None,
            thermal_comfort: None,
            source,
            extras: Vec::new(),
        }
    }

    pub fn is_missing(&self, field: Field) -> bool {
        match field {
            Field::AirTemperature => self.air_temperature.is_none(),
            Field::RelativeHumidity => self.relative_humidity.is_none(),
            Field::ClothingInsulation => self.clothing_insulation.is_none(),
            Field::MetabolicRate => self.metabolic_rate.is_none(),
            Field::Age => self.age.is_none(),
            Field::ThermalSensation => self.thermal_sensation.is_none(),
            Field::ThermalAcceptability => self.thermal_acceptability.is_none(),
            Field::ThermalPreference => self.thermal_preference.is_none(),
            Field::ThermalComfort => self.thermal_comfort.is_none(),
        }
    }

    pub(crate) fn numeric_mut(&mut self, field: Field) -> Option<&mut Option<f64>> {
        match field {
            Field::AirTemperature => Some(&mut self.air_temperature),
            Field::RelativeHumidity => Some(&mut self.relative_humidity),
            Field::ClothingInsulation => Some(&mut self.clothing_insulation),
            Field::MetabolicRate => Some(&mut self.metabolic_rate),
            Field::Age => Some(&mut self.age),
            Field::ThermalSensation => Some(&mut self.thermal_sensation),
            Field::ThermalComfort => Some(&mut self.thermal_comfort),
            Field::ThermalAcceptability | Field::ThermalPreference => None,
        }
    }

    /// Cell text for the canonical CSV; missing values are empty.
    pub fn cell(&self, field: Field) -> String {
        fn num(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        match field {
            Field::AirTemperature => num(self.air_temperature),
            Field::RelativeHumidity => num(self.relative_humidity),
            Field::ClothingInsulation => num(self.clothing_insulation),
            Field::MetabolicRate => num(self.metabolic_rate),
            Field::Age => num(self.age),
            Field::ThermalSensation => num(self.thermal_sensation),
            Field::ThermalAcceptability => match self.thermal_acceptability {
                Some(true) => "1".into(),
                Some(false) => "0".into(),
                None => String::new(),
            },
            Field::ThermalPreference => self.thermal_preference.map(|p| p.as_str().to_string()).unwrap_or_default(),
            Field::ThermalComfort => num(self.thermal_comfort),
        }
    }
}

/// Where a block of records came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub path: Option<PathBuf>,
    pub mapping_id: String,
    /// Seconds since the Unix epoch at load time.
    pub loaded_at: u64,
    pub rows: usize,
}

/// Ordered records plus provenance. Row order is source-file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecordSet {
    pub records: Vec<ComfortRecord>,
    pub extra_columns: Vec<String>,
    pub provenance: Vec<Provenance>,
}

impl RecordSet {
    pub fn new(records: Vec<ComfortRecord>) -> Self {
        RecordSet { records, extra_columns: Vec::new(), provenance: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComfortRecord> {
        self.records.iter()
    }

    /// New set with the same extras layout holding `records`.
    pub fn with_records(&self, records: Vec<ComfortRecord>) -> Self {
        RecordSet { records, extra_columns: self.extra_columns.clone(), provenance: self.provenance.clone() }
    }

    /// Appends `other` after `self`. Extras columns are merged by name.
    pub fn concat(mut self, other: RecordSet) -> RecordSet {
        if self.extra_columns == other.extra_columns {
            self.records.extend(other.records);
            self.provenance.extend(other.provenance);
            return self;
        }
        let mut columns = self.extra_columns.clone();
        for c in &other.extra_columns {
            if !columns.contains(c) {
                columns.push(c.clone());
            }
        }
        let remap = |set_cols: &[String], mut rec: ComfortRecord| {
            if rec.extras.is_empty() && set_cols.is_empty() {
                rec.extras = vec![String::new(); columns.len()];
                return rec;
            }
            let mut extras = vec![String::new(); columns.len()];
            for (name, value) in set_cols.iter().zip(rec.extras.drain(..)) {
                let at = columns.iter().position(|c| c == name).expect("merged column");
                extras[at] = value;
            }
            rec.extras = extras;
            rec
        };
        let left_cols = std::mem::take(&mut self.extra_columns);
        let mut records: Vec<ComfortRecord> = self.records.into_iter().map(|r| remap(&left_cols, r)).collect();
        records.extend(other.records.into_iter().map(|r| remap(&other.extra_columns, r)));
        let mut provenance = self.provenance;
        provenance.extend(other.provenance);
        RecordSet { records, extra_columns: columns, provenance }
    }

    /// Writes the canonical CSV schema: modeled fields, `source`, then extras.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().from_writer(writer);
        let mut header: Vec<&str> = Field::ALL.iter().map(|f| f.key()).collect();
        header.push("source");
        header.extend(self.extra_columns.iter().map(String::as_str));
        w.write_record(&header).map_err(|e| Error::csv("record header", e))?;
        let mut row: Vec<String> = Vec::with_capacity(header.len());
        for rec in &self.records {
            row.clear();
            row.extend(Field::ALL.iter().map(|&f| rec.cell(f)));
            row.push(rec.source.as_str().to_string());
            for i in 0..self.extra_columns.len() {
                row.push(rec.extras.get(i).cloned().unwrap_or_default());
            }
            w.write_record(&row).map_err(|e| Error::csv("record row", e))?;
        }
        w.flush().map_err(|e| Error::io("flushing record CSV", e))?;
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(buf)
    }
}

impl<'a> IntoIterator for &'a RecordSet {
    type Item = &'a ComfortRecord;
    type IntoIter = std::slice::Iter<'a, ComfortRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

/// Maps a preference to its training label; missing stays missing.
pub fn derive_label(record: &ComfortRecord) -> Option<ClassLabel> {
    record.thermal_preference.map(ClassLabel::from)
}
