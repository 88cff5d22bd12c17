//! CSV ingestion for the two survey databases.
//!
//! A [`ColumnMapping`] is a small line-oriented `key = value` file:
//!
//! ```text
//! # comment lines start with '#'
//! id = db2
//! source = db2                      # rp884 | db2 | augmented
//! source_column = source            # optional: per-row source tag
//! na = <empty>, NA, na              # missing-value tokens; <empty> is the empty cell
//! extras = keep                     # keep | drop unmapped columns
//! air_temperature = Air temperature (C)
//! thermal_preference = Thermal preference
//! preference.cooler = 3, want cooler   # extra raw tokens per class
//! ```
//!
//! Everything after the first `=` is the value, so column names may contain
//! `=` or `#`. Field keys are those of [`Field::key`]; each may appear once.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{normalize_token, ComfortRecord, Field, Preference, Provenance, RecordSet, Source};
use crate::report::percent_2dp;

pub const DB2_MAPPING: &str = include_str!("../mappings/db2.map");
pub const RP884_MAPPING: &str = include_str!("../mappings/rp884.map");
pub const CANONICAL_MAPPING: &str = include_str!("../mappings/canonical.map");

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMapping {
    pub id: String,
    pub source: Source,
    pub source_column: Option<String>,
    pub na_tokens: Vec<String>,
    pub keep_extras: bool,
    pub columns: BTreeMap<Field, String>,
    /// Normalized raw token → class, consulted after the canonical spellings.
    pub preference_aliases: Vec<(String, Preference)>,
}

impl ColumnMapping {
    pub fn parse(text: &str) -> Result<Self> {
        let mut id = None;
        let mut source = None;
        let mut source_column = None;
        let mut na_tokens = None;
        let mut keep_extras = true;
        let mut columns = BTreeMap::new();
        let mut preference_aliases = Vec::new();

        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |reason: String| Error::MappingSyntax { line: line_no, reason };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value`".into()))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "id" => id = Some(value.to_string()),
                "source" => source = Some(Source::parse(value).ok_or_else(|| syntax(format!("unknown source `{value}`")))?),
                "source_column" => source_column = Some(value.to_string()),
                "na" => {
                    na_tokens = Some(
                        value
                            .split(',')
                            .map(|t| match t.trim() {
                                "<empty>" => String::new(),
                                other => other.to_string(),
                            })
                            .collect(),
                    )
                }
                "extras" => {
                    keep_extras = match value {
                        "keep" => true,
                        "drop" => false,
                        other => return Err(syntax(format!("extras must be keep|drop, got `{other}`"))),
                    }
                }
                _ if key.starts_with("preference.") => {
                    let class = match &key["preference.".len()..] {
                        "warmer" => Preference::Warmer,
                        "no_change" => Preference::NoChange,
                        "cooler" => Preference::Cooler,
                        other => return Err(syntax(format!("unknown preference class `{other}`"))),
                    };
                    for token in value.split(',') {
                        let token = normalize_token(token);
                        if !token.is_empty() {
                            preference_aliases.push((token, class));
                        }
                    }
                }
                _ => {
                    let field = Field::from_key(key).ok_or_else(|| syntax(format!("unknown key `{key}`")))?;
                    if value.is_empty() {
                        return Err(syntax(format!("empty column name for `{key}`")));
                    }
                    if columns.insert(field, value.to_string()).is_some() {
                        return Err(syntax(format!("`{key}` mapped twice")));
                    }
                }
            }
        }

        Ok(ColumnMapping {
            id: id.unwrap_or_else(|| "unnamed".into()),
            source: source.unwrap_or(Source::DatabaseII),
            source_column,
            na_tokens: na_tokens.unwrap_or_else(default_na_tokens),
            keep_extras,
            columns,
            preference_aliases,
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading mapping {}", path.display()), e))?;
        Self::parse(&text)
    }

    /// Built-in mappings by name: `db2`, `rp884`, `canonical`.
    pub fn builtin(name: &str) -> Option<Self> {
        let text = match name {
            "db2" => DB2_MAPPING,
            "rp884" => RP884_MAPPING,
            "canonical" => CANONICAL_MAPPING,
            _ => return None,
        };
        Some(Self::parse(text).expect("built-in mapping parses"))
    }

    /// Mapping for the CSV schema written by [`RecordSet::write_csv`].
    pub fn canonical() -> Self {
        Self::builtin("canonical").expect("canonical mapping")
    }

    fn is_na(&self, cell: &str) -> bool {
        let trimmed = cell.trim();
        self.na_tokens.iter().any(|t| t == trimmed)
    }

    fn parse_preference(&self, cell: &str) -> Option<Preference> {
        Preference::parse_canonical(cell).or_else(|| {
            let token = normalize_token(cell);
            self.preference_aliases.iter().find(|(raw, _)| *raw == token).map(|&(_, p)| p)
        })
    }
}

fn default_na_tokens() -> Vec<String> {
    vec![String::new(), "NA".into(), "na".into()]
}

/// A per-row problem found while loading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowIssue {
    /// 1-based data row index (the header is row 0).
    pub row: usize,
    pub field: Option<Field>,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct LoadOutcome {
    pub records: RecordSet,
    /// Data rows read from the file, including rejected ones.
    pub rows_read: usize,
    pub rejected: Vec<RowIssue>,
    /// Cells that were unparseable or out of vocabulary and loaded as missing.
    pub diagnostics: Vec<RowIssue>,
    pub missing: MissingReport,
}

/// Loads a survey CSV into the unified schema.
///
/// Unparseable cells and NA tokens load as missing. Rows whose sensation,
/// humidity or comfort vote is out of range are rejected and reported.
pub fn load_dataset(path: &Path, mapping: &ColumnMapping) -> Result<LoadOutcome> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut outcome = load_reader(std::io::BufReader::new(file), mapping)?;
    outcome.records.provenance = vec![Provenance {
        path: Some(path.to_path_buf()),
        mapping_id: mapping.id.clone(),
        loaded_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        rows: outcome.records.len(),
    }];
    Ok(outcome)
}

/// [`load_dataset`] over any reader; provenance is left empty.
pub fn load_reader<R: std::io::Read>(reader: R, mapping: &ColumnMapping) -> Result<LoadOutcome> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr
        .byte_headers()
        .map_err(|e| Error::csv("header", e))?
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let s = String::from_utf8_lossy(h);
            let s = if i == 0 { s.trim_start_matches('\u{feff}') } else { &s };
            s.trim().to_string()
        })
        .collect();
    let find = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| Error::MappingColumnAbsent(name.to_string()));

    let mut field_cols: Vec<(Field, usize)> = Vec::with_capacity(mapping.columns.len());
    for (&field, name) in &mapping.columns {
        field_cols.push((field, find(name)?));
    }
    let source_col = mapping.source_column.as_deref().map(find).transpose()?;

    let mut used = vec![false; header.len()];
    for &(_, c) in &field_cols {
        used[c] = true;
    }
    if let Some(c) = source_col {
        used[c] = true;
    }
    let extra_idx: Vec<usize> = if mapping.keep_extras { (0..header.len()).filter(|&i| !used[i]).collect() } else { Vec::new() };
    let extra_columns: Vec<String> = extra_idx.iter().map(|&i| header[i].clone()).collect();

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut diagnostics = Vec::new();
    let mut rows_read = 0usize;
    let mut raw = csv::ByteRecord::new();
    loop {
        let more = rdr.read_byte_record(&mut raw).map_err(|e| Error::csv(format!("data row {}", rows_read + 1), e))?;
        if !more {
            break;
        }
        rows_read += 1;
        let row = rows_read;
        let cell = |i: usize| -> std::borrow::Cow<'_, str> { raw.get(i).map(String::from_utf8_lossy).unwrap_or_default() };

        let mut source = mapping.source;
        if let Some(c) = source_col {
            let text = cell(c);
            match Source::parse(&text) {
                Some(s) => source = s,
                None if mapping.is_na(&text) => {}
                None => diagnostics.push(RowIssue { row, field: None, reason: format!("unknown source `{}`", text.trim()) }),
            }
        }
        let mut rec = ComfortRecord::empty(source);
        let mut reject: Option<RowIssue> = None;

        for &(field, c) in &field_cols {
            let text = cell(c);
            if mapping.is_na(&text) {
                continue;
            }
            match field {
                Field::ThermalPreference => match mapping.parse_preference(&text) {
                    Some(p) => rec.thermal_preference = Some(p),
                    None => diagnostics.push(RowIssue {
                        row,
                        field: Some(field),
                        reason: format!("unrecognised preference `{}`", text.trim()),
                    }),
                },
                Field::ThermalAcceptability => match parse_number(&text) {
                    Some(v) if v == 1.0 => rec.thermal_acceptability = Some(true),
                    Some(v) if v == 0.0 => rec.thermal_acceptability = Some(false),
                    _ => diagnostics.push(RowIssue {
                        row,
                        field: Some(field),
                        reason: format!("acceptability `{}` is not 0 or 1", text.trim()),
                    }),
                },
                _ => match parse_number(&text) {
                    Some(v) => {
                        if let Some(reason) = range_violation(field, v) {
                            if reject.is_none() {
                                reject = Some(RowIssue { row, field: Some(field), reason });
                            }
                        }
                        *rec.numeric_mut(field).expect("numeric field") = Some(v);
                    }
                    None => diagnostics.push(RowIssue {
                        row,
                        field: Some(field),
                        reason: format!("unparseable number `{}`", text.trim()),
                    }),
                },
            }
        }

        if let Some(issue) = reject {
            rejected.push(issue);
            continue;
        }
        if !extra_idx.is_empty() {
            rec.extras = extra_idx.iter().map(|&i| cell(i).into_owned()).collect();
        }
        records.push(rec);
    }

    let records = RecordSet { records, extra_columns, provenance: Vec::new() };
    let missing = missing_data_report(&records);
    Ok(LoadOutcome { records, rows_read, rejected, diagnostics, missing })
}

fn parse_number(text: &str) -> Option<f64> {
    text.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn range_violation(field: Field, v: f64) -> Option<String> {
    let (lo, hi) = match field {
        Field::ThermalSensation => (-3.0, 3.0),
        Field::RelativeHumidity => (0.0, 100.0),
        Field::ThermalComfort => (1.0, 6.0),
        _ => return None,
    };
    if v < lo || v > hi {
        Some(format!("{} = {v} outside [{lo}, {hi}]", field.key()))
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMissing {
    pub field: Field,
    pub missing: usize,
    pub present: usize,
    /// Percentage of total rows, two decimals, rounded half up.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingReport {
    pub total_rows: usize,
    pub fields: Vec<FieldMissing>,
}

impl MissingReport {
    pub fn get(&self, field: Field) -> &FieldMissing {
        self.fields.iter().find(|f| f.field == field).expect("every field is reported")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per field: `field,missing,present,percent`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("field,missing,present,percent\n");
        for f in &self.fields {
            out.push_str(&format!("{},{},{},{:.2}\n", f.field.key(), f.missing, f.present, f.percent));
        }
        out
    }
}

pub fn missing_data_report(records: &RecordSet) -> MissingReport {
    let total = records.len();
    let fields = Field::ALL
        .iter()
        .map(|&field| {
            let missing = records.iter().filter(|r| r.is_missing(field)).count();
            FieldMissing { field, missing, present: total - missing, percent: percent_2dp(missing, total) }
        })
        .collect();
    MissingReport { total_rows: total, fields }
}
