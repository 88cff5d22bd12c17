//! Tabular summaries shared by the pipeline commands.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::filter::{csv_escape, FilterReport, RuleCount, RULE_COUNT};
use crate::ingest::MissingReport;
use crate::model::EvalReport;
use crate::record::Field;

/// `100 * count / total` to two decimals, halves rounded up. Exact in
/// integer arithmetic; `0.0` for an empty total.
pub fn percent_2dp(count: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let (c, t) = (count as u128, total as u128);
    let hundredths = (c * 20_000 + t) / (2 * t);
    hundredths as f64 / 100.0
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Adds the per-dataset filter reports into an overall row.
pub fn combine_filter_reports(reports: &[&FilterReport]) -> FilterReport {
    let total: usize = reports.iter().map(|r| r.total).sum();
    let filtered: usize = reports.iter().map(|r| r.filtered).sum();
    let per_rule = (0..RULE_COUNT)
        .map(|i| {
            let n = reports.iter().map(|r| r.per_rule[i].inconsistent).sum();
            RuleCount { rule_id: i as u8 + 1, inconsistent: n, percent: percent_2dp(n, total) }
        })
        .collect();
    FilterReport { total, per_rule, retained: total - filtered, filtered, filtered_percent: percent_2dp(filtered, total) }
}

/// Per-rule table, one row per named dataset plus a `TOTAL` row when more
/// than one dataset is given.
pub fn filter_table(rows: &[(String, FilterReport)]) -> String {
    let mut out = format!("{}\n", FilterReport::CSV_HEADER);
    for (name, r) in rows {
        out.push_str(&r.csv_row(name));
        out.push('\n');
    }
    if rows.len() > 1 {
        let refs: Vec<&FilterReport> = rows.iter().map(|(_, r)| r).collect();
        out.push_str(&combine_filter_reports(&refs).csv_row("TOTAL"));
        out.push('\n');
    }
    out
}

const MISSING_FIELDS: [(Field, &str); 5] = [
    (Field::AirTemperature, "temperature"),
    (Field::RelativeHumidity, "humidity"),
    (Field::ClothingInsulation, "clothing"),
    (Field::Age, "age"),
    (Field::MetabolicRate, "metabolic_rate"),
];

/// Missing-value table over the five model inputs.
pub fn missing_table(rows: &[(String, MissingReport)]) -> String {
    let mut out = String::from("dataset,entries");
    for (_, name) in MISSING_FIELDS {
        out.push_str(&format!(",missing_{name},pct_missing_{name}"));
    }
    out.push('\n');
    let mut line = |name: &str, total: usize, counts: &[usize]| {
        out.push_str(&format!("{},{}", csv_escape(name), total));
        for &c in counts {
            out.push_str(&format!(",{},{:.2}", c, percent_2dp(c, total)));
        }
        out.push('\n');
    };
    let mut sums = [0usize; 5];
    let mut grand = 0;
    for (name, r) in rows {
        let counts: Vec<usize> = MISSING_FIELDS.iter().map(|(f, _)| r.get(*f).missing).collect();
        for (s, c) in sums.iter_mut().zip(&counts) {
            *s += c;
        }
        grand += r.total_rows;
        line(name, r.total_rows, &counts);
    }
    if rows.len() > 1 {
        line("TOTAL", grand, &sums);
    }
    out
}

/// One accuracy cell of the method-by-variant comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyCell {
    pub method: String,
    pub variant: String,
    pub accuracy: f64,
}

impl AccuracyCell {
    pub fn from_report(variant: &str, report: &EvalReport) -> Self {
        AccuracyCell { method: report.method.display_name().to_string(), variant: variant.to_string(), accuracy: report.accuracy }
    }
}

/// Methods as rows, variants as columns, in first-seen order, followed by
/// an `Average` row over the methods present in each column.
pub fn accuracy_table(cells: &[AccuracyCell]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut variants: Vec<&str> = Vec::new();
    for c in cells {
        if !methods.contains(&c.method.as_str()) {
            methods.push(&c.method);
        }
        if !variants.contains(&c.variant.as_str()) {
            variants.push(&c.variant);
        }
    }
    let lookup = |m: &str, v: &str| cells.iter().find(|c| c.method == m && c.variant == v).map(|c| c.accuracy);
    let mut out = String::from("method");
    for v in &variants {
        out.push(',');
        out.push_str(&csv_escape(v));
    }
    out.push('\n');
    for m in &methods {
        out.push_str(&csv_escape(m));
        for v in &variants {
            match lookup(m, v) {
                Some(a) => out.push_str(&format!(",{a:.2}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out.push_str("Average");
    for v in &variants {
        let col: Vec<f64> = methods.iter().filter_map(|m| lookup(m, v)).collect();
        out.push_str(&format!(",{:.2}", col.iter().sum::<f64>() / col.len() as f64));
    }
    out.push('\n');
    out
}
