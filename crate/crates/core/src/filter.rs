//! Five-rule vote consistency filter.
//!
//! Each rule compares two subjective votes of the same entry. A rule is
//! not applicable when either vote it reads is missing, and a
//! non-applicable rule never removes an entry.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::record::{ComfortRecord, Preference, RecordSet};
use crate::report::percent_2dp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Consistent,
    Inconsistent,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleVerdict {
    pub rule_id: u8,
    pub outcome: Outcome,
}

pub const RULE_COUNT: usize = 5;

/// Human-readable names, indexed by `rule_id - 1`.
pub const RULE_NAMES: [&str; RULE_COUNT] = [
    "Thermal Acceptability vs Thermal Preference",
    "Thermal Sensation vs Thermal Acceptability",
    "Thermal Sensation vs Thermal Preference",
    "Thermal Comfort vs Thermal Preference",
    "Thermal Comfort vs Thermal Sensation",
];

fn consistent_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Consistent
    } else {
        Outcome::Inconsistent
    }
}

pub fn evaluate_rule(rule_id: u8, record: &ComfortRecord) -> Result<RuleVerdict> {
    use Preference::*;
    let acc = record.thermal_acceptability;
    let pref = record.thermal_preference;
    let tsv = record.thermal_sensation;
    let comfort = record.thermal_comfort;

    let outcome = match rule_id {
        1 => match (acc, pref) {
            (Some(a), Some(p)) => consistent_if(matches!((a, p), (true, NoChange) | (false, Cooler) | (false, Warmer))),
            _ => Outcome::NotApplicable,
        },
        2 => match (acc, tsv) {
            (Some(a), Some(s)) => {
                let bad = (a && s.abs() > 2.0) || (!a && s.abs() <= 1.0);
                consistent_if(!bad)
            }
            _ => Outcome::NotApplicable,
        },
        3 => match (pref, tsv) {
            (Some(p), Some(s)) => {
                let ok = (p == Warmer && s < -2.0)
                    || (p == Cooler && s > 2.0)
                    || (p == NoChange && s.abs() <= 1.0)
                    || (s > 1.0 && s < 2.0 && matches!(p, Cooler | NoChange))
                    || (s < -1.0 && s > -2.0 && matches!(p, Warmer | NoChange));
                consistent_if(ok)
            }
            _ => Outcome::NotApplicable,
        },
        4 => match (comfort, pref) {
            (Some(c), Some(p)) => {
                let bad = (c == 1.0 && p == NoChange) || (c == 6.0 && matches!(p, Cooler | Warmer));
                consistent_if(!bad)
            }
            _ => Outcome::NotApplicable,
        },
        5 => match (comfort, tsv) {
            (Some(c), Some(s)) => {
                let bad = (c == 1.0 && s.abs() <= 2.0) || (c == 6.0 && s.abs() > 2.0);
                consistent_if(!bad)
            }
            _ => Outcome::NotApplicable,
        },
        other => return Err(Error::InvalidRuleId(other)),
    };
    Ok(RuleVerdict { rule_id, outcome })
}

/// Bitmask of violated rules; bit `i` is rule `i + 1`.
fn violations(record: &ComfortRecord) -> u8 {
    (1..=RULE_COUNT as u8).fold(0u8, |mask, id| {
        let v = evaluate_rule(id, record).expect("rule id in range");
        if v.outcome == Outcome::Inconsistent {
            mask | (1 << (id - 1))
        } else {
            mask
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleCount {
    pub rule_id: u8,
    pub inconsistent: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total: usize,
    pub per_rule: Vec<RuleCount>,
    pub retained: usize,
    pub filtered: usize,
    pub filtered_percent: f64,
}

impl FilterReport {
    fn from_masks(masks: &[u8]) -> Self {
        let total = masks.len();
        let per_rule = (0..RULE_COUNT)
            .map(|i| {
                let n = masks.iter().filter(|&&m| m & (1 << i) != 0).count();
                RuleCount { rule_id: i as u8 + 1, inconsistent: n, percent: percent_2dp(n, total) }
            })
            .collect();
        let filtered = masks.iter().filter(|&&m| m != 0).count();
        FilterReport { total, per_rule, retained: total - filtered, filtered, filtered_percent: percent_2dp(filtered, total) }
    }

    pub fn rule(&self, rule_id: u8) -> &RuleCount {
        &self.per_rule[rule_id as usize - 1]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub const CSV_HEADER: &'static str = "dataset,entries,inconsistency_1,pct_inconsistency_1,\
inconsistency_2,pct_inconsistency_2,inconsistency_3,pct_inconsistency_3,\
inconsistency_4,pct_inconsistency_4,inconsistency_5,pct_inconsistency_5,\
retained,filtered,pct_filtered";

    /// One CSV data row in the per-rule table layout.
    pub fn csv_row(&self, dataset: &str) -> String {
        let mut row = format!("{},{}", csv_escape(dataset), self.total);
        for r in &self.per_rule {
            row.push_str(&format!(",{},{:.2}", r.inconsistent, r.percent));
        }
        row.push_str(&format!(",{},{},{:.2}", self.retained, self.filtered, self.filtered_percent));
        row
    }

    pub fn to_csv(&self, dataset: &str) -> String {
        format!("{}\n{}\n", Self::CSV_HEADER, self.csv_row(dataset))
    }
}

pub(crate) fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Keeps every record that no rule marks inconsistent, in source order.
pub fn filter_dataset(records: &RecordSet) -> (RecordSet, FilterReport) {
    let masks: Vec<u8> = records.records.par_iter().map(violations).collect();
    let retained = records.iter().zip(&masks).filter(|(_, &m)| m == 0).map(|(r, _)| r.clone()).collect();
    (records.with_records(retained), FilterReport::from_masks(&masks))
}
