use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{DistancePair, TrialKind};
use crate::interaction::Condition;

pub const CSV_HEADER: &str =
    "participant,condition,trial,pair,thumbnail_ms,button_ms,total_ms,errors,detours,training,discarded";

/// Measured outcome of one window switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub participant: u32,
    pub condition: Condition,
    pub trial: usize,
    pub pair: DistancePair,
    pub thumbnail_ms: u64,
    pub button_ms: u64,
    pub total_ms: u64,
    /// Wrong thumbnails confirmed.
    pub errors: u32,
    /// Wrong categories opened; not counted as errors.
    pub detours: u32,
    pub training: bool,
    pub discarded: bool,
}

impl TrialRecord {
    pub fn kind(&self) -> TrialKind {
        match (self.training, self.discarded) {
            (true, _) => TrialKind::Training,
            (false, true) => TrialKind::Discarded,
            (false, false) => TrialKind::Recorded,
        }
    }

    pub fn is_recorded(&self) -> bool {
        !self.training && !self.discarded
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.participant,
            self.condition,
            self.trial,
            self.pair,
            self.thumbnail_ms,
            self.button_ms,
            self.total_ms,
            self.errors,
            self.detours,
            self.training as u8,
            self.discarded as u8
        )
    }

    /// Header plus one row per record.
    pub fn to_csv<'a>(records: impl IntoIterator<Item = &'a TrialRecord>) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in records {
            let _ = writeln!(out, "{}", r.to_csv_row());
        }
        out
    }

    pub fn parse_row(row: &str) -> Result<Self, String> {
        let f: Vec<&str> = row.split(',').map(str::trim).collect();
        if f.len() != 11 {
            return Err(format!("expected 11 fields, found {}", f.len()));
        }
        fn num<T: std::str::FromStr>(name: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad {name} `{v}`"))
        }
        fn flag(name: &str, v: &str) -> Result<bool, String> {
            match v {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(format!("bad {name} flag `{v}`")),
            }
        }
        let rec = TrialRecord {
            participant: num("participant", f[0])?,
            condition: f[1].parse()?,
            trial: num("trial", f[2])?,
            pair: f[3].parse()?,
            thumbnail_ms: num("thumbnail_ms", f[4])?,
            button_ms: num("button_ms", f[5])?,
            total_ms: num("total_ms", f[6])?,
            errors: num("errors", f[7])?,
            detours: num("detours", f[8])?,
            training: flag("training", f[9])?,
            discarded: flag("discarded", f[10])?,
        };
        if rec.thumbnail_ms.checked_add(rec.button_ms) != Some(rec.total_ms) {
            return Err("total_ms differs from thumbnail_ms + button_ms".into());
        }
        if rec.training && rec.discarded {
            return Err("row flagged both training and discarded".into());
        }
        Ok(rec)
    }
}

/// A rejected CSV line; `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvIssue {
    pub line: usize,
    pub msg: String,
}

/// Parses a trial table. Valid rows and problems are both returned so the
/// caller decides whether problems are fatal.
pub fn parse_records(text: &str) -> (Vec<TrialRecord>, Vec<CsvIssue>) {
    let mut records = Vec::new();
    let mut issues = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((_, h)) => issues.push(CsvIssue {
            line: 1,
            msg: format!("unexpected header `{h}`"),
        }),
        None => issues.push(CsvIssue {
            line: 1,
            msg: "empty file".into(),
        }),
    }
    for (i, row) in lines {
        if row.trim().is_empty() {
            continue;
        }
        match TrialRecord::parse_row(row) {
            Ok(r) => records.push(r),
            Err(msg) => issues.push(CsvIssue { line: i + 1, msg }),
        }
    }
    (records, issues)
}
