//! Line-JSON report assembly with a CSV mirror.  Everything is accumulated in
//! memory, sorted where order is not structural, and written in one pass so
//! that a rerun with the same config is byte-identical.

use czgrid_core::maximal::{MaximalRecord, MaximalReport};
use serde::Serialize;
use std::path::{Path, PathBuf};

pub const SCHEMA: &str = "czgrid/1";

#[derive(Serialize)]
struct RecordLine<'a> {
    kind: &'static str,
    experiment: &'a str,
    trial: u32,
    param: f64,
    value: f64,
}

#[derive(Serialize)]
struct CountsLine<'a> {
    kind: &'static str,
    experiment: &'a str,
    trials: u32,
    skipped: u32,
    failures: u32,
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    kind: &'static str,
    experiment: &'a str,
    name: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct StatusLine {
    kind: &'static str,
    pass: bool,
}

pub struct Report {
    jsonl: Vec<String>,
    csv: Vec<String>,
}

impl Report {
    pub fn new(meta: impl Serialize, csv_header: &str) -> Report {
        let mut r = Report { jsonl: Vec::new(), csv: vec![csv_header.to_string()] };
        r.json(meta);
        r
    }

    pub fn json(&mut self, line: impl Serialize) {
        self.jsonl.push(serde_json::to_string(&line).expect("report lines serialize"));
    }

    pub fn csv(&mut self, row: String) {
        self.csv.push(row);
    }

    /// Appends one checker report: records sorted by (trial, param), then the
    /// counts line, then the summary stats, mirroring records into the CSV.
    pub fn maximal(&mut self, rep: &MaximalReport) {
        let mut records: Vec<&MaximalRecord> = rep.records.iter().collect();
        records.sort_by(|a, b| a.trial.cmp(&b.trial).then(a.param.total_cmp(&b.param)));
        for r in records {
            self.json(RecordLine {
                kind: "record",
                experiment: &rep.experiment,
                trial: r.trial,
                param: r.param,
                value: r.value,
            });
            self.csv(format!("{},{},{},{},{}", rep.experiment, r.seed, r.trial, r.param, r.value));
        }
        self.json(CountsLine {
            kind: "counts",
            experiment: &rep.experiment,
            trials: rep.trials,
            skipped: rep.skipped,
            failures: rep.failures,
        });
        for s in &rep.summary {
            self.json(SummaryLine {
                kind: "summary",
                experiment: &rep.experiment,
                name: &s.name,
                value: s.value,
            });
        }
    }

    pub fn status(&mut self, pass: bool) {
        self.json(StatusLine { kind: "status", pass });
    }

    /// Writes the line-JSON to `out` and the CSV next to it (`.csv`), or
    /// nowhere when no output path was requested.
    pub fn write(self, out: Option<&Path>) -> Result<(), String> {
        let Some(path) = out else { return Ok(()) };
        let jsonl = self.jsonl.join("\n") + "\n";
        std::fs::write(path, jsonl).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        let csv_path: PathBuf = path.with_extension("csv");
        let csv = self.csv.join("\n") + "\n";
        std::fs::write(&csv_path, csv)
            .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?;
        Ok(())
    }
}
