//! Run reports emitted by the command-line tool.
//!
//! JSON reports are a single object whose keys follow struct declaration
//! order. CSV reports carry the configuration and ledger in a `#`-prefixed
//! preamble, followed by `index,re,im,energy` rows. Nothing time-dependent
//! is written unless timing is requested, so a fixed configuration and seed
//! reproduce the same bytes.

use std::fmt::Write as _;

use serde::Serialize;

use crate::dft::Complex;
use crate::ledger::QueryLedger;
use crate::qdft1d::TraceStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Echo of the settings a run was made with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub epsilon: f64,
    pub seed: u64,
    pub inputs: Vec<String>,
    pub output: Option<String>,
    pub format: Format,
    pub literal_oracle: bool,
    pub exhaustive_2d: bool,
    pub budget_multiplier: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEntry {
    /// `k` for 1D positions, `i:j` for matrix positions.
    pub index: String,
    pub re: f64,
    pub im: f64,
    pub energy: f64,
}

impl ReportEntry {
    pub fn new(index: impl Into<String>, c: Complex) -> Self {
        ReportEntry {
            index: index.into(),
            re: tidy(c.re),
            im: tidy(c.im),
            energy: c.norm_sqr(),
        }
    }
}

/// Folds negative zero into positive zero so `-0` never reaches the output.
fn tidy(v: f64) -> f64 {
    v + 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub entries: Vec<ReportEntry>,
    /// Number of retained coefficients (`nS`).
    pub found: usize,
    pub residual_energy: f64,
    pub total_energy: f64,
    pub ledger: QueryLedger,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_l2_error: Option<f64>,
    pub trace: Vec<TraceStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

pub fn emit_report(report: &RunReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("report is serializable");
            out.push(b'\n');
            out
        }
        Format::Csv => emit_csv(report).into_bytes(),
    }
}

fn emit_csv(r: &RunReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let _ = writeln!(s, "# subcommand={}", c.subcommand);
    let _ = writeln!(s, "# epsilon={}", c.epsilon);
    let _ = writeln!(s, "# seed={}", c.seed);
    let _ = writeln!(s, "# inputs={}", c.inputs.join(";"));
    let _ = writeln!(s, "# literal_oracle={}", c.literal_oracle);
    let _ = writeln!(s, "# exhaustive_2d={}", c.exhaustive_2d);
    let _ = writeln!(s, "# budget_multiplier={}", c.budget_multiplier);
    if let Some(b) = c.block {
        let _ = writeln!(s, "# block={b}");
    }
    let _ = writeln!(s, "# found={}", r.found);
    let _ = writeln!(s, "# residual_energy={}", r.residual_energy);
    let _ = writeln!(s, "# total_energy={}", r.total_energy);
    let l = &r.ledger;
    let _ = writeln!(s, "# grover_iterations={}", l.grover_iterations);
    let _ = writeln!(s, "# measurements={}", l.measurements);
    let _ = writeln!(s, "# subroutine_calls={}", l.subroutine_calls);
    let _ = writeln!(s, "# classical_verifications={}", l.classical_verifications);
    let _ = writeln!(s, "# predicate_evaluations={}", l.predicate_evaluations);
    let _ = writeln!(s, "# budget_exhaustions={}", l.budget_exhaustions);
    if let Some(e) = r.relative_l2_error {
        let _ = writeln!(s, "# relative_l2_error={e}");
    }
    if let Some(ms) = r.wall_clock_ms {
        let _ = writeln!(s, "# wall_clock_ms={ms}");
    }
    s.push_str("index,re,im,energy\n");
    for e in &r.entries {
        let _ = writeln!(s, "{},{},{},{}", e.index, e.re, e.im, e.energy);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            subcommand: "dft1d".into(),
            epsilon: 0.01,
            seed: 7,
            inputs: vec!["x.csv".into()],
            output: None,
            format: Format::Json,
            literal_oracle: false,
            exhaustive_2d: false,
            budget_multiplier: 64.0,
            block: None,
        }
    }

    fn report(entries: Vec<ReportEntry>) -> RunReport {
        RunReport {
            config: config(),
            found: entries.len(),
            entries,
            residual_energy: 0.0,
            total_energy: 4.0,
            ledger: QueryLedger::default(),
            relative_l2_error: None,
            trace: vec![],
            wall_clock_ms: None,
        }
    }

    #[test]
    fn empty_spectrum_json() {
        let out = String::from_utf8(emit_report(&report(vec![]), Format::Json)).unwrap();
        assert!(out.contains("\"entries\": []"));
        assert!(out.contains("\"grover_iterations\": 0"));
        assert!(out.contains("\"budget_exhaustions\": 0"));
        assert!(!out.contains("wall_clock_ms"));
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v.is_object());
    }

    #[test]
    fn csv_rows() {
        let r = report(vec![ReportEntry::new("0", Complex::new(2.0, -0.0))]);
        let out = String::from_utf8(emit_report(&r, Format::Csv)).unwrap();
        let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["index,re,im,energy", "0,2,0,4"]);
    }

    #[test]
    fn key_order_is_stable() {
        let out = String::from_utf8(emit_report(&report(vec![]), Format::Json)).unwrap();
        let keys = ["\"config\"", "\"entries\"", "\"found\"", "\"residual_energy\"", "\"ledger\"", "\"trace\""];
        let positions: Vec<usize> = keys.iter().map(|k| out.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }
}
