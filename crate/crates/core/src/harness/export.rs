//! CSV output. Wall-clock times go to a separate text log so that the CSV
//! files are a pure function of (config, seed).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{CellResult, ExperimentResults, TransferMatrix};
use crate::error::{Error, Result};
use crate::impairments::ChannelKind;

pub const HISTORY_FILE: &str = "history.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRANSFER_FILE: &str = "transfer.csv";
pub const TIMING_FILE: &str = "timing.log";

const HISTORY_HEADER: [&str; 11] = [
    "experiment",
    "seed",
    "channel",
    "snr_db",
    "epsilon",
    "target",
    "iteration",
    "updates",
    "feedback_count",
    "fooling_rate",
    "mean_reward",
];

const SUMMARY_HEADER: [&str; 13] = [
    "experiment",
    "seed",
    "channel",
    "snr_db",
    "epsilon",
    "target",
    "heldout_accuracy",
    "initial_fooling",
    "final_fooling",
    "converged",
    "convergence_updates",
    "iterations",
    "feedback_count",
];

/// At most 6 significant digits, shortest form (`0.98`, `1`, `inf`).
pub fn format_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn channel_name(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::Awgn => "awgn",
        ChannelKind::Dynamic => "dynamic",
    }
}

/// Writes `rows` to `path` via a temporary file and a rename.
fn write_atomic(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let tmp: PathBuf = path.with_extension("csv.tmp");
    let mut w = csv::Writer::from_path(&tmp).map_err(|e| csv_err(&tmp, e))?;
    w.write_record(header).map_err(|e| csv_err(&tmp, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| csv_err(&tmp, e))?;
    }
    w.flush().map_err(|e| Error::io(tmp.clone(), e))?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

fn key_fields(c: &CellResult) -> Vec<String> {
    vec![
        c.key.experiment.name().to_string(),
        c.key.seed.to_string(),
        channel_name(c.key.channel).to_string(),
        format_sig6(c.key.snr_db),
        format_sig6(c.key.epsilon),
        c.key.target.clone(),
    ]
}

/// One row per (cell, iteration).
pub fn write_history(path: &Path, cells: &[CellResult]) -> Result<()> {
    let mut rows = Vec::new();
    for c in cells {
        for r in &c.curve.records {
            let mut row = key_fields(c);
            row.extend([
                r.iteration.to_string(),
                r.updates.to_string(),
                r.feedback_count.to_string(),
                format_sig6(r.fooling_rate),
                format_sig6(r.mean_reward),
            ]);
            rows.push(row);
        }
    }
    write_atomic(path, &HISTORY_HEADER, &rows)
}

/// One row per cell.
pub fn write_summary(path: &Path, cells: &[CellResult]) -> Result<()> {
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|c| {
            let mut row = key_fields(c);
            row.extend([
                format_sig6(c.heldout_accuracy),
                format_sig6(c.initial_fooling),
                format_sig6(c.final_fooling),
                c.converged.to_string(),
                c.convergence_updates.to_string(),
                c.curve.len().to_string(),
                c.feedback_count().to_string(),
            ]);
            row
        })
        .collect();
    write_atomic(path, &SUMMARY_HEADER, &rows)
}

/// One row per matrix entry.
pub fn write_transfer(path: &Path, matrices: &[TransferMatrix]) -> Result<()> {
    let mut rows = Vec::new();
    for m in matrices {
        for (train, row) in m.train_ids.iter().zip(&m.entries) {
            for (test, v) in m.test_ids.iter().zip(row) {
                rows.push(vec![m.seed.to_string(), train.clone(), test.clone(), format_sig6(*v)]);
            }
        }
    }
    write_atomic(path, &["seed", "train_id", "test_id", "fooling_rate"], &rows)
}

/// Per-cell wall-clock seconds, kept out of the CSV files.
pub fn write_timing(path: &Path, cells: &[CellResult]) -> Result<()> {
    let mut text = String::new();
    for c in cells {
        let _ = writeln!(text, "{}\t{:.1}s", c.key, c.wall_seconds);
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes history/summary (when there are cells), transfer (when there are
/// matrices) and the timing log into `dir`. Returns the CSV paths written.
pub fn export_csv(results: &ExperimentResults, dir: &Path) -> Result<Vec<PathBuf>> {
    if results.is_empty() {
        return Err(Error::invalid("nothing to export"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if !results.cells.is_empty() {
        let h = dir.join(HISTORY_FILE);
        write_history(&h, &results.cells)?;
        let s = dir.join(SUMMARY_FILE);
        write_summary(&s, &results.cells)?;
        write_timing(&dir.join(TIMING_FILE), &results.cells)?;
        written.extend([h, s]);
    }
    if !results.transfers.is_empty() {
        let t = dir.join(TRANSFER_FILE);
        write_transfer(&t, &results.transfers)?;
        written.push(t);
    }
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub seed: u64,
    pub channel: String,
    pub snr_db: f64,
    pub epsilon: f64,
    pub target: String,
    pub heldout_accuracy: f64,
    pub initial_fooling: f64,
    pub final_fooling: f64,
    pub converged: bool,
    pub convergence_updates: u64,
    pub iterations: usize,
    pub feedback_count: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TransferRow {
    pub seed: u64,
    pub train_id: String,
    pub test_id: String,
    pub fooling_rate: f64,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().map(|row| row.map_err(|e| csv_err(path, e))).collect()
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path)
}

pub fn read_transfer(path: &Path) -> Result<Vec<TransferRow>> {
    read_rows(path)
}

/// Plain-text tables of whatever summary/transfer files `dir` holds.
pub fn render_report(dir: &Path) -> Result<String> {
    let summary = dir.join(SUMMARY_FILE);
    let transfer = dir.join(TRANSFER_FILE);
    if !summary.exists() && !transfer.exists() {
        return Err(Error::invalid(format!(
            "{} holds neither {SUMMARY_FILE} nor {TRANSFER_FILE}",
            dir.display()
        )));
    }
    let mut out = String::new();
    if summary.exists() {
        let rows = read_summary(&summary)?;
        let _ = writeln!(
            out,
            "{:<16} {:>6} {:<8} {:>7} {:>7} {:<9} {:>8} {:>8} {:>8} {:>8}",
            "experiment", "seed", "channel", "snr_db", "eps", "target", "acc", "initial", "final", "updates"
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:<16} {:>6} {:<8} {:>7} {:>7} {:<9} {:>8.3} {:>8.3} {:>8.3} {:>7}{}",
                r.experiment,
                r.seed,
                r.channel,
                format_sig6(r.snr_db),
                format_sig6(r.epsilon),
                r.target,
                r.heldout_accuracy,
                r.initial_fooling,
                r.final_fooling,
                r.convergence_updates,
                if r.converged { " " } else { "*" }
            );
        }
        let _ = writeln!(out, "(* = budget exhausted before the plateau rule fired)");
    }
    if transfer.exists() {
        let rows = read_transfer(&transfer)?;
        let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
        seeds.dedup();
        for seed in seeds {
            let cells: Vec<&TransferRow> = rows.iter().filter(|r| r.seed == seed).collect();
            let mut cols: Vec<&str> = Vec::new();
            let mut trains: Vec<&str> = Vec::new();
            for r in &cells {
                if !cols.contains(&r.test_id.as_str()) {
                    cols.push(&r.test_id);
                }
                if !trains.contains(&r.train_id.as_str()) {
                    trains.push(&r.train_id);
                }
            }
            let _ = writeln!(out, "\ntransfer (seed {seed}): rows trained against, columns tested against");
            let _ = write!(out, "{:<9}", "");
            for c in &cols {
                let _ = write!(out, " {c:>9}");
            }
            out.push('\n');
            for t in &trains {
                let _ = write!(out, "{t:<9}");
                for c in &cols {
                    let v = cells.iter().find(|r| r.train_id == *t && r.test_id == *c).map(|r| r.fooling_rate);
                    match v {
                        Some(v) => {
                            let _ = write!(out, " {v:>9.3}");
                        }
                        None => {
                            let _ = write!(out, " {:>9}", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
    }
    Ok(out)
}
