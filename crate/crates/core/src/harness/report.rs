//! Report rows and their CSV encodings.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 13] = [
    "dataset",
    "algorithm",
    "params",
    "precision",
    "precision_std",
    "precision_ci95",
    "accuracy",
    "recall",
    "specificity",
    "iterations",
    "time_ms",
    "mem_mb",
    "status",
];

pub const FIGURE_HEADER: [&str; 4] = ["scenario", "algorithm", "distinct_values", "precision"];

/// Outcome class of one matrix cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    /// Time or memory limit exceeded.
    El,
    /// Numeric failure or unusable input.
    Na,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Ok => "OK",
            Status::El => "EL",
            Status::Na => "NA",
        })
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "OK" => Ok(Status::Ok),
            "EL" => Ok(Status::El),
            "NA" => Ok(Status::Na),
            _ => Err(Error::InvalidParameter(format!("unknown status `{s}`"))),
        }
    }
}

/// One (dataset, algorithm) cell. Metric fields are means over repetitions;
/// `None` marks an undefined or unavailable figure.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub dataset: String,
    pub algorithm: String,
    pub params: String,
    pub precision: Option<f64>,
    pub precision_std: Option<f64>,
    pub precision_ci95: Option<f64>,
    pub accuracy: Option<f64>,
    pub recall: Option<f64>,
    pub specificity: Option<f64>,
    pub iterations: Option<f64>,
    pub time_ms: Option<f64>,
    pub mem_mb: Option<f64>,
    pub status: Status,
}

impl ReportRow {
    /// A row carrying only identity and status.
    pub fn failed(dataset: &str, algorithm: &str, params: &str, status: Status) -> Self {
        ReportRow {
            dataset: dataset.into(),
            algorithm: algorithm.into(),
            params: params.into(),
            precision: None,
            precision_std: None,
            precision_ci95: None,
            accuracy: None,
            recall: None,
            specificity: None,
            iterations: None,
            time_ms: None,
            mem_mb: None,
            status,
        }
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn parse_cell(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| Error::InvalidParameter(format!("bad number `{s}` in report")))
}

pub fn write_report<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.algorithm.clone(),
            r.params.clone(),
            cell(r.precision),
            cell(r.precision_std),
            cell(r.precision_ci95),
            cell(r.accuracy),
            cell(r.recall),
            cell(r.specificity),
            cell(r.iterations),
            cell(r.time_ms),
            cell(r.mem_mb),
            r.status.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

pub fn emit_report(rows: &[ReportRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::SpecError("no report rows to write".into()));
    }
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_report(rows, file)
}

pub fn read_report<R: Read>(input: R) -> Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(REPORT_HEADER.iter().copied()) {
        return Err(Error::InvalidParameter("unexpected report header".into()));
    }
    rdr.records()
        .map(|rec| {
            let r = rec?;
            Ok(ReportRow {
                dataset: r[0].to_string(),
                algorithm: r[1].to_string(),
                params: r[2].to_string(),
                precision: parse_cell(&r[3])?,
                precision_std: parse_cell(&r[4])?,
                precision_ci95: parse_cell(&r[5])?,
                accuracy: parse_cell(&r[6])?,
                recall: parse_cell(&r[7])?,
                specificity: parse_cell(&r[8])?,
                iterations: parse_cell(&r[9])?,
                time_ms: parse_cell(&r[10])?,
                mem_mb: parse_cell(&r[11])?,
                status: r[12].parse()?,
            })
        })
        .collect()
}

/// One point of a distinct-value sweep, long format.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePoint {
    pub scenario: String,
    pub algorithm: String,
    pub distinct_values: usize,
    pub precision: Option<f64>,
}

pub fn write_figure<W: Write>(points: &[FigurePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIGURE_HEADER)?;
    for p in points {
        w.write_record([
            p.scenario.clone(),
            p.algorithm.clone(),
            p.distinct_values.to_string(),
            cell(p.precision),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<figure>", e))?;
    Ok(())
}

pub fn emit_figure(points: &[FigurePoint], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_figure(points, file)
}
