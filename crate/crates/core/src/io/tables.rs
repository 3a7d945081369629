use std::collections::BTreeSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ela::{feature_names, FeatureVector};
use crate::error::{Error, Result};

pub const PERFORMANCE_HEADER: [&str; 5] = ["algorithm", "problem_id", "instance_id", "budget", "target_precision"];

/// Fixed-budget result of one algorithm run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceRecord {
    pub algorithm: String,
    pub problem_id: u32,
    pub instance_id: u32,
    pub budget: u64,
    pub target_precision: f64,
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io("<csv stream>", source),
        other => Error::data(format!("csv: {other:?}")),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn parse_err(source: &str, line: u64, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        reason: reason.into(),
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str, source: &str, line: u64) -> Result<T> {
    let raw = rec.get(i).ok_or_else(|| parse_err(source, line, format!("missing field {name}")))?;
    raw.trim()
        .parse()
        .map_err(|_| parse_err(source, line, format!("bad {name} `{raw}`")))
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[String], source: &str) -> Result<()> {
    let header = rdr
        .headers()
        .map_err(|e| parse_err(source, 1, e.to_string()))?
        .clone();
    let got: Vec<&str> = header.iter().map(str::trim).collect();
    if got != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(Error::data(format!(
            "{source}: header mismatch, expected `{}`",
            expected.join(",")
        )));
    }
    Ok(())
}

/// Parses a performance table; `source` names the input in error messages.
pub fn read_performance<R: Read>(input: R, source: &str) -> Result<Vec<PerformanceRecord>> {
    let mut rdr = reader(input);
    let expected: Vec<String> = PERFORMANCE_HEADER.iter().map(|s| s.to_string()).collect();
    check_header(&mut rdr, &expected, source)?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(source, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != PERFORMANCE_HEADER.len() {
            return Err(parse_err(
                source,
                line,
                format!("expected {} fields, found {}", PERFORMANCE_HEADER.len(), rec.len()),
            ));
        }
        let r = PerformanceRecord {
            algorithm: rec[0].trim().to_string(),
            problem_id: field(&rec, 1, "problem_id", source, line)?,
            instance_id: field(&rec, 2, "instance_id", source, line)?,
            budget: field(&rec, 3, "budget", source, line)?,
            target_precision: field(&rec, 4, "target_precision", source, line)?,
        };
        if r.algorithm.is_empty() {
            return Err(parse_err(source, line, "empty algorithm id"));
        }
        if r.budget == 0 {
            return Err(Error::data(format!("{source}: line {line}: budget must be positive")));
        }
        if !r.target_precision.is_finite() || r.target_precision < 0.0 {
            return Err(Error::data(format!(
                "{source}: line {line}: target precision must be finite and nonnegative, got {}",
                r.target_precision
            )));
        }
        let key = (r.algorithm.clone(), r.problem_id, r.instance_id, r.budget);
        if !seen.insert(key) {
            return Err(Error::data(format!(
                "{source}: line {line}: duplicate record ({}, {}, {}, {})",
                r.algorithm, r.problem_id, r.instance_id, r.budget
            )));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn load_performance_table(path: impl AsRef<Path>) -> Result<Vec<PerformanceRecord>> {
    let path = path.as_ref();
    read_performance(open(path)?, &path.display().to_string())
}

pub fn write_performance<W: Write>(out: W, records: &[PerformanceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PERFORMANCE_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.algorithm.clone(),
            r.problem_id.to_string(),
            r.instance_id.to_string(),
            r.budget.to_string(),
            r.target_precision.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv stream>", e))
}

pub fn save_performance_table(path: impl AsRef<Path>, records: &[PerformanceRecord]) -> Result<()> {
    write_performance(create(path.as_ref())?, records)
}

fn feature_header() -> Vec<String> {
    let mut h = vec!["problem_id".to_string(), "instance_id".to_string()];
    h.extend(feature_names().iter().cloned());
    h
}

pub fn read_features<R: Read>(input: R, source: &str) -> Result<Vec<FeatureVector>> {
    let mut rdr = reader(input);
    let expected = feature_header();
    check_header(&mut rdr, &expected, source)?;
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(source, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != expected.len() {
            return Err(parse_err(
                source,
                line,
                format!("expected {} fields, found {}", expected.len(), rec.len()),
            ));
        }
        let pid: u32 = field(&rec, 0, "problem_id", source, line)?;
        let iid: u32 = field(&rec, 1, "instance_id", source, line)?;
        let values = (2..expected.len())
            .map(|i| field::<f64>(&rec, i, &expected[i], source, line))
            .collect::<Result<Vec<_>>>()?;
        let fv = FeatureVector::new(pid, iid, values)
            .map_err(|e| Error::data(format!("{source}: line {line}: {e}")))?;
        if !seen.insert((pid, iid)) {
            return Err(Error::data(format!(
                "{source}: line {line}: duplicate feature row ({pid}, {iid})"
            )));
        }
        out.push(fv);
    }
    Ok(out)
}

pub fn load_feature_table(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    read_features(open(path)?, &path.display().to_string())
}

pub fn write_features<W: Write>(out: W, rows: &[FeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(feature_header()).map_err(csv_err)?;
    for fv in rows {
        let mut rec = vec![fv.problem_id.to_string(), fv.instance_id.to_string()];
        rec.extend(fv.values.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io("<csv stream>", e))
}

pub fn save_feature_table(path: impl AsRef<Path>, rows: &[FeatureVector]) -> Result<()> {
    write_features(create(path.as_ref())?, rows)
}
