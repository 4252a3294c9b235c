//! Report writers.
//!
//! Number formats are fixed so golden files stay stable: JSON floats are
//! written as `{:.16e}` (17 significant digits — enough to round-trip any
//! f64 exactly), CSV numbers as `{:.11e}` (12 significant digits).
//! Non-finite values become `null` in JSON and `inf`/`-inf`/`nan` text in
//! CSV. Identical (config, seed) inputs produce byte-identical files.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

/// JSON formatter that only changes how finite floats are written.
struct SigFig17;

impl serde_json::ser::Formatter for SigFig17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string(value: &serde_json::Value) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFig17);
    value.serialize(&mut ser).context("report serialization failed")?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// One CSV cell; numbers carry their own formatting rule.
#[derive(Debug, Clone)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) if v.is_nan() => "nan".into(),
            Cell::Num(v) if *v == f64::INFINITY => "inf".into(),
            Cell::Num(v) if *v == f64::NEG_INFINITY => "-inf".into(),
            Cell::Num(v) => format!("{v:.11e}"),
        }
    }
}

pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.header)?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                bail!("internal error: CSV row width {} vs header width {}", row.len(), self.header.len());
            }
            writer.write_record(row.iter().map(Cell::render))?;
        }
        Ok(String::from_utf8(writer.into_inner()?).expect("csv emits UTF-8"))
    }
}

/// Writes the report. Without `--out` the JSON form goes to stdout; with
/// `--out` the file extension picks the format.
pub fn emit(json: &serde_json::Value, table: &CsvTable, out: Option<&Path>) -> Result<()> {
    match out {
        None => {
            io::stdout().write_all(to_json_string(json)?.as_bytes())?;
            Ok(())
        }
        Some(path) => {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let body = match ext {
                "json" => to_json_string(json)?,
                "csv" => table.to_csv_string()?,
                other => bail!("--out wants a .json or .csv path, got extension {other:?}"),
            };
            std::fs::write(path, body)
                .with_context(|| format!("cannot write {}", path.display()))?;
            Ok(())
        }
    }
}

/// Parses `lo:step:hi` into an inclusive grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:step:hi, got {text:?}");
    }
    let lo: f64 = parts[0].parse().with_context(|| format!("bad grid lower bound {:?}", parts[0]))?;
    let step: f64 = parts[1].parse().with_context(|| format!("bad grid step {:?}", parts[1]))?;
    let hi: f64 = parts[2].parse().with_context(|| format!("bad grid upper bound {:?}", parts[2]))?;
    if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() || hi < lo {
        bail!("grid needs finite lo <= hi and step > 0, got {text:?}");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + step * k as f64).collect())
}
