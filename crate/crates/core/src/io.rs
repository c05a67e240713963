//! CSV and model-file persistence.
//!
//! All writes go to a temporary file in the destination directory which is
//! then renamed over the target. Numbers are written in shortest round-trip
//! form, so reading back any file reproduces the values bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfit::{ExpModel, ExpTerm, GridPoint};
use crate::geometry::Point2;
use crate::numerics::Complex;
use crate::series::{self, SmoothedSeries, TimeSeries, DEFAULT_YEAR_OFFSET};

pub const MODEL_FORMAT_VERSION: u32 = 1;

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_error(path))
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_error(path))?;
    tmp.write_all(contents).map_err(io_error(path))?;
    tmp.as_file().sync_all().map_err(io_error(path))?;
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    format!("{v:?}")
}

struct Table {
    headers: Vec<String>,
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(text: &str, path: &Path) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let parse_err = |line: u64, e: csv::Error| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    };
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e))?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect::<Vec<_>>();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header row".into(),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push((line, record.iter().map(str::to_owned).collect()));
    }
    Ok(Table { headers, rows })
}

fn column(table: &Table, names: &[&str], path: &Path) -> Result<usize> {
    table
        .headers
        .iter()
        .position(|h| names.contains(&h.as_str()))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!("header must contain a `{}` column", names.join("` or `")),
        })
}

fn field(row: &(u64, Vec<String>), index: usize, path: &Path) -> Result<f64> {
    let (line, cells) = row;
    let raw = cells.get(index).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: *line,
        message: format!(
            "expected at least {} fields, found {}",
            index + 1,
            cells.len()
        ),
    })?;
    raw.parse::<f64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line: *line,
        message: format!("`{raw}` is not a number"),
    })
}

/// Parses `t,value` (or `year,value`, shifted by `year_offset`) CSV text into raw pairs.
fn parse_pairs(text: &str, path: &Path, year_offset: f64) -> Result<Vec<(f64, f64)>> {
    let table = read_table(text, path)?;
    let time_col = column(&table, &["t", "year"], path)?;
    let from_years = table.headers[time_col] == "year";
    let value_col = column(&table, &["value"], path)?;
    table
        .rows
        .iter()
        .map(|row| {
            let t = field(row, time_col, path)?;
            let t = if from_years { t - year_offset } else { t };
            Ok((t, field(row, value_col, path)?))
        })
        .collect()
}

pub fn parse_series_csv(text: &str, path: &Path) -> Result<TimeSeries> {
    parse_series_csv_with_offset(text, path, DEFAULT_YEAR_OFFSET)
}

pub fn parse_series_csv_with_offset(
    text: &str,
    path: &Path,
    year_offset: f64,
) -> Result<TimeSeries> {
    series::validate(parse_pairs(text, path, year_offset)?)
}

/// Reads a time series with header `t,value` or `year,value`.
pub fn read_series_csv(path: &Path) -> Result<TimeSeries> {
    parse_series_csv(&read_text(path)?, path)
}

pub fn read_series_csv_with_offset(path: &Path, year_offset: f64) -> Result<TimeSeries> {
    parse_series_csv_with_offset(&read_text(path)?, path, year_offset)
}

/// Parses a node table. Abscissae need not be increasing; extra columns are ignored.
pub fn parse_nodes_csv(text: &str, path: &Path) -> Result<Vec<Point2>> {
    parse_nodes_csv_with_offset(text, path, DEFAULT_YEAR_OFFSET)
}

pub fn parse_nodes_csv_with_offset(
    text: &str,
    path: &Path,
    year_offset: f64,
) -> Result<Vec<Point2>> {
    let pairs = parse_pairs(text, path, year_offset)?;
    if pairs.is_empty() {
        return Err(Error::Validation {
            index: 0,
            reason: format!("{} contains no nodes", path.display()),
        });
    }
    pairs
        .into_iter()
        .enumerate()
        .map(|(index, (t, v))| {
            if t.is_finite() && v.is_finite() {
                Ok(Point2::new(t, v))
            } else {
                Err(Error::Validation {
                    index,
                    reason: format!("non-finite node ({t}, {v})"),
                })
            }
        })
        .collect()
}

pub fn read_nodes_csv(path: &Path) -> Result<Vec<Point2>> {
    parse_nodes_csv(&read_text(path)?, path)
}

pub fn read_nodes_csv_with_offset(path: &Path, year_offset: f64) -> Result<Vec<Point2>> {
    parse_nodes_csv_with_offset(&read_text(path)?, path, year_offset)
}

/// Parses exponents from CSV with header `re,im`.
pub fn parse_exponents_csv(text: &str, path: &Path) -> Result<Vec<Complex>> {
    let table = read_table(text, path)?;
    let re = column(&table, &["re"], path)?;
    let im = column(&table, &["im"], path)?;
    let exponents = table
        .rows
        .iter()
        .map(|row| Ok(Complex::new(field(row, re, path)?, field(row, im, path)?)))
        .collect::<Result<Vec<_>>>()?;
    if exponents.is_empty() {
        return Err(Error::Validation {
            index: 0,
            reason: format!("{} contains no exponents", path.display()),
        });
    }
    Ok(exponents)
}

pub fn read_exponents_csv(path: &Path) -> Result<Vec<Complex>> {
    parse_exponents_csv(&read_text(path)?, path)
}

pub fn smoothed_csv(s: &SmoothedSeries) -> String {
    let mut out = String::from("t,value,source_first_index\n");
    for (node, (first, _)) in s.nodes.iter().zip(&s.source_window) {
        out.push_str(&format!(
            "{},{},{}\n",
            format_number(node.x),
            format_number(node.y),
            first
        ));
    }
    out
}

pub fn write_smoothed_csv(path: &Path, s: &SmoothedSeries) -> Result<()> {
    write_atomic(path, smoothed_csv(s).as_bytes())
}

pub fn grid_csv(grid: &[GridPoint]) -> String {
    let mut out = String::from("t,value,imag_residual\n");
    for p in grid {
        out.push_str(&format!(
            "{},{},{}\n",
            format_number(p.t),
            format_number(p.value),
            format_number(p.imag_residual)
        ));
    }
    out
}

pub fn write_grid_csv(path: &Path, grid: &[GridPoint]) -> Result<()> {
    write_atomic(path, grid_csv(grid).as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex> for ComplexRecord {
    fn from(z: Complex) -> Self {
        ComplexRecord { re: z.re, im: z.im }
    }
}

impl From<ComplexRecord> for Complex {
    fn from(r: ComplexRecord) -> Self {
        Complex::new(r.re, r.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub coefficient: ComplexRecord,
    pub exponent: ComplexRecord,
}

/// On-disk form of an [`ExpModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub nodes: Vec<(f64, f64)>,
    pub terms: Vec<TermRecord>,
    pub fit_residual: f64,
    pub warnings: Vec<String>,
}

impl ModelFile {
    pub fn from_model(model: &ExpModel) -> Self {
        ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            nodes: model.nodes.iter().map(|p| (p.x, p.y)).collect(),
            terms: model
                .terms
                .iter()
                .map(|t| TermRecord {
                    coefficient: t.coefficient.into(),
                    exponent: t.exponent.into(),
                })
                .collect(),
            fit_residual: model.fit_residual,
            warnings: model.warnings.iter().map(ToString::to_string).collect(),
        }
    }

    /// Rebuilds the model. The stored residual is kept as written; warnings
    /// are informational only and are not restored.
    pub fn to_model(&self) -> ExpModel {
        ExpModel {
            terms: self
                .terms
                .iter()
                .map(|t| ExpTerm {
                    coefficient: t.coefficient.into(),
                    exponent: t.exponent.into(),
                })
                .collect(),
            nodes: self.nodes.iter().map(|&p| p.into()).collect(),
            fit_residual: self.fit_residual,
            warnings: Vec::new(),
        }
    }

    fn numbers(&self) -> impl Iterator<Item = f64> + '_ {
        let nodes = self.nodes.iter().flat_map(|&(t, v)| [t, v]);
        let terms = self.terms.iter().flat_map(|t| {
            [
                t.coefficient.re,
                t.coefficient.im,
                t.exponent.re,
                t.exponent.im,
            ]
        });
        nodes.chain(terms).chain([self.fit_residual])
    }

    pub fn to_json(&self) -> Result<String> {
        if let Some(bad) = self.numbers().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "model contains non-finite value {bad}"
            )));
        }
        let mut text = serde_json::to_string_pretty(self).expect("model serializes");
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let schema = |message: String| Error::Schema {
            path: path.to_path_buf(),
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| schema(format!("not valid JSON: {e}")))?;
        match value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
        {
            Some(v) if v == u64::from(MODEL_FORMAT_VERSION) => {}
            Some(v) => return Err(schema(format!("unsupported format_version {v}"))),
            None => return Err(schema("missing or non-integer format_version".into())),
        }
        let file: ModelFile = serde_json::from_value(value).map_err(|e| schema(e.to_string()))?;
        if file.terms.is_empty() {
            return Err(schema("model has no terms".into()));
        }
        Ok(file)
    }
}

pub fn write_model(path: &Path, model: &ModelFile) -> Result<()> {
    write_atomic(path, model.to_json()?.as_bytes())
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    ModelFile::from_json(&read_text(path)?, path)
}
