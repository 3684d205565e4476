//! CSV and JSON ingestion.
//!
//! CSV needs a header row; the target column is chosen by name and an
//! optional group column splits rows into groups in first-appearance order.
//! JSON is either a flat array of numbers (one unnamed group) or an object
//! mapping labels to number arrays.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use boxfence::Sample;
use indexmap::IndexMap;
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// `.json` means JSON, anything else CSV.
    pub fn infer(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("malformed JSON: {0}")]
    Json(String),

    #[error("CSV input needs --column")]
    MissingColumn,

    #[error("unknown column '{name}' (available: {})", available.join(", "))]
    UnknownColumn {
        name: String,
        available: Vec<String>,
    },

    #[error("non-numeric or missing values in '{column}': {}", problems.join("; "))]
    InvalidCells {
        column: String,
        problems: Vec<String>,
    },

    #[error("no usable rows in input")]
    NoRows,

    #[error("group '{0}' has no values")]
    EmptyGroup(String),
}

impl InputError {
    pub fn is_io(&self) -> bool {
        matches!(self, InputError::Unreadable { .. })
    }
}

/// A labeled sample read from input. `label` is `None` for ungrouped data.
#[derive(Debug, Clone, PartialEq)]
pub struct DataGroup {
    pub label: Option<String>,
    pub sample: Sample<f64>,
}

impl DataGroup {
    pub fn display_label(&self) -> &str {
        self.label.as_deref().unwrap_or("")
    }
}

/// Reads `path` (or stdin for `-`).
pub fn parse_path(
    path: &Path,
    format: Option<Format>,
    column: Option<&str>,
    group_column: Option<&str>,
) -> Result<Vec<DataGroup>, InputError> {
    let unreadable = |source| InputError::Unreadable {
        path: path.to_path_buf(),
        source,
    };
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map_err(unreadable)?;
    } else {
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(unreadable)?;
    }
    let format = format.unwrap_or_else(|| Format::infer(path));
    parse_input(&text, format, column, group_column)
}

pub fn parse_input(
    text: &str,
    format: Format,
    column: Option<&str>,
    group_column: Option<&str>,
) -> Result<Vec<DataGroup>, InputError> {
    match format {
        Format::Csv => parse_csv(text, column.ok_or(InputError::MissingColumn)?, group_column),
        Format::Json => parse_json(text),
    }
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize, InputError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| InputError::UnknownColumn {
            name: name.to_string(),
            available: headers.iter().map(|h| h.trim().to_string()).collect(),
        })
}

fn parse_csv(
    text: &str,
    column: &str,
    group_column: Option<&str>,
) -> Result<Vec<DataGroup>, InputError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| InputError::Csv(e.to_string()))?
        .clone();
    let value_idx = column_index(&headers, column)?;
    let group_idx = group_column
        .map(|g| column_index(&headers, g))
        .transpose()?;

    let mut groups: IndexMap<Option<String>, Vec<f64>> = IndexMap::new();
    let mut problems = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| InputError::Csv(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(value_idx).unwrap_or("");
        let Some(value) = parse_number(cell) else {
            problems.push(format!("line {line}: {cell:?}"));
            continue;
        };
        let key = group_idx.map(|g| record.get(g).unwrap_or("").trim().to_string());
        groups.entry(key).or_default().push(value);
    }
    if !problems.is_empty() {
        return Err(InputError::InvalidCells {
            column: column.to_string(),
            problems,
        });
    }
    if groups.is_empty() {
        return Err(InputError::NoRows);
    }
    groups
        .into_iter()
        .map(|(label, values)| to_group(label, values))
        .collect()
}

fn to_group(label: Option<String>, values: Vec<f64>) -> Result<DataGroup, InputError> {
    let sample = Sample::new(values)
        .map_err(|_| InputError::EmptyGroup(label.clone().unwrap_or_default()))?;
    Ok(DataGroup { label, sample })
}

fn parse_json(text: &str) -> Result<Vec<DataGroup>, InputError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| InputError::Json(e.to_string()))?;
    let mut problems = Vec::new();
    let mut numbers = |label: &str, items: &[Value]| -> Vec<f64> {
        items
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                let parsed = v.as_f64().filter(|x| x.is_finite());
                if parsed.is_none() {
                    problems.push(format!("{label}[{i}]: {v}"));
                }
                parsed
            })
            .collect()
    };
    let groups: Vec<(Option<String>, Vec<f64>)> = match &doc {
        Value::Array(items) => vec![(None, numbers("", items))],
        Value::Object(map) => {
            let mut out = Vec::with_capacity(map.len());
            for (label, v) in map {
                let Value::Array(items) = v else {
                    return Err(InputError::Json(format!("group '{label}' is not an array")));
                };
                out.push((Some(label.clone()), numbers(label, items)));
            }
            out
        }
        _ => {
            return Err(InputError::Json(
                "expected an array of numbers or an object of arrays".into(),
            ))
        }
    };
    if !problems.is_empty() {
        return Err(InputError::InvalidCells {
            column: "values".into(),
            problems,
        });
    }
    if groups.is_empty() {
        return Err(InputError::NoRows);
    }
    if let [(None, values)] = groups.as_slice() {
        if values.is_empty() {
            return Err(InputError::NoRows);
        }
    }
    groups
        .into_iter()
        .map(|(label, values)| to_group(label, values))
        .collect()
}
