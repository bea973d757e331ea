//! Sample files: one value per line, or CSV with a chosen column.

use std::path::Path;

use lpocv::Sample;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl std::str::FromStr for Column {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err("empty column".into());
        }
        Ok(s.parse::<usize>()
            .map(Column::Index)
            .unwrap_or_else(|_| Column::Name(s.to_string())))
    }
}

fn parse_value(path: &str, line: u64, field: &str) -> CliResult<f64> {
    let t = field.trim();
    let v: f64 = t.parse().map_err(|_| CliError::Parse {
        path: path.into(),
        line,
        message: format!("not a number: {t:?}"),
    })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(CliError::Parse {
            path: path.into(),
            line,
            message: format!("value {t} outside [0, 1]"),
        });
    }
    Ok(v)
}

/// Parses sample text. Without `column`, each non-blank line holds one value
/// (a line starting with '#' is a comment). With `column`, the text is CSV;
/// a first row that does not parse as numbers is taken as the header.
pub fn parse_samples(text: &str, path: &str, column: Option<&Column>) -> CliResult<Sample> {
    let values = match column {
        None => {
            let mut v = Vec::new();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.trim_end_matches('\r').trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                v.push(parse_value(path, i as u64 + 1, line)?);
            }
            v
        }
        Some(col) => parse_csv(text, path, col)?,
    };
    if values.is_empty() {
        return Err(CliError::Parse {
            path: path.into(),
            line: 0,
            message: "no observations".into(),
        });
    }
    Ok(Sample::new(values)?)
}

fn parse_csv(text: &str, path: &str, col: &Column) -> CliResult<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut idx: Option<usize> = match col {
        Column::Index(i) => Some(*i),
        Column::Name(_) => None,
    };
    let mut values = Vec::new();
    let mut first = true;
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Parse {
            path: path.into(),
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if first {
            first = false;
            let numeric = rec.iter().all(|f| f.parse::<f64>().is_ok());
            if !numeric {
                if let Column::Name(name) = col {
                    idx = Some(rec.iter().position(|f| f == name).ok_or_else(|| {
                        CliError::Parse {
                            path: path.into(),
                            line,
                            message: format!("no column named {name:?} in header"),
                        }
                    })?);
                }
                continue;
            }
            if idx.is_none() {
                return Err(CliError::Parse {
                    path: path.into(),
                    line,
                    message: "column given by name but the file has no header".into(),
                });
            }
        }
        let i = idx.expect("column resolved");
        let field = rec.get(i).ok_or_else(|| CliError::Parse {
            path: path.into(),
            line,
            message: format!("row has {} field(s), column {i} missing", rec.len()),
        })?;
        values.push(parse_value(path, line, field)?);
    }
    Ok(values)
}

pub fn ingest_samples(path: &Path, column: Option<&Column>) -> CliResult<Sample> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_samples(&text, &path.display().to_string(), column)
}
