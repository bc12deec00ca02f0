//! Versioned tables in CSV or JSON-lines form.
//!
//! Every file starts with a schema line (`# schema: sfp.<name>/1` for CSV,
//! `{"schema":"sfp.<name>/1"}` for JSONL). Floats are written with 17
//! significant digits so they read back bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Empty,
}

impl Cell {
    fn render(self, json: bool) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(_) | Cell::Empty => {
                if json {
                    "null".into()
                } else {
                    String::new()
                }
            }
        }
    }
}

pub fn schema_tag(name: &str) -> String {
    format!("sfp.{name}/{SCHEMA_VERSION}")
}

/// Streams rows of a fixed-column table to disk.
pub struct TableWriter {
    out: BufWriter<File>,
    columns: &'static [&'static str],
    format: Format,
    path: PathBuf,
}

impl TableWriter {
    pub fn create(
        dir: &Path,
        name: &str,
        columns: &'static [&'static str],
        format: Format,
    ) -> Result<TableWriter, CliError> {
        let path = dir.join(format!("{name}.{}", format.extension()));
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut out = BufWriter::new(file);
        let head = match format {
            Format::Csv => format!("# schema: {}\n{}\n", schema_tag(name), columns.join(",")),
            Format::Jsonl => format!("{{\"schema\":\"{}\"}}\n", schema_tag(name)),
        };
        out.write_all(head.as_bytes())
            .map_err(|e| CliError::io(&path, e))?;
        Ok(TableWriter {
            out,
            columns,
            format,
            path,
        })
    }

    pub fn row(&mut self, cells: &[Cell]) -> Result<(), CliError> {
        debug_assert_eq!(cells.len(), self.columns.len());
        let line = match self.format {
            Format::Csv => cells
                .iter()
                .map(|c| c.render(false))
                .collect::<Vec<_>>()
                .join(","),
            Format::Jsonl => {
                let fields: Vec<String> = self
                    .columns
                    .iter()
                    .zip(cells)
                    .map(|(k, c)| format!("\"{k}\":{}", c.render(true)))
                    .collect();
                format!("{{{}}}", fields.join(","))
            }
        };
        writeln!(self.out, "{line}").map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

/// A table read back into memory. Missing values are `None`.
#[derive(Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize, CliError> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Schema(format!("missing column `{name}`")))
    }
}

/// Finds `<name>.csv` or `<name>.jsonl` in `dir`.
pub fn locate(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    for ext in ["csv", "jsonl"] {
        let p = dir.join(format!("{name}.{ext}"));
        if p.exists() {
            return Ok(p);
        }
    }
    Err(CliError::Schema(format!(
        "no {name}.csv or {name}.jsonl in {}",
        dir.display()
    )))
}

fn parse_number(raw: &str, path: &Path, line: usize) -> Result<Option<f64>, CliError> {
    let raw = raw.trim();
    if raw.is_empty() || raw == "null" {
        return Ok(None);
    }
    raw.parse::<f64>().map(Some).map_err(|_| {
        CliError::Schema(format!(
            "{}:{line}: `{raw}` is not a number",
            path.display()
        ))
    })
}

/// Reads a table, insisting on the schema line for `name`.
pub fn read_table(path: &Path, name: &str, columns: &[&str]) -> Result<Table, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let expected = schema_tag(name);
    let first = lines
        .next()
        .transpose()
        .map_err(|e| CliError::io(path, e))?
        .unwrap_or_default();
    let is_json = path.extension().is_some_and(|e| e == "jsonl");
    let found = if is_json {
        serde_json::from_str::<serde_json::Value>(&first)
            .ok()
            .and_then(|v| v.get("schema").and_then(|s| s.as_str()).map(str::to_owned))
    } else {
        first.strip_prefix("# schema:").map(|s| s.trim().to_owned())
    };
    if found.as_deref() != Some(expected.as_str()) {
        return Err(CliError::Schema(format!(
            "{}: expected schema {expected}, found {}",
            path.display(),
            found.unwrap_or_else(|| "none".into())
        )));
    }

    let mut rows = Vec::new();
    let header: Vec<String>;
    if is_json {
        header = columns.iter().map(|s| s.to_string()).collect();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| CliError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let obj: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&line)
                .map_err(|e| CliError::Schema(format!("{}:{}: {e}", path.display(), n + 2)))?;
            let row = header
                .iter()
                .map(|k| match obj.get(k) {
                    None | Some(serde_json::Value::Null) => Ok(None),
                    Some(serde_json::Value::Number(x)) => Ok(x.as_f64()),
                    Some(other) => Err(CliError::Schema(format!(
                        "{}:{}: `{k}` = {other} is not a number",
                        path.display(),
                        n + 2
                    ))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
    } else {
        let head = lines
            .next()
            .transpose()
            .map_err(|e| CliError::io(path, e))?
            .unwrap_or_default();
        header = head.split(',').map(|s| s.trim().to_string()).collect();
        for want in columns {
            if !header.iter().any(|h| h == want) {
                return Err(CliError::Schema(format!(
                    "{}: missing column `{want}`",
                    path.display()
                )));
            }
        }
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| CliError::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != header.len() {
                return Err(CliError::Schema(format!(
                    "{}:{}: {} fields, expected {}",
                    path.display(),
                    n + 3,
                    fields.len(),
                    header.len()
                )));
            }
            rows.push(
                fields
                    .iter()
                    .map(|f| parse_number(f, path, n + 3))
                    .collect::<Result<Vec<_>, _>>()?,
            );
        }
    }
    Ok(Table {
        columns: header,
        rows,
    })
}
