//! CSV tables with `# key = value` metadata lines ahead of the header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// A parsed numeric table.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub metadata: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn meta_f64(&self, key: &str) -> Result<Option<f64>> {
        self.metadata
            .get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|e| Error::Parse {
                    context: format!("metadata `{key}`"),
                    message: e.to_string(),
                })
            })
            .transpose()
    }

    pub fn expect_header(&self, expected: &[&str], context: &str) -> Result<()> {
        if self.header.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(Error::Parse {
                context: context.to_string(),
                message: format!("expected columns {:?}, found {:?}", expected, self.header),
            });
        }
        Ok(())
    }
}

/// Full-precision scientific notation; round-trips through `str::parse`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}

pub fn parse_table(text: &str, context: &str) -> Result<Table> {
    let mut metadata = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.split_once('=') {
                metadata.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !line.is_empty() {
            break;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let parse_err = |row: usize, message: String| Error::Row { row, message };
    let header = reader
        .headers()
        .map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(i + 1, e.to_string()))?;
        let row = record
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(f64::NAN)
                } else {
                    f.parse::<f64>().map_err(|e| parse_err(i + 1, format!("`{f}`: {e}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { metadata, header, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, &path.display().to_string())
}

/// Renders metadata lines, the header and the rows. `None` cells are left empty.
pub fn render_table(metadata: &[(&str, String)], header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    let mut out = String::new();
    for (k, v) in metadata {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(fmt_num).unwrap_or_default()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
