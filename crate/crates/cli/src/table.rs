//! Sweep tables: `#`-prefixed metadata, then `x,value,abs_err,status`.

use std::fs;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const HEADER: [&str; 4] = ["x", "value", "abs_err", "status"];
pub const STATUS_OK: &str = "ok";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub value: Option<f64>,
    pub abs_err: Option<f64>,
    pub status: String,
}

impl Row {
    pub fn ok(x: f64, value: f64, abs_err: f64) -> Self {
        Self {
            x,
            value: Some(value),
            abs_err: Some(abs_err),
            status: STATUS_OK.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// `(key, value)` pairs written as `# key: value`.
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

impl Table {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn to_csv_string(&self) -> CliResult<String> {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}: {}\n", v.replace('\n', " ")));
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Usage(format!("CSV encoding failed: {e}"));
        writer.write_record(HEADER).map_err(csv_err)?;
        for row in &self.rows {
            writer
                .write_record([
                    format_float(row.x),
                    format_opt(row.value),
                    format_opt(row.abs_err),
                    row.status.clone(),
                ])
                .map_err(csv_err)?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Usage(format!("CSV encoding failed: {e}")))?;
        out.push_str(std::str::from_utf8(&bytes).expect("CSV output is UTF-8"));
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = self.to_csv_string()?;
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn parse(text: &str, path: &Path) -> CliResult<Self> {
        let bad = |detail: String| CliError::Csv {
            path: path.to_path_buf(),
            detail,
        };
        let metadata = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .filter_map(|l| l.split_once(':'))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| bad(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != HEADER {
            return Err(bad(format!("expected header {}", HEADER.join(","))));
        }
        let number = |field: &str, name: &str, line: usize| -> CliResult<Option<f64>> {
            if field.is_empty() {
                return Ok(None);
            }
            field
                .parse::<f64>()
                .map(Some)
                .map_err(|_| bad(format!("line {line}: `{field}` is not a number in column {name}")))
        };
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            if record.len() != 4 {
                return Err(bad(format!("row {}: expected 4 fields", i + 1)));
            }
            let x = number(&record[0], "x", i + 1)?
                .ok_or_else(|| bad(format!("row {}: missing x", i + 1)))?;
            rows.push(Row {
                x,
                value: number(&record[1], "value", i + 1)?,
                abs_err: number(&record[2], "abs_err", i + 1)?,
                status: record[3].to_string(),
            });
        }
        Ok(Table { metadata, rows })
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }
}
