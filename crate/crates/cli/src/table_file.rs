//! Output files: `# key=value` metadata lines, a header row, then comma-separated
//! records; or the same fields as a JSON object.
//!
//! Floats are written in the shortest decimal form that parses back to the same
//! 64-bit value, so reading a file and writing it again reproduces it byte for byte.

use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Bool(v) => Value::from(*v),
            Cell::Text(v) => Value::from(v.as_str()),
        }
    }
}

/// Shortest round-trip decimal; `1.0` keeps its fractional part.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Metadata, column names and records, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let metadata: Map<String, Value> = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect())
            })
            .collect();
        let mut doc = Map::new();
        doc.insert("metadata".into(), Value::Object(metadata));
        doc.insert("rows".into(), Value::Array(rows));
        let mut text = serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON values always serialize");
        text.push('\n');
        text
    }
}

pub const TABLE_COLUMNS: [&str; 3] = ["n", "m", "value"];

/// A tabulated `B_c(n, m)` with the metadata that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct LgfTableFile {
    pub metadata: Vec<(String, String)>,
    pub entries: Vec<(i64, i64, f64)>,
}

impl LgfTableFile {
    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_document(&self) -> Document {
        let mut doc = Document::new(&TABLE_COLUMNS);
        doc.metadata = self.metadata.clone();
        for &(n, m, v) in &self.entries {
            doc.push(vec![Cell::Int(n), Cell::Int(m), Cell::Float(v)]);
        }
        doc
    }

    pub fn render(&self, format: Format) -> String {
        self.to_document().render(format)
    }

    /// Reads either format, telling them apart by the first non-blank character.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        if text.trim_start().starts_with('{') {
            Self::from_json(text)
        } else {
            Self::from_csv(text)
        }
    }

    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let bad = |line: usize, what: &str| CliError::Format(format!("line {}: {what}", line + 1));
        let mut metadata = Vec::new();
        let mut entries = Vec::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            if !header_seen {
                if let Some(meta) = line.strip_prefix("# ") {
                    let (k, v) = meta.split_once('=').ok_or_else(|| bad(i, "metadata line lacks '='"))?;
                    metadata.push((k.to_string(), v.to_string()));
                    continue;
                }
                if line != TABLE_COLUMNS.join(",") {
                    return Err(bad(i, "expected header n,m,value"));
                }
                header_seen = true;
                continue;
            }
            let mut fields = line.split(',');
            let mut next = || fields.next().ok_or_else(|| bad(i, "too few fields"));
            let n = next()?.parse().map_err(|_| bad(i, "n is not an integer"))?;
            let m = next()?.parse().map_err(|_| bad(i, "m is not an integer"))?;
            let v = next()?.parse().map_err(|_| bad(i, "value is not a number"))?;
            if fields.next().is_some() {
                return Err(bad(i, "too many fields"));
            }
            entries.push((n, m, v));
        }
        if !header_seen {
            return Err(CliError::Format("missing header n,m,value".into()));
        }
        Ok(Self { metadata, entries })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let bad = |what: &str| CliError::Format(what.to_string());
        let doc: Value = serde_json::from_str(text).map_err(|e| CliError::Format(e.to_string()))?;
        let metadata = doc
            .get("metadata")
            .and_then(Value::as_object)
            .ok_or_else(|| bad("missing metadata object"))?
            .iter()
            .map(|(k, v)| {
                v.as_str()
                    .map(|s| (k.clone(), s.to_string()))
                    .ok_or_else(|| bad("metadata values must be strings"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let entries = doc
            .get("rows")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing rows array"))?
            .iter()
            .map(|row| {
                let n = row.get("n").and_then(Value::as_i64);
                let m = row.get("m").and_then(Value::as_i64);
                let v = row.get("value").and_then(Value::as_f64);
                match (n, m, v) {
                    (Some(n), Some(m), Some(v)) => Ok((n, m, v)),
                    _ => Err(bad("each row needs integer n, m and numeric value")),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { metadata, entries })
    }
}
