use serde::Serialize;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

/// A command's result, ready to print in any format.
pub struct Rendered {
    json: Value,
    csv: String,
    /// Single-record outputs print as `key: value` lines in text mode.
    single: bool,
    /// False when a threshold check in the command failed.
    pub passed: bool,
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn with_schema(mut body: Value) -> Value {
    let mut out = Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    if let Value::Object(fields) = body.take() {
        out.extend(fields);
    }
    Value::Object(out)
}

impl Rendered {
    /// One record; JSON is the record itself plus `schema_version`.
    pub fn record<T: Serialize>(record: &T) -> Result<Self, String> {
        let json = serde_json::to_value(record).map_err(|e| e.to_string())?;
        Ok(Rendered {
            json: with_schema(json),
            csv: csv_of(std::slice::from_ref(record))?,
            single: true,
            passed: true,
        })
    }

    /// A table; JSON is `header` plus a `rows` array.
    pub fn table<H: Serialize, T: Serialize>(header: &H, rows: &[T]) -> Result<Self, String> {
        let mut json = with_schema(serde_json::to_value(header).map_err(|e| e.to_string())?);
        json["rows"] = serde_json::to_value(rows).map_err(|e| e.to_string())?;
        Ok(Rendered {
            json,
            csv: csv_of(rows)?,
            single: false,
            passed: true,
        })
    }

    pub fn with_passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        if let Value::Object(fields) = &mut self.json {
            fields.insert("passed".into(), json!(passed));
        }
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("JSON value");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
            Format::Text => self.text(),
        }
    }

    fn text(&self) -> String {
        let mut reader = csv::ReaderBuilder::new().from_reader(self.csv.as_bytes());
        let header: Vec<String> = reader
            .headers()
            .map(|h| h.iter().map(str::to_string).collect())
            .unwrap_or_default();
        let rows: Vec<Vec<String>> = reader
            .records()
            .filter_map(|r| r.ok())
            .map(|r| r.iter().map(abbreviate).collect())
            .collect();
        let mut out = String::new();
        if self.single {
            let width = header.iter().map(|h| h.len()).max().unwrap_or(0);
            for (k, v) in header.iter().zip(rows.first().into_iter().flatten()) {
                out.push_str(&format!("{k:<width$}  {v}\n"));
            }
            if !self.passed {
                out.push_str("FAILED\n");
            }
            return out;
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        for line in std::iter::once(&header).chain(&rows) {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:>w$}"))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        if !self.passed {
            out.push_str("FAILED\n");
        }
        out
    }
}

/// Text mode shortens huge exact values; CSV and JSON keep every digit.
fn abbreviate(cell: &str) -> String {
    const KEEP: usize = 24;
    let len = cell.chars().count();
    if len <= 2 * KEEP {
        return cell.to_string();
    }
    let head: String = cell.chars().take(KEEP).collect();
    format!("{head}... ({len} chars)")
}

/// Error object printed on stderr for a failed invocation.
pub fn error_json(kind: &str, message: &str) -> String {
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "error": { "kind": kind, "message": message },
    });
    serde_json::to_string(&value).expect("JSON value")
}
