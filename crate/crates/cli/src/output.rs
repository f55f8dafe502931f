use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use gscnet::{Error, Result};
use serde::Serialize;
use serde_json::{json, Value};

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source: e }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// `{"schema": schema, ..value}` for object values, `{"schema", "data"}`
/// otherwise.
pub fn with_schema(schema: &str, value: &impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(value)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("schema".into(), json!(schema));
            Ok(v)
        }
        None => Ok(json!({ "schema": schema, "data": v })),
    }
}

pub fn write_json(path: &Path, schema: &str, value: &impl Serialize) -> Result<()> {
    let v = with_schema(schema, value)?;
    let mut text = serde_json::to_string_pretty(&v)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, schema: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(&with_schema(schema, &row)?)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Plain CSV; cells are numbers or identifiers and never need quoting.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let _ = writeln!(out, "{}", row.join(","));
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}
