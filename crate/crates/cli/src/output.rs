use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cuberoot::{Error, Result};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: &str = "v1";

/// Where results go: a JSON file plus sibling CSV tables, or standard output.
pub struct Sink {
    json: Option<PathBuf>,
}

impl Sink {
    pub fn new(output: Option<&Path>) -> Self {
        Sink { json: output.map(Path::to_path_buf) }
    }

    /// Writes the result envelope. `extra` fields are merged at top level.
    pub fn write_json(&self, command: &str, config: Value, result: Value, extra: Map<String, Value>) -> Result<()> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let mut doc = Map::new();
        doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
        doc.insert("command".into(), json!(command));
        doc.insert("config".into(), config);
        doc.insert("timestamp".into(), json!(timestamp));
        doc.insert("result".into(), result);
        doc.extend(extra);
        let text = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Error::Io(e.to_string()))? + "\n";
        match &self.json {
            Some(p) => fs::write(p, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    /// Path of the CSV table `name` next to the JSON output, if any.
    pub fn table_path(&self, name: &str) -> Option<PathBuf> {
        let p = self.json.as_ref()?;
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
        Some(p.with_file_name(format!("{stem}.{name}.csv")))
    }

    pub fn write_table(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Option<PathBuf>> {
        let Some(path) = self.table_path(name) else { return Ok(None) };
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(Some(path))
    }
}
