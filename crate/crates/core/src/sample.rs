use std::io::{Read, Write};
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-ordered observations with named real-valued fields, stored by column.
///
/// Row order is the time order; block subsampling relies on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesSample {
    schema: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeriesSample {
    pub fn new(schema: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if schema.is_empty() {
            return Err(Error::Data("empty schema".into()));
        }
        if schema.len() != columns.len() {
            return Err(Error::Data(format!(
                "{} field names for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        for (i, name) in schema.iter().enumerate() {
            if schema[..i].contains(name) {
                return Err(Error::Data(format!("duplicate field '{name}'")));
            }
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::Data("sample has no rows".into()));
        }
        for (name, col) in schema.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Data(format!("field '{name}' has {} rows, expected {n}", col.len())));
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!("non-finite value in field '{name}' at row {t}")));
            }
        }
        Ok(Self { schema, columns })
    }

    pub fn from_columns(fields: &[(&str, Vec<f64>)]) -> Result<Self> {
        let schema = fields.iter().map(|(k, _)| k.to_string()).collect();
        let columns = fields.iter().map(|(_, v)| v.clone()).collect();
        Self::new(schema, columns)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn schema(&self) -> &[String] {
        &self.schema
    }

    pub fn has(&self, name: &str) -> bool {
        self.schema.iter().any(|s| s == name)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.schema
            .iter()
            .position(|s| s == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::Data(format!("missing field '{name}'")))
    }

    /// Consecutive rows `range` as a new sample.
    pub fn rows(&self, range: Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.n() {
            return Err(Error::InvalidInput(format!(
                "row range {}..{} outside 0..{}",
                range.start,
                range.end,
                self.n()
            )));
        }
        let columns = self.columns.iter().map(|c| c[range.clone()].to_vec()).collect();
        Ok(Self { schema: self.schema.clone(), columns })
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let schema: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); schema.len()];
        for (t, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != schema.len() {
                return Err(Error::Data(format!("row {} has {} fields, expected {}", t + 1, record.len(), schema.len())));
            }
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Data(format!("row {}, field '{}': cannot parse '{field}'", t + 1, schema[j])))?;
                columns[j].push(v);
            }
        }
        Self::new(schema, columns)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(&self.schema)?;
        for t in 0..self.n() {
            wtr.write_record(self.columns.iter().map(|c| format_float(c[t])))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}
