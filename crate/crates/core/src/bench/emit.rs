//! CSV and JSON output, and loading either back for comparison.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::SweepResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Named columns of equal length; the first column is the axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub metadata: Option<serde_json::Value>,
}

impl Table {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() || names.is_empty() {
            return Err(Error::Config(format!(
                "table needs one name per column, got {} names and {} columns",
                names.len(),
                columns.len()
            )));
        }
        let n = columns[0].len();
        if let Some((i, _)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::Config(format!("column `{}` has inconsistent length", names[i])));
        }
        Ok(Table {
            names,
            columns,
            metadata: None,
        })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

impl SweepResult {
    pub fn to_table(&self) -> Result<Table> {
        let mut t = Table::new(self.column_names(), self.columns())?;
        t.metadata = Some(serde_json::to_value(&self.metadata).map_err(|e| Error::Config(e.to_string()))?);
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonColumn {
    name: String,
    /// Non-finite values are written as `null`.
    values: Vec<Option<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    metadata: serde_json::Value,
    columns: Vec<JsonColumn>,
}

pub fn write_csv(table: &Table, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    w.write_record(&table.names).map_err(csv_err)?;
    let mut row = Vec::with_capacity(table.columns.len());
    for i in 0..table.rows() {
        row.clear();
        row.extend(table.columns.iter().map(|c| format!("{:.16e}", c[i])));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json(table: &Table, path: &Path) -> Result<()> {
    let doc = JsonDocument {
        metadata: table.metadata.clone().unwrap_or(serde_json::Value::Null),
        columns: table
            .names
            .iter()
            .zip(&table.columns)
            .map(|(n, c)| JsonColumn {
                name: n.clone(),
                values: c.iter().map(|v| v.is_finite().then_some(*v)).collect(),
            })
            .collect(),
    };
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| Error::io(path, e.into()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    let table = result.to_table()?;
    match format {
        Format::Csv => write_csv(&table, path),
        Format::Json => write_json(&table, path),
    }
}

/// Reads a `.csv` or `.json` file written by [`emit`].
pub fn load_table(path: &Path) -> Result<Table> {
    let bad = |reason: String| Error::Format {
        path: path.to_owned(),
        reason,
    };
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let mut r = csv::ReaderBuilder::new()
                .from_path(path)
                .map_err(|e| bad(e.to_string()))?;
            let names: Vec<String> = r
                .headers()
                .map_err(|e| bad(e.to_string()))?
                .iter()
                .map(str::to_owned)
                .collect();
            let mut columns = vec![Vec::new(); names.len()];
            for (line, rec) in r.records().enumerate() {
                let rec = rec.map_err(|e| bad(e.to_string()))?;
                for (j, field) in rec.iter().enumerate() {
                    let v: f64 = field
                        .parse()
                        .map_err(|_| bad(format!("row {}: `{field}` is not a number", line + 2)))?;
                    columns[j].push(v);
                }
            }
            Table::new(names, columns).map_err(|e| bad(e.to_string()))
        }
        Some("json") => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            let doc: JsonDocument =
                serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| bad(e.to_string()))?;
            let (names, columns) = doc
                .columns
                .into_iter()
                .map(|c| (c.name, c.values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()))
                .unzip();
            let mut t = Table::new(names, columns).map_err(|e| bad(e.to_string()))?;
            t.metadata = Some(doc.metadata);
            Ok(t)
        }
        _ => Err(bad("expected a .csv or .json extension".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let x = vec![0.9, 1.0, 0.9121211395327548];
        let y = vec![1.0 / 3.0, f64::NAN, 2.0f64.sqrt() * 1e-300];
        Table::new(vec!["x".into(), "y".into()], vec![x, y]).unwrap()
    }

    fn same(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(u, v)| u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()))
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let t = sample();
        write_csv(&t, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.ends_with('\n') && !text.contains('\r'));
        assert!(text.lines().nth(1).unwrap().starts_with("9.0000000000000002e-1,"));
        let back = load_table(&p).unwrap();
        assert_eq!(back.names, t.names);
        assert!(same(&back.columns[0], &t.columns[0]) && same(&back.columns[1], &t.columns[1]));
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.json");
        let t = sample();
        write_json(&t, &p).unwrap();
        let back = load_table(&p).unwrap();
        assert_eq!(back.names, t.names);
        assert!(same(&back.columns[0], &t.columns[0]) && same(&back.columns[1], &t.columns[1]));
        assert!(std::fs::read_to_string(&p).unwrap().contains("null"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = write_csv(&sample(), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
        assert!(load_table(Path::new("x.txt")).is_err());
    }

    #[test]
    fn ragged_table_rejected() {
        assert!(Table::new(vec!["a".into(), "b".into()], vec![vec![1.0], vec![]]).is_err());
    }
}
