//! Keyed CSV tables. Rows are upserted by their key columns and written
//! sorted by key, so output order never depends on completion order.

use std::cmp::Ordering;
use std::path::Path;

use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    /// Leading columns forming the key.
    pub key_len: usize,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str], key_len: usize) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), key_len, rows: vec![] }
    }

    /// Read `path` if it exists and has this header; a missing file gives an
    /// empty table.
    pub fn load_or_new(path: &Path, header: &[&str], key_len: usize) -> Result<Self, CliError> {
        let mut t = Self::new(header, key_len);
        if !path.exists() {
            return Ok(t);
        }
        let mut rd = csv::Reader::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let found: Vec<String> = rd
            .headers()
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
            .iter()
            .map(String::from)
            .collect();
        if found != t.header {
            return Err(CliError::Io(format!(
                "{}: header `{}` does not match `{}`",
                path.display(),
                found.join(","),
                t.header.join(",")
            )));
        }
        for rec in rd.records() {
            let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            t.rows.push(rec.iter().map(String::from).collect());
        }
        Ok(t)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn upsert(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        let k = self.key_len;
        match self.rows.iter_mut().find(|r| r[..k] == row[..k]) {
            Some(r) => *r = row,
            None => self.rows.push(row),
        }
    }

    pub fn sort(&mut self) {
        let k = self.key_len;
        self.rows.sort_by(|a, b| compare_keys(&a[..k], &b[..k]));
    }

    pub fn save(&mut self, path: &Path) -> Result<(), CliError> {
        self.sort();
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(())
    }
}

/// Numeric where both fields parse as numbers, lexicographic otherwise.
fn compare_keys(a: &[String], b: &[String]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(p), Ok(q)) => p.total_cmp(&q),
            _ => x.cmp(y),
        };
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Shortest round-trip form; empty for NaN so missing values stay blank.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

pub fn parse_num(s: &str) -> f64 {
    if s.is_empty() {
        f64::NAN
    } else {
        s.parse().unwrap_or(f64::NAN)
    }
}
