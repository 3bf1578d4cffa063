//! CSV and key-value text output. Every number is printed with 17 significant digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits; round-trips every finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_columns(path: &Path, headers: &[&str], columns: &[&[f64]]) -> Result<()> {
    assert_eq!(headers.len(), columns.len());
    let rows = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != rows) {
        return Err(Error::InvalidField("columns of unequal length".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    let mut record = Vec::with_capacity(headers.len());
    for r in 0..rows {
        record.clear();
        record.extend(columns.iter().map(|c| fmt_f64(c[r])));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns of a headed numeric CSV, keyed by header name.
pub fn read_columns(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let mut cols: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for h in &headers {
        if cols.insert(h.clone(), Vec::new()).is_some() {
            return Err(Error::Io(format!("duplicate column '{h}'")));
        }
    }
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (h, field) in headers.iter().zip(rec.iter()) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Io(format!("row {}: column '{h}': cannot parse '{field}'", line + 2)))?;
            cols.get_mut(h).unwrap().push(v);
        }
    }
    Ok(cols)
}

/// Ordered `key = value` report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueReport {
    entries: Vec<(String, String)>,
}

impl KeyValueReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.entries.push((key.into(), fmt_f64(value)));
        self
    }

    pub fn int(&mut self, key: impl Into<String>, value: i64) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn flag(&mut self, key: impl Into<String>, value: bool) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        let v: String = value.into();
        self.entries.push((key.into(), v.replace('\n', " ")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        f.write_all(self.render().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    /// Parse the format produced by [`KeyValueReport::render`].
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
            .collect();
        Self { entries }
    }
}
