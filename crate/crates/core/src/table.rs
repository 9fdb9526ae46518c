//! Tagged columnar experiment output.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{LabError, Result};

/// Rectangular table of numbers plus the parameters that produced it.
///
/// Serialized as CSV: a `# params:` line, any number of further `#`
/// metadata lines, a header row, then data rows. Floats are written in
/// shortest round-trip form so identical values give identical bytes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    params: Vec<(String, String)>,
    notes: Vec<String>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        ResultTable {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.set_param(key, value);
        self
    }

    /// Insert or replace a header parameter.
    pub fn set_param(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.params.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.params.push((key, value)),
        }
    }

    pub fn add_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width {} does not match {} columns",
            row.len(),
            self.columns.len()
        );
        self.rows.push(row);
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn params(&self) -> &[(String, String)] {
        &self.params
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| LabError::MissingColumn(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "# params:")?;
        for (k, v) in &self.params {
            write!(w, " {k}={v}")?;
        }
        writeln!(w)?;
        for n in &self.notes {
            writeln!(w, "# {n}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        let mut line = String::new();
        for row in &self.rows {
            line.clear();
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format_value(*v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("table output is ASCII")
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path).map_err(|e| LabError::io(path, e))?;
        self.write(&mut f).map_err(|e| LabError::io(path, e))?;
        f.flush().map_err(|e| LabError::io(path, e))
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&bytes)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes).map_err(|e| LabError::Parse(e.to_string()))?;
        let mut table = ResultTable::default();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else {
                continue;
            };
            let rest = rest.trim();
            if let Some(params) = rest.strip_prefix("params:") {
                for kv in params.split_whitespace() {
                    if let Some((k, v)) = kv.split_once('=') {
                        table.params.push((k.to_string(), v.to_string()));
                    }
                }
            } else {
                table.notes.push(rest.to_string());
            }
        }
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(true)
            .from_reader(bytes);
        table.columns = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| parse_value(f.trim()))
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != table.columns.len() {
                return Err(LabError::Parse(format!(
                    "row has {} fields, header has {}",
                    row.len(),
                    table.columns.len()
                )));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v}")
    }
}

fn parse_value(s: &str) -> Result<f64> {
    match s {
        "nan" | "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s
            .parse()
            .map_err(|_| LabError::Parse(format!("non-numeric field `{s}`"))),
    }
}
