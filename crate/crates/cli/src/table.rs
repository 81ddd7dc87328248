//! Numeric CSV tables: `,` separated, `.` decimals, mandatory header, values
//! written with 17 significant digits so a read-back is exact.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new<S: Into<String>>(headers: impl IntoIterator<Item = S>) -> Self {
        Self {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.headers.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers).map_err(CliError::io)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&v| format_value(v))).map_err(CliError::io)?;
        }
        out.flush().map_err(|e| CliError::io(e.into()))
    }

    pub fn write_path(&self, path: &Path) -> Result<(), CliError> {
        let f = std::fs::File::create(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        self.write_to(f)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, CliError> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers().map_err(CliError::io)?.iter().map(String::from).collect::<Vec<_>>();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(CliError::io)?;
            let row = rec
                .iter()
                .map(|t| t.parse::<f64>().map_err(|e| CliError::config(format!("bad number {t:?}: {e}"))))
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn read_path(path: &Path) -> Result<Self, CliError> {
        let f = std::fs::File::open(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Self::read_from(f)
    }
}
