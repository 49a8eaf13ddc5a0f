//! Report tables and their text and CSV renderings.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
}

/// A named block such as `odds_only_pinnacle`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, headers: &[&str]) -> Self {
        Self {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Aligned columns: the first left-aligned, the rest right-aligned.
    pub fn to_text(&self, provenance: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in provenance {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain(std::iter::once(self.headers[c].chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (cell, w))| {
                    if c == 0 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        out.push_str(&line(&self.headers));
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&line(&rule));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }

    /// Comma-separated, with provenance as leading `#` comment lines.
    pub fn to_csv(&self, provenance: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in provenance {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.headers).expect("writing to memory");
        for row in &self.rows {
            writer.write_record(row).expect("writing to memory");
        }
        out.push_str(&String::from_utf8(writer.into_inner().expect("writing to memory")).expect("utf-8 input"));
        out
    }

    pub fn render(&self, format: ReportFormat, provenance: &[(String, String)]) -> String {
        match format {
            ReportFormat::Table => self.to_text(provenance),
            ReportFormat::Csv => self.to_csv(provenance),
        }
    }

    /// Writes `<name>.txt` and `<name>.csv` into `dir`.
    pub fn write(&self, dir: &Path, provenance: &[(String, String)]) -> Result<(), CliError> {
        for (ext, body) in [("txt", self.to_text(provenance)), ("csv", self.to_csv(provenance))] {
            let path = dir.join(format!("{}.{ext}", self.name));
            std::fs::write(&path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn fmt_loss(v: f64) -> String {
    format!("{v:.5}")
}

pub fn fmt_p(v: f64) -> String {
    format!("{v:.4}")
}

pub fn fmt_param(v: f64) -> String {
    format!("{v:.6}")
}

pub fn yes_no(v: bool) -> String {
    if v { "yes" } else { "no" }.to_string()
}
