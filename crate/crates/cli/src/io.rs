//! CSV ingestion and report writing.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// A numeric table read column-wise. The first record is taken as a header
/// when any of its cells fails to parse as a number.
#[derive(Debug)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        let csv_err = |source| CliError::Csv {
            path: path.to_owned(),
            source,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(file);
        let mut records = reader.records();

        let Some(first) = records.next().transpose().map_err(csv_err)? else {
            return Err(CliError::TooFewRows {
                required: 2,
                got: 0,
            });
        };
        let is_header = first.iter().any(|c| c.parse::<f64>().is_err());
        let names: Vec<String> = if is_header {
            first.iter().map(str::to_string).collect()
        } else {
            (1..=first.len()).map(|i| i.to_string()).collect()
        };
        let mut columns = vec![Vec::new(); names.len()];
        let mut push = |row: usize, record: &csv::StringRecord| -> Result<()> {
            for ((cell, col), name) in record.iter().zip(&mut columns).zip(&names) {
                let v = cell.parse::<f64>().map_err(|_| CliError::NonNumeric {
                    row,
                    column: name.clone(),
                    value: cell.to_string(),
                })?;
                col.push(v);
            }
            Ok(())
        };
        let offset = usize::from(is_header);
        if !is_header {
            push(1, &first)?;
        }
        for (i, record) in records.enumerate() {
            push(i + 2 - offset, &record.map_err(csv_err)?)?;
        }
        Ok(Self { names, columns })
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// Resolves comma-separated selectors, each a header name or a 1-based
    /// column position.
    pub fn select(&self, spec: &str) -> Result<Vec<usize>> {
        spec.split(',')
            .map(str::trim)
            .map(|s| {
                if let Some(i) = self.names.iter().position(|n| n == s) {
                    return Ok(i);
                }
                match s.parse::<usize>() {
                    Ok(k) if (1..=self.columns.len()).contains(&k) => Ok(k - 1),
                    _ => Err(CliError::Usage(format!("no column `{s}` in input"))),
                }
            })
            .collect()
    }

    pub fn rows_of(&self, cols: &[usize]) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|r| cols.iter().map(|&c| self.columns[c][r]).collect())
            .collect()
    }
}

/// Opens the output destination; `None` means standard output.
pub fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv<R: AsRef<[u8]>>(
    out: &mut dyn Write,
    header: &[&str],
    rows: &[Vec<R>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(&mut *out);
    let to_io = |e: csv::Error| io::Error::other(e);
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(row).map_err(to_io)?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}
