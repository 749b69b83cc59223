//! Plain-text CSV readers and writers.
//!
//! Every number is written in scientific notation with 17 significant
//! digits, which round-trips any `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a single-column signal: one sample per line, with an optional
/// `value` header on the first line. Blank lines are skipped.
pub fn read_signal<R: Read>(reader: R) -> Result<Signal> {
    let table = read_table(reader, &["value"], false)?;
    Signal::new(table.into_iter().map(|row| row[0]).collect())
}

pub fn read_signal_file(path: impl AsRef<Path>) -> Result<Signal> {
    read_signal(File::open(path)?)
}

pub fn write_signal<W: Write>(writer: W, signal: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "value")?;
    for v in signal {
        writeln!(w, "{}", fmt_f64(*v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_signal_file(path: impl AsRef<Path>, signal: &[f64]) -> Result<()> {
    write_signal(File::create(path)?, signal)
}

/// Writes `columns` side by side under `header`.
pub fn write_columns<W: Write>(writer: W, header: &[&str], columns: &[&[f64]]) -> Result<()> {
    if header.len() != columns.len() {
        return Err(Error::LengthMismatch {
            left: header.len(),
            right: columns.len(),
        });
    }
    let rows = columns.first().map_or(0, |c| c.len());
    if let Some(bad) = columns.iter().find(|c| c.len() != rows) {
        return Err(Error::LengthMismatch {
            left: rows,
            right: bad.len(),
        });
    }
    let mut w = BufWriter::new(writer);
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for r in 0..rows {
        line.clear();
        for (i, col) in columns.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(col[r]));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a numeric table whose first line may be the expected `header`.
/// With `require_header` the header must be present. Returns rows.
pub fn read_table<R: Read>(
    reader: R,
    header: &[&str],
    require_header: bool,
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    let mut seen_first = false;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !seen_first {
            seen_first = true;
            if fields.len() == header.len()
                && fields
                    .iter()
                    .zip(header)
                    .all(|(f, h)| f.eq_ignore_ascii_case(h))
            {
                continue;
            }
            if require_header {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected header `{}`", header.join(",")),
                });
            }
        }
        if fields.len() != header.len() {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {} field(s), found {}", header.len(), fields.len()),
            });
        }
        let row = fields
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        msg: format!("not a finite number: `{f}`"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Splits rows into columns.
pub fn transpose(rows: &[Vec<f64>], width: usize) -> Vec<Vec<f64>> {
    (0..width)
        .map(|c| rows.iter().map(|r| r[c]).collect())
        .collect()
}
