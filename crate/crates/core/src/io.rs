//! Plain-text file formats.
//!
//! * series files (`output.out`, targets): one value per line, 17 significant
//!   digits, LF endings;
//! * `params.csv`: `element_index,w_o` with a header row;
//! * `result.csv`: `iter,x_0,..,x_{d-1}[,rmse,mse]` with a header row.

use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_series(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::with_capacity(values.len() * 24);
    for v in values {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads whitespace separated floats, one or more per line.
pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        for tok in line.split_whitespace() {
            values.push(tok.parse().map_err(|_| Error::Parse {
                path: path.into(),
                line: i + 1,
                msg: format!("not a number: {tok:?}"),
            })?);
        }
    }
    Ok(values)
}

pub fn write_params(path: &Path, w_o: &[f64]) -> Result<()> {
    let mut out = String::from("element_index,w_o\n");
    for (e, w) in w_o.iter().enumerate() {
        out.push_str(&format!("{e},{}\n", fmt_f64(*w)));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads `params.csv`; rows must cover element indices `0..P` exactly once.
pub fn read_params(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("element_index")) {
            continue;
        }
        let (idx, val) = line
            .split_once(',')
            .ok_or_else(|| parse_err(i + 1, "expected `element_index,w_o`".into()))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad element index {idx:?}")))?;
        let val: f64 = val
            .trim()
            .parse()
            .map_err(|_| parse_err(i + 1, format!("bad weight {val:?}")))?;
        rows.push((idx, val, i + 1));
    }
    let mut w = vec![f64::NAN; rows.len()];
    for (idx, val, line) in rows {
        if idx >= w.len() || !w[idx].is_nan() {
            return Err(parse_err(line, format!("element index {idx} duplicated or out of range")));
        }
        w[idx] = val;
    }
    Ok(w)
}

/// One row of `result.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub iter: usize,
    pub x: Vec<f64>,
    pub rmse: Option<f64>,
    pub mse: Option<f64>,
}

fn result_header(d: usize, with_errors: bool) -> String {
    let mut h = String::from("iter");
    for i in 0..d {
        h.push_str(&format!(",x_{i}"));
    }
    if with_errors {
        h.push_str(",rmse,mse");
    }
    h
}

fn result_line(row: &ResultRow) -> String {
    let mut s = row.iter.to_string();
    for v in &row.x {
        s.push(',');
        s.push_str(&fmt_f64(*v));
    }
    if let (Some(r), Some(m)) = (row.rmse, row.mse) {
        s.push(',');
        s.push_str(&fmt_f64(r));
        s.push(',');
        s.push_str(&fmt_f64(m));
    }
    s
}

/// Line-buffered appender for iterates logged while the optimizer runs.
pub struct ResultLog {
    file: File,
    path: std::path::PathBuf,
}

impl ResultLog {
    /// Creates a fresh file (any previous one is replaced) with a header for
    /// `d` design values.
    pub fn create(path: &Path, d: usize) -> Result<Self> {
        if path.exists() {
            fs::remove_file(path).map_err(|e| Error::io(path, e))?;
        }
        let mut file = OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        writeln!(file, "{}", result_header(d, false)).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            file,
            path: path.into(),
        })
    }

    pub fn append(&mut self, row: &ResultRow) -> Result<()> {
        writeln!(self.file, "{}", result_line(row))
            .and_then(|_| self.file.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let d = rows.first().map_or(0, |r| r.x.len());
    let with_errors = rows.iter().all(|r| r.rmse.is_some() && r.mse.is_some());
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", result_header(d, with_errors)).map_err(io)?;
    for row in rows {
        writeln!(w, "{}", result_line(row)).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads design rows from a result file.
///
/// With a header, columns are picked by name (`iter`, `x_*`, `rmse`, `mse`).
/// Without one, every row holds `d` design values optionally followed by
/// error columns, separated by commas or whitespace.
pub fn read_results(path: &Path, d: usize) -> Result<Vec<ResultRow>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    let split = |line: &str| -> Vec<String> {
        line.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect()
    };

    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    let header = match lines.peek() {
        Some((_, first)) if first.trim_start().starts_with(|c: char| c.is_ascii_alphabetic()) => {
            let cols = split(first);
            lines.next();
            Some(cols)
        }
        _ => None,
    };

    let mut rows = Vec::new();
    for (i, line) in lines {
        let toks = split(line);
        let nums = toks
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| parse_err(i + 1, format!("malformed row {line:?}")))?;
        let row = match &header {
            Some(cols) => {
                if nums.len() != cols.len() {
                    return Err(parse_err(
                        i + 1,
                        format!("expected {} columns, found {}", cols.len(), nums.len()),
                    ));
                }
                let get = |name: &str| cols.iter().position(|c| c == name).map(|k| nums[k]);
                let x: Vec<f64> = cols
                    .iter()
                    .zip(&nums)
                    .filter(|(c, _)| c.starts_with("x_"))
                    .map(|(_, &v)| v)
                    .collect();
                ResultRow {
                    iter: get("iter").map_or(rows.len(), |v| v as usize),
                    x,
                    rmse: get("rmse"),
                    mse: get("mse"),
                }
            }
            None => {
                if nums.len() < d {
                    return Err(parse_err(
                        i + 1,
                        format!("expected at least {d} design values, found {}", nums.len()),
                    ));
                }
                ResultRow {
                    iter: rows.len(),
                    x: nums[..d].to_vec(),
                    rmse: nums.get(d).copied(),
                    mse: nums.get(d + 1).copied(),
                }
            }
        };
        if row.x.len() != d {
            return Err(parse_err(
                i + 1,
                format!("expected {d} design values, found {}", row.x.len()),
            ));
        }
        rows.push(row);
    }
    Ok(rows)
}
