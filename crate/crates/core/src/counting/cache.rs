//! JSON-lines persistence for count tables.
//!
//! The first line is a header
//! `{"format":"arborlab-count","version":1,"mode":"exact","N_max":N}`; each
//! following line is one size row `{"N":n,"L":[...],"E":[...]}` holding
//! heights `1..=n`. Exact entries are decimal strings, scaled entries are numbers.

use std::io::{BufRead, Write};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{CountTable, Mode, TableData, Triangle};
use crate::error::CountError;

pub const CACHE_FORMAT: &str = "arborlab-count";
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize, Debug, PartialEq)]
struct Header {
    format: String,
    version: u32,
    mode: Mode,
    #[serde(rename = "N_max")]
    n_max: usize,
}

#[derive(Serialize, Deserialize)]
struct Row<T> {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "L")]
    cumulative: Vec<T>,
    #[serde(rename = "E")]
    exact_height: Vec<T>,
}

fn io_err(e: impl std::fmt::Display) -> CountError {
    CountError::Cache(e.to_string())
}

pub fn write_cache<W: Write>(table: &CountTable, mut out: W) -> Result<(), CountError> {
    let header = Header {
        format: CACHE_FORMAT.to_string(),
        version: CACHE_VERSION,
        mode: table.mode(),
        n_max: table.n_max(),
    };
    writeln!(out, "{}", serde_json::to_string(&header).map_err(io_err)?).map_err(io_err)?;
    for n in 1..=table.n_max() {
        let line = match table.data() {
            TableData::Exact(t) => serde_json::to_string(&Row {
                n,
                cumulative: t.l_row(n).iter().map(BigUint::to_string).collect(),
                exact_height: t.e_row(n).iter().map(BigUint::to_string).collect(),
            }),
            TableData::Scaled(t) => serde_json::to_string(&Row {
                n,
                cumulative: t.l_row(n).to_vec(),
                exact_height: t.e_row(n).to_vec(),
            }),
        }
        .map_err(io_err)?;
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(())
}

/// Reads a cached table, returning `Ok(None)` when the header key
/// (format version, mode, N_max) does not match the request.
pub fn read_cache<R: BufRead>(input: R, mode: Mode, n_max: usize) -> Result<Option<CountTable>, CountError> {
    let mut lines = input.lines();
    let first = match lines.next() {
        Some(line) => line.map_err(io_err)?,
        None => return Ok(None),
    };
    let header: Header = match serde_json::from_str(&first) {
        Ok(h) => h,
        Err(_) => return Ok(None),
    };
    let wanted = Header {
        format: CACHE_FORMAT.to_string(),
        version: CACHE_VERSION,
        mode,
        n_max,
    };
    if header != wanted {
        return Ok(None);
    }
    let mut cumulative_exact = Vec::new();
    let mut exact_exact = Vec::new();
    let mut cumulative_scaled = Vec::new();
    let mut exact_scaled = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(io_err)?;
        let value: Value = serde_json::from_str(&line).map_err(io_err)?;
        match mode {
            Mode::Exact => {
                let row: Row<String> = serde_json::from_value(value).map_err(io_err)?;
                check_row(i + 1, row.n, row.cumulative.len(), row.exact_height.len())?;
                for s in row.cumulative {
                    cumulative_exact.push(s.parse::<BigUint>().map_err(io_err)?);
                }
                for s in row.exact_height {
                    exact_exact.push(s.parse::<BigUint>().map_err(io_err)?);
                }
            }
            Mode::Scaled => {
                let row: Row<f64> = serde_json::from_value(value).map_err(io_err)?;
                check_row(i + 1, row.n, row.cumulative.len(), row.exact_height.len())?;
                cumulative_scaled.extend(row.cumulative);
                exact_scaled.extend(row.exact_height);
            }
        }
    }
    let expected = n_max * (n_max + 1) / 2;
    let data = match mode {
        Mode::Exact => {
            if cumulative_exact.len() != expected {
                return Err(CountError::Cache("truncated cache file".into()));
            }
            TableData::Exact(Triangle::from_rows(n_max, cumulative_exact, exact_exact))
        }
        Mode::Scaled => {
            if cumulative_scaled.len() != expected {
                return Err(CountError::Cache("truncated cache file".into()));
            }
            TableData::Scaled(Triangle::from_rows(n_max, cumulative_scaled, exact_scaled))
        }
    };
    Ok(Some(CountTable::from_data(data)))
}

fn check_row(expected_n: usize, n: usize, l_len: usize, e_len: usize) -> Result<(), CountError> {
    if n != expected_n || l_len != n || e_len != n {
        return Err(CountError::Cache(format!("bad row for N = {expected_n}")));
    }
    Ok(())
}
