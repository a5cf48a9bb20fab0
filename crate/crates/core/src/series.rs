// SPDX-License-Identifier: MIT OR Apache-2.0

//! Functional time series container and CSV ingestion.
//!
//! Layout on disk: one row per time point, one column per grid point. An
//! optional header row names the grid locations as `s=<value>` (a bare number
//! is accepted too). Without a header the grid is uniform on (0,1).

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `m` equally spaced points strictly inside (0,1): `j / (m + 1)`.
pub fn uniform_grid<S: Scalar>(m: usize) -> Vec<S> {
    let denom = S::of_usize(m + 1);
    (1..=m).map(|j| S::of_usize(j) / denom).collect()
}

/// `n` functions observed on a shared grid of `m` points, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSeries<S> {
    values: Vec<S>,
    grid: Vec<S>,
    n: usize,
}

impl<S: Scalar> FunctionalSeries<S> {
    /// Builds a series from a row-major buffer of `n * grid.len()` values.
    pub fn from_flat(values: Vec<S>, grid: Vec<S>) -> Result<Self> {
        let m = grid.len();
        if m < 2 {
            return Err(Error::InvalidSeries(format!(
                "grid needs at least 2 points, got {m}"
            )));
        }
        if !values.len().is_multiple_of(m) {
            return Err(Error::InvalidSeries(format!(
                "{} values do not fill rows of width {m}",
                values.len()
            )));
        }
        let n = values.len() / m;
        if n < 3 {
            return Err(Error::InvalidSeries(format!(
                "need at least 3 functions, got {n}"
            )));
        }
        if let Some(j) = grid.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidSeries(format!("grid point {j} is not finite")));
        }
        if let Some(j) = grid.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSeries(format!(
                "grid is not strictly increasing at position {}",
                j + 1
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value at row {}, column {}",
                index / m + 1,
                index % m + 1
            )));
        }
        Ok(Self { values, grid, n })
    }

    pub fn from_rows(rows: Vec<Vec<S>>, grid: Vec<S>) -> Result<Self> {
        let m = grid.len();
        if let Some(t) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::InvalidSeries(format!(
                "row {} has {} values, grid has {m}",
                t + 1,
                rows[t].len()
            )));
        }
        Self::from_flat(rows.into_iter().flatten().collect(), grid)
    }

    /// Rows on the default uniform grid.
    pub fn with_uniform_grid(rows: Vec<Vec<S>>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        Self::from_rows(rows, uniform_grid(m))
    }

    /// Number of functions.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points.
    pub fn m(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &[S] {
        &self.grid
    }

    /// Function `t` (0-based) evaluated on the grid.
    pub fn row(&self, t: usize) -> &[S] {
        let m = self.m();
        &self.values[t * m..(t + 1) * m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[S]> + DoubleEndedIterator + '_ {
        self.values.chunks_exact(self.m())
    }

    pub fn as_flat(&self) -> &[S] {
        &self.values
    }

    /// Series with time order reversed.
    pub fn reversed(&self) -> Self {
        let values = self.rows().rev().flatten().copied().collect();
        Self {
            values,
            grid: self.grid.clone(),
            n: self.n,
        }
    }
}

/// Which projection produced a univariate series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// Discrete total variation of each function.
    Tvn,
    /// Score on the leading functional principal component.
    Fpc1,
}

impl Projection {
    pub const ALL: [Projection; 2] = [Projection::Tvn, Projection::Fpc1];

    pub fn name(self) -> &'static str {
        match self {
            Projection::Tvn => "tvn",
            Projection::Fpc1 => "fpc1",
        }
    }
}

/// Length-`n` univariate series obtained from one projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedSeries<S> {
    values: Vec<S>,
    source: Projection,
}

impl<S: Scalar> ProjectedSeries<S> {
    pub fn new(values: Vec<S>, source: Projection) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if source == Projection::Tvn {
            if let Some(t) = values.iter().position(|v| *v < S::zero()) {
                return Err(Error::InvalidSeries(format!(
                    "negative total variation at index {t}"
                )));
            }
        }
        Ok(Self { values, source })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn source(&self) -> Projection {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn parse_grid_cell<S: Scalar + FromStr>(cell: &str, col: usize) -> Result<S> {
    let trimmed = cell.trim();
    let body = trimmed.strip_prefix("s=").unwrap_or(trimmed);
    body.trim().parse::<S>().map_err(|_| Error::GridHeader {
        col,
        cell: cell.to_string(),
    })
}

/// Parses CSV text. Rows and columns in errors are 1-based file positions.
pub fn read_csv<S, R>(reader: R, has_header: bool) -> Result<FunctionalSeries<S>>
where
    S: Scalar + FromStr,
    R: Read,
{
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut grid: Option<Vec<S>> = None;
    let mut width: Option<usize> = None;
    let mut values: Vec<S> = Vec::new();
    let mut n = 0usize;

    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Csv {
            row: e.position().map_or(idx as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        let row = record.position().map_or(idx as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(Error::RaggedRow {
                    row,
                    expected: w,
                    found: record.len(),
                })
            }
            None => width = Some(record.len()),
            _ => {}
        }
        if has_header && grid.is_none() {
            grid = Some(
                record
                    .iter()
                    .enumerate()
                    .map(|(j, cell)| parse_grid_cell(cell, j + 1))
                    .collect::<Result<_>>()?,
            );
            continue;
        }
        for (j, cell) in record.iter().enumerate() {
            let v: S = cell.parse().map_err(|_| Error::NonNumeric {
                row,
                col: j + 1,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumeric {
                    row,
                    col: j + 1,
                    cell: cell.to_string(),
                });
            }
            values.push(v);
        }
        n += 1;
    }

    if n < 3 {
        return Err(Error::InvalidSeries(format!(
            "need at least 3 data rows, found {n}"
        )));
    }
    let grid = grid.unwrap_or_else(|| uniform_grid(width.unwrap_or(0)));
    FunctionalSeries::from_flat(values, grid)
}

/// Loads a functional series from a CSV file.
pub fn load_csv<S: Scalar + FromStr>(path: &Path, has_header: bool) -> Result<FunctionalSeries<S>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, has_header)
}

/// Writes a series in the layout accepted by [`read_csv`], with an `s=` header.
pub fn write_csv<S: Scalar, W: Write>(series: &FunctionalSeries<S>, writer: W) -> std::io::Result<()> {
    let mut out = BufWriter::new(writer);
    let header: Vec<String> = series.grid().iter().map(|s| format!("s={s}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in series.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()
}
