//! Sampled scalar functions on strictly increasing grids, with the CSV
//! interchange format used by the CLI (`t,value`, header row, decimal point).

use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    PiecewiseLinear,
    PiecewiseConstantLeft,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    pub interpolation: Interpolation,
}

impl SampledFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, interpolation: Interpolation) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Grid("empty grid".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::Grid(format!(
                "grid has {} points but {} values supplied",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("grid must be strictly increasing".into()));
        }
        if grid.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Grid("grid and values must be finite".into()));
        }
        Ok(SampledFunction {
            grid,
            values,
            interpolation,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(f: F, grid: Vec<f64>) -> Result<Self> {
        let values = grid.iter().map(|&t| f(t)).collect();
        SampledFunction::new(grid, values, Interpolation::PiecewiseLinear)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Interpolated value at `t`; constant extension outside the grid span.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t <= self.grid[0] {
            return self.values[0];
        }
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let j = match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&t).expect("finite grid"))
        {
            Ok(j) => return self.values[j],
            Err(j) => j - 1,
        };
        match self.interpolation {
            Interpolation::PiecewiseConstantLeft => self.values[j],
            Interpolation::PiecewiseLinear => {
                let w = (t - self.grid[j]) / (self.grid[j + 1] - self.grid[j]);
                self.values[j] * (1.0 - w) + self.values[j + 1] * w
            }
        }
    }

    /// True when the grid spacing is uniform to ~1 ulp per step.
    pub fn is_uniform(&self) -> bool {
        grid_is_uniform(&self.grid)
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        self.write_csv_with_header(w, "t", "value")
    }

    pub fn write_csv_with_header<W: Write>(&self, w: &mut W, col0: &str, col1: &str) -> Result<()> {
        writeln!(w, "{col0},{col1}")?;
        for (t, v) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{t},{v}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R, interpolation: Interpolation) -> Result<Self> {
        let reader = BufReader::new(r);
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if i == 0 {
                continue; // header row
            }
            let mut parts = line.split(',');
            let t = parts
                .next()
                .ok_or_else(|| Error::Csv(format!("line {}: missing first column", i + 1)))?;
            let v = parts
                .next()
                .ok_or_else(|| Error::Csv(format!("line {}: missing second column", i + 1)))?;
            grid.push(
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("line {}: {e}", i + 1)))?,
            );
            values.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("line {}: {e}", i + 1)))?,
            );
        }
        SampledFunction::new(grid, values, interpolation)
    }
}

pub(crate) fn grid_is_uniform(grid: &[f64]) -> bool {
    if grid.len() < 3 {
        return true;
    }
    let h = grid[1] - grid[0];
    grid.windows(2)
        .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
}

/// n logarithmically spaced points on [a, b], a > 0.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// n linearly spaced points on [a, b].
pub fn lin_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(b > a && n >= 2);
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}
