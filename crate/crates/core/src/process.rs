// SPDX-License-Identifier: MIT OR Apache-2.0

//! Residual marks and the sequential marked empirical process
//!
//! ```text
//! T(k/n, z) = n^{-1/2} * sum_{t <= k} mark_t * 1{X_t <= z},   k = 0..n
//! ```
//!
//! For `d = 1` the process is a step function in `z` with jumps only at the
//! in-window covariate values, so evaluating it at those values (plus a
//! sentinel at `+inf`) attains every supremum and integral exactly. For
//! `d > 1` the in-window sample points are used as the `z` grid, which only
//! approximates the supremum over `R^d`.

use crate::error::{Error, Result};
use crate::kernel::{in_window, EstimatorConfig, Smoother};
use crate::model::Sample;

/// `mark_t = ((Y_t - m_hat(X_t))^2 - sigma2_hat(X_t)) * w(X_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkVector {
    pub marks: Vec<f64>,
    pub in_window: Vec<bool>,
    pub weights_applied: bool,
}

impl MarkVector {
    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }
}

pub fn residual_marks(sample: &Sample, config: &EstimatorConfig) -> Result<MarkVector> {
    if sample.is_empty() {
        return Err(Error::input("sample is empty"));
    }
    let mut smoother = Smoother::new(sample, *config);
    let n = sample.len();
    let mut marks = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for t in 0..n {
        let xt = sample.x_row(t);
        if !in_window(xt, config) {
            marks.push(0.0);
            flags.push(false);
            continue;
        }
        let (m, v) = smoother.mean_and_var(xt)?;
        let r = sample.y()[t] - m;
        let mark = r * r - v;
        if !mark.is_finite() {
            return Err(Error::NonFinite { index: t });
        }
        marks.push(mark);
        flags.push(true);
    }
    Ok(MarkVector { marks, in_window: flags, weights_applied: true })
}

/// The evaluated surface `T(k/n, z_j)`, `k = 0..n`, over the `z` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessGrid {
    n: usize,
    d: usize,
    // row-major, ncols = z_grid.len() / d; last point is the +inf sentinel
    z_grid: Vec<f64>,
    values: Vec<f64>,
}

impl ProcessGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_cols(&self) -> usize {
        self.z_grid.len() / self.d
    }

    /// Index of the `+inf` sentinel column.
    pub fn sentinel(&self) -> usize {
        self.n_cols() - 1
    }

    pub fn z(&self, j: usize) -> &[f64] {
        &self.z_grid[j * self.d..(j + 1) * self.d]
    }

    pub fn s(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.n_cols() + j]
    }

    /// Row `k`, one value per `z` grid point.
    pub fn row(&self, k: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[k * c..(k + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols())
    }

    /// Values of column `j` for `k = 0..n`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }
}

fn leq(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, z)| x <= z)
}

/// Builds the full `(n + 1) x |z grid|` surface by cumulative summation.
pub fn build_grid(marks: &MarkVector, sample: &Sample) -> Result<ProcessGrid> {
    let n = sample.len();
    let d = sample.dim();
    if marks.len() != n || marks.in_window.len() != n {
        return Err(Error::input(format!(
            "{} marks for a sample of {n} observations",
            marks.len()
        )));
    }
    if n == 0 {
        return Err(Error::input("sample is empty"));
    }

    // z grid: distinct in-window points, then the sentinel
    let mut points: Vec<&[f64]> =
        (0..n).filter(|&t| marks.in_window[t]).map(|t| sample.x_row(t)).collect();
    points.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
    let mut z_grid: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    z_grid.extend(std::iter::repeat_n(f64::INFINITY, d));
    let cols = z_grid.len() / d;

    let scale = 1.0 / (n as f64).sqrt();
    let mut values = vec![0.0; (n + 1) * cols];
    let mut acc = vec![0.0; cols];
    for t in 0..n {
        if marks.in_window[t] && marks.marks[t] != 0.0 {
            let mark = marks.marks[t];
            let xt = sample.x_row(t);
            if d == 1 {
                // first column with z >= X_t; every later column includes it
                let first = z_grid.partition_point(|&z| z < xt[0]);
                for a in &mut acc[first..] {
                    *a += mark;
                }
            } else {
                for (j, a) in acc.iter_mut().enumerate() {
                    if leq(xt, &z_grid[j * d..(j + 1) * d]) {
                        *a += mark;
                    }
                }
            }
        }
        let row = &mut values[(t + 1) * cols..(t + 2) * cols];
        for (v, a) in row.iter_mut().zip(&acc) {
            *v = a * scale;
        }
    }

    Ok(ProcessGrid { n, d, z_grid, values })
}

/// `sup_z |T(k/n, z)|` for `k = 0..n`.
pub fn cusum_profile(grid: &ProcessGrid) -> Vec<f64> {
    grid.rows().map(|r| r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))).collect()
}
