// SPDX-License-Identifier: MIT OR Apache-2.0

//! Nadaraya-Watson estimators of the conditional mean and variance, and the
//! truncation weight `w(x) = 1{x in [-c, c]^d}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `0.75 (1 - u^2)` on `[-1, 1]`, product form for `d > 1`.
    #[default]
    Epanechnikov,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub bandwidth: f64,
    pub truncation_radius: f64,
    #[serde(default)]
    pub kernel: KernelKind,
}

impl EstimatorConfig {
    pub fn new(bandwidth: f64, truncation_radius: f64) -> Result<Self> {
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::config(format!("bandwidth must be positive, got {bandwidth}")));
        }
        if !(truncation_radius > 0.0) {
            return Err(Error::config(format!(
                "truncation radius must be positive, got {truncation_radius}"
            )));
        }
        Ok(Self { bandwidth, truncation_radius, kernel: KernelKind::Epanechnikov })
    }
}

/// `h = n^{-1/3}`, `c = ln n`, Epanechnikov kernel.
pub fn default_config(n: usize) -> Result<EstimatorConfig> {
    if n < 2 {
        return Err(Error::config(format!("default configuration needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    EstimatorConfig::new(nf.powf(-1.0 / 3.0), nf.ln())
}

pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() <= 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Product Epanechnikov kernel.
pub fn kernel_value(u: &[f64]) -> f64 {
    u.iter().map(|&v| epanechnikov(v)).product()
}

/// The truncation weight, 1 on the closed box `[-c, c]^d`.
pub fn weight(x: &[f64], config: &EstimatorConfig) -> f64 {
    if in_window(x, config) {
        1.0
    } else {
        0.0
    }
}

pub fn in_window(x: &[f64], config: &EstimatorConfig) -> bool {
    let c = config.truncation_radius;
    x.iter().all(|&v| -c <= v && v <= c)
}

/// Kernel smoother over a fixed sample.
///
/// For `d = 1` the covariates are sorted once so a query only visits
/// observations inside the kernel support; for `d > 1` every observation is
/// visited. Observations with zero kernel weight never enter a sum.
#[derive(Debug)]
pub struct Smoother<'a> {
    sample: &'a Sample,
    config: EstimatorConfig,
    // (x, original index), sorted by x; only populated for d = 1
    sorted: Vec<(f64, usize)>,
    scratch: Vec<(f64, f64)>,
}

impl<'a> Smoother<'a> {
    pub fn new(sample: &'a Sample, config: EstimatorConfig) -> Self {
        let sorted = if sample.dim() == 1 {
            let mut v: Vec<(f64, usize)> = sample.x().iter().copied().zip(0..).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        } else {
            Vec::new()
        };
        Self { sample, config, sorted, scratch: Vec::new() }
    }

    /// Collects `(K((x - X_j)/h), Y_j)` for all `j` with positive weight.
    fn collect(&mut self, x: &[f64]) -> Result<()> {
        let d = self.sample.dim();
        if x.len() != d {
            return Err(Error::input(format!("query point has {} coordinates, expected {d}", x.len())));
        }
        let h = self.config.bandwidth;
        let y = self.sample.y();
        self.scratch.clear();
        if d == 1 {
            let q = x[0];
            let lo = self.sorted.partition_point(|&(v, _)| v < q - h);
            for &(v, j) in self.sorted[lo..].iter().take_while(|&&(v, _)| v <= q + h) {
                let k = epanechnikov((q - v) / h);
                if k > 0.0 {
                    self.scratch.push((k, y[j]));
                }
            }
        } else {
            let mut u = vec![0.0; d];
            for j in 0..self.sample.len() {
                let xj = self.sample.x_row(j);
                for (ui, (&a, &b)) in u.iter_mut().zip(x.iter().zip(xj)) {
                    *ui = (a - b) / h;
                }
                let k = kernel_value(&u);
                if k > 0.0 {
                    self.scratch.push((k, y[j]));
                }
            }
        }
        if self.scratch.is_empty() {
            return Err(Error::EmptyWindow);
        }
        Ok(())
    }

    fn weighted_mean(&self) -> f64 {
        let (num, den) = self
            .scratch
            .iter()
            .fold((0.0, 0.0), |(num, den), &(k, y)| (num + k * y, den + k));
        num / den
    }

    pub fn mean(&mut self, x: &[f64]) -> Result<f64> {
        self.collect(x)?;
        Ok(self.weighted_mean())
    }

    /// `(m_hat(x), sigma2_hat(x))`; the variance centres every residual at
    /// `m_hat(x)`, the query point.
    pub fn mean_and_var(&mut self, x: &[f64]) -> Result<(f64, f64)> {
        self.collect(x)?;
        let m = self.weighted_mean();
        let (num, den) = self.scratch.iter().fold((0.0, 0.0), |(num, den), &(k, y)| {
            let r = y - m;
            (num + k * r * r, den + k)
        });
        Ok((m, num / den))
    }
}

/// Nadaraya-Watson estimate `sum K_j Y_j / sum K_j` at `x`.
pub fn nw_mean(sample: &Sample, config: &EstimatorConfig, x: &[f64]) -> Result<f64> {
    Smoother::new(sample, *config).mean(x)
}

/// Conditional variance estimate `sum K_j (Y_j - m_hat(x))^2 / sum K_j` at `x`.
pub fn cond_var(sample: &Sample, config: &EstimatorConfig, x: &[f64]) -> Result<f64> {
    Smoother::new(sample, *config).mean_and_var(x).map(|(_, v)| v)
}
