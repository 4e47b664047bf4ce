// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic data from conditional heteroscedastic autoregressive nonlinear
//! (CHARN) models with an optional single break in the volatility function.
//!
//! All generators start their recursion at zero, run `burn_in` discarded
//! steps and then emit `n` observations. A single ChaCha generator seeded
//! from `seed` drives each run; per time step the covariate innovation (if
//! any) is drawn first, then the response innovation.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BURN_IN: usize = 200;

/// Observed pairs `(X_t, Y_t)`, `t = 1..n`, with `X_t` in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
    d: usize,
}

impl Sample {
    /// `x` is row-major with `d` columns.
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("covariate dimension must be at least 1"));
        }
        if x.len() != y.len() * d {
            return Err(Error::input(format!(
                "covariate matrix has {} entries, expected {} rows x {d} columns",
                x.len(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite response at index {i}")));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite covariate at row {}", i / d)));
        }
        Ok(Self { x, y, d })
    }

    /// Univariate covariate.
    pub fn univariate(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::new(x, y, 1)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Row-major covariate matrix.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_row(&self, t: usize) -> &[f64] {
        &self.x[t * self.d..(t + 1) * self.d]
    }

    /// Same covariates, responses mapped through `f`.
    pub fn map_response(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.iter().map(|&v| f(v)).collect(), self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeanFn {
    Zero,
    Linear { slope: f64 },
}

impl MeanFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            MeanFn::Zero => 0.0,
            MeanFn::Linear { slope } => slope * x,
        }
    }
}

/// Volatility (conditional standard deviation) function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VolFn {
    Constant { value: f64 },
    /// `scale * exp(rate * x)`
    ExpLinear { scale: f64, rate: f64 },
    /// `sqrt(intercept + coef * x^2)`
    ArchSqrt { intercept: f64, coef: f64 },
}

impl VolFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            VolFn::Constant { value } => value,
            VolFn::ExpLinear { scale, rate } => scale * (rate * x).exp(),
            VolFn::ArchSqrt { intercept, coef } => (intercept + coef * x * x).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            VolFn::Constant { value } => value.is_finite() && value > 0.0,
            VolFn::ExpLinear { scale, rate } => scale.is_finite() && scale > 0.0 && rate.is_finite(),
            VolFn::ArchSqrt { intercept, coef } => {
                intercept.is_finite() && intercept > 0.0 && coef.is_finite() && coef >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("volatility function {self:?} is not strictly positive")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CovariateKind {
    /// `X_t = coefficient * X_{t-1} + xi_t`, independent of the response.
    ExogenousAr1 { coefficient: f64 },
    /// `X_t = Y_{t-1}`.
    AutoregressiveLag1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnovationDist {
    #[default]
    StandardNormal,
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

/// A CHARN model `Y_t = m(X_t) + sigma_t(X_t) eps_t` whose volatility
/// switches from `vol_fn_pre` to `vol_fn_post` after `floor(n * break_fraction)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub mean_fn: MeanFn,
    pub vol_fn_pre: VolFn,
    pub vol_fn_post: VolFn,
    pub break_fraction: f64,
    pub covariate_kind: CovariateKind,
    #[serde(default)]
    pub innovation_dist: InnovationDist,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl ModelSpec {
    /// Heteroscedastic regression on an exogenous AR(1) covariate,
    /// `sigma(x) = 0.5 exp(-0.2x)` before the break, `0.5 exp(0.2x)` after.
    pub fn model1(s0: f64, slope: f64) -> Self {
        Self {
            mean_fn: MeanFn::Linear { slope },
            vol_fn_pre: VolFn::ExpLinear { scale: 0.5, rate: -0.2 },
            vol_fn_post: VolFn::ExpLinear { scale: 0.5, rate: 0.2 },
            break_fraction: s0,
            covariate_kind: CovariateKind::ExogenousAr1 { coefficient: 0.4 },
            innovation_dist: InnovationDist::StandardNormal,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    /// AR-ARCH(1), `sigma(x) = sqrt(0.1 + 0.1x^2)` before the break,
    /// `sqrt(0.1 + 0.7x^2)` after.
    pub fn model2(s0: f64, slope: f64) -> Self {
        Self {
            mean_fn: MeanFn::Linear { slope },
            vol_fn_pre: VolFn::ArchSqrt { intercept: 0.1, coef: 0.1 },
            vol_fn_post: VolFn::ArchSqrt { intercept: 0.1, coef: 0.7 },
            break_fraction: s0,
            covariate_kind: CovariateKind::AutoregressiveLag1,
            innovation_dist: InnovationDist::StandardNormal,
            burn_in: DEFAULT_BURN_IN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.break_fraction) {
            return Err(Error::config(format!(
                "break fraction {} outside [0, 1]",
                self.break_fraction
            )));
        }
        self.vol_fn_pre.validate()?;
        self.vol_fn_post.validate()?;
        match self.mean_fn {
            MeanFn::Linear { slope } if !slope.is_finite() => {
                return Err(Error::config("mean slope must be finite"))
            }
            _ => {}
        }
        if let CovariateKind::ExogenousAr1 { coefficient } = self.covariate_kind {
            if !coefficient.is_finite() {
                return Err(Error::config("AR coefficient must be finite"));
            }
        }
        Ok(())
    }

    /// Last time index (1-based) governed by the pre-break volatility.
    pub fn break_index(&self, n: usize) -> usize {
        ((n as f64) * self.break_fraction).floor() as usize
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Test hooks for [`gen_charn_with`].
#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    /// Replaces the response innovations, one per step including burn-in
    /// (`burn_in + n` values). The generator still draws and discards its
    /// own innovations so the covariate stream is unchanged.
    pub innovations: Option<Vec<f64>>,
    /// Record the volatility value applied at each retained step.
    pub record_sigma: bool,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub sample: Sample,
    /// Empty unless [`SimOptions::record_sigma`] was set.
    pub sigma: Vec<f64>,
}

/// Simulates `n` observations from `spec`.
pub fn gen_charn(spec: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    gen_charn_with(spec, n, seed, &SimOptions::default()).map(|out| out.sample)
}

/// [`gen_charn`] with test hooks.
///
/// On divergence the reported index counts steps from the start of the
/// burn-in.
pub fn gen_charn_with(spec: &ModelSpec, n: usize, seed: u64, opts: &SimOptions) -> Result<SimOutput> {
    if n == 0 {
        return Err(Error::config("sample size must be at least 1"));
    }
    spec.validate()?;
    let total = spec.burn_in + n;
    if let Some(eps) = &opts.innovations {
        if eps.len() != total {
            return Err(Error::config(format!(
                "innovation override has {} values, expected burn_in + n = {total}",
                eps.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let break_at = spec.break_index(n);
    // burn-in runs under the regime in force at t = 1
    let burn_vol = if break_at >= 1 { spec.vol_fn_pre } else { spec.vol_fn_post };

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(if opts.record_sigma { n } else { 0 });
    let mut x_prev = 0.0_f64;
    let mut y_prev = 0.0_f64;

    for step in 0..total {
        let covariate = match spec.covariate_kind {
            CovariateKind::ExogenousAr1 { coefficient } => {
                let xi: f64 = rng.sample(StandardNormal);
                coefficient * x_prev + xi
            }
            CovariateKind::AutoregressiveLag1 => y_prev,
        };
        let drawn: f64 = match spec.innovation_dist {
            InnovationDist::StandardNormal => rng.sample(StandardNormal),
        };
        let eps = opts.innovations.as_ref().map_or(drawn, |v| v[step]);

        let vol = if step < spec.burn_in {
            burn_vol
        } else if step - spec.burn_in < break_at {
            spec.vol_fn_pre
        } else {
            spec.vol_fn_post
        };
        let s = vol.eval(covariate);
        let response = spec.mean_fn.eval(covariate) + s * eps;
        if !response.is_finite() || !covariate.is_finite() {
            return Err(Error::SimulationDiverged { index: step });
        }

        if step >= spec.burn_in {
            x.push(covariate);
            y.push(response);
            if opts.record_sigma {
                sigma.push(s);
            }
        }
        x_prev = covariate;
        y_prev = response;
    }

    Ok(SimOutput { sample: Sample::new(x, y, 1)?, sigma })
}

fn check_s0(s0: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s0) {
        Ok(())
    } else {
        Err(Error::config(format!("break fraction {s0} outside [0, 1]")))
    }
}

/// Model 1: `Y_t = slope X_t + sigma_t(X_t) eps_t`, `X_t = 0.4 X_{t-1} + xi_t`.
pub fn gen_model1(n: usize, s0: f64, slope: f64, seed: u64) -> Result<Sample> {
    check_s0(s0)?;
    gen_charn(&ModelSpec::model1(s0, slope), n, seed)
}

/// Model 2: `Y_t = slope Y_{t-1} + sigma_t(Y_{t-1}) eps_t`.
pub fn gen_model2(n: usize, s0: f64, slope: f64, seed: u64) -> Result<Sample> {
    check_s0(s0)?;
    gen_charn(&ModelSpec::model2(s0, slope), n, seed)
}

/// Mixing condition for the linear AR-ARCH model
/// `Y_t = sum a_i Y_{t-i} + (b_0 + sum b_i Y_{t-i}^2)^{1/2} eps_t`:
/// `(sum |a_i|)^2 + sum b_i < 1`. `arch_coeffs` excludes `b_0`.
pub fn check_arch_stationarity(ar_coeffs: &[f64], arch_coeffs: &[f64]) -> Result<bool> {
    if ar_coeffs.len() != arch_coeffs.len() {
        return Err(Error::config(format!(
            "{} AR coefficients but {} ARCH coefficients",
            ar_coeffs.len(),
            arch_coeffs.len()
        )));
    }
    if let Some(b) = arch_coeffs.iter().find(|b| !(**b >= 0.0)) {
        return Err(Error::config(format!("ARCH coefficient {b} must be nonnegative")));
    }
    let a: f64 = ar_coeffs.iter().map(|v| v.abs()).sum();
    let b: f64 = arch_coeffs.iter().sum();
    Ok(a * a + b < 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    /// Straight-line model 1 recursion, written independently of `gen_charn`.
    fn model1_oracle(n: usize, s0: f64, slope: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (n as f64 * s0).floor() as usize;
        let mut xp = 0.0;
        let (mut xs, mut ys) = (vec![], vec![]);
        for i in 0..(200 + n) {
            let xi: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            let xt = 0.4 * xp + xi;
            let t = i as i64 - 199; // 1-based retained index
            let pre = if t <= 0 { k >= 1 } else { (t as usize) <= k };
            let sd = if pre { 0.5 * (-0.2 * xt).exp() } else { 0.5 * (0.2 * xt).exp() };
            let yt = slope * xt + sd * e;
            if t >= 1 {
                xs.push(xt);
                ys.push(yt);
            }
            xp = xt;
        }
        (xs, ys)
    }

    fn model2_oracle(n: usize, s0: f64, slope: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = (n as f64 * s0).floor() as usize;
        let mut yp = 0.0;
        let (mut xs, mut ys) = (vec![], vec![]);
        for i in 0..(200 + n) {
            let e: f64 = rng.sample(StandardNormal);
            let t = i as i64 - 199;
            let pre = if t <= 0 { k >= 1 } else { (t as usize) <= k };
            let b1 = if pre { 0.1 } else { 0.7 };
            let yt = slope * yp + (0.1 + b1 * yp * yp).sqrt() * e;
            if t >= 1 {
                xs.push(yp);
                ys.push(yt);
            }
            yp = yt;
        }
        (xs, ys)
    }

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (v.len() - 1) as f64
    }

    #[test]
    fn model1_matches_oracle() {
        for (s0, slope, seed) in [(0.5, 0.5, 1), (0.0, 0.5, 4), (1.0, -0.5, 9), (0.25, -0.5, 3)] {
            let s = gen_model1(500, s0, slope, seed).unwrap();
            let (xs, ys) = model1_oracle(500, s0, slope, seed);
            assert_eq!(s.x(), &xs[..]);
            assert_eq!(s.y(), &ys[..]);
        }
    }

    /// For positive covariates the post-break volatility `0.5 exp(0.2 x)`
    /// exceeds the pre-break `0.5 exp(-0.2 x)`, so the mean squared
    /// regression error over `x > 0` must grow after the break.
    #[test]
    fn model1_break_raises_late_variance_for_positive_x() {
        let n = 2000;
        let s = gen_model1(n, 0.5, 0.5, 1).unwrap();
        let err2 = |range: std::ops::Range<usize>| {
            let v: Vec<f64> = range
                .filter(|&t| s.x()[t] > 0.0)
                .map(|t| (s.y()[t] - 0.5 * s.x()[t]).powi(2))
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let (early, late) = (err2(0..n / 2), err2(n / 2..n));
        assert!(late > early, "late {late} early {early}");
    }

    #[test]
    fn model2_matches_oracle() {
        for (s0, slope, seed) in [(0.5, -0.5, 7), (1.0, 0.5, 2), (0.0, 0.5, 11)] {
            let s = gen_model2(300, s0, slope, seed).unwrap();
            let (xs, ys) = model2_oracle(300, s0, slope, seed);
            assert_eq!(s.x(), &xs[..]);
            assert_eq!(s.y(), &ys[..]);
        }
    }

    #[test]
    fn model2_covariate_is_lagged_response() {
        let s = gen_model2(100, 0.5, 0.5, 3).unwrap();
        for t in 1..100 {
            assert_eq!(s.x()[t], s.y()[t - 1]);
        }
    }

    #[test]
    fn zero_innovations_give_zero_response() {
        let eps = vec![0.0; 210];
        let opts = SimOptions { innovations: Some(eps), record_sigma: false };
        let out = gen_charn_with(&ModelSpec::model1(0.5, 0.0), 10, 5, &opts).unwrap();
        assert!(out.sample.y().iter().all(|&v| v == 0.0));
        assert!(out.sample.x().iter().any(|&v| v != 0.0));

        let opts = SimOptions { innovations: Some(vec![0.0; 205]), record_sigma: false };
        let out = gen_charn_with(&ModelSpec::model2(0.5, 0.0), 5, 5, &opts).unwrap();
        assert!(out.sample.y().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn innovation_override_length_checked() {
        let opts = SimOptions { innovations: Some(vec![0.0; 3]), record_sigma: false };
        assert!(matches!(
            gen_charn_with(&ModelSpec::model1(0.5, 0.0), 10, 5, &opts),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sigma_trace_respects_break() {
        let spec = ModelSpec::model1(0.3, 0.5);
        let opts = SimOptions { innovations: None, record_sigma: true };
        let out = gen_charn_with(&spec, 100, 8, &opts).unwrap();
        for (t, (&s, &x)) in out.sigma.iter().zip(out.sample.x()).enumerate() {
            let expected = if t + 1 <= 30 { 0.5 * (-0.2 * x).exp() } else { 0.5 * (0.2 * x).exp() };
            assert_eq!(s, expected, "t = {}", t + 1);
        }
    }

    #[test]
    fn h0_uses_single_volatility() {
        let opts = SimOptions { innovations: None, record_sigma: true };
        let out = gen_charn_with(&ModelSpec::model1(0.0, 0.5), 500, 1, &opts).unwrap();
        for (&s, &x) in out.sigma.iter().zip(out.sample.x()) {
            assert_eq!(s, 0.5 * (0.2 * x).exp());
        }
        let out = gen_charn_with(&ModelSpec::model2(1.0, 0.5), 500, 1, &opts).unwrap();
        for (&s, &x) in out.sigma.iter().zip(out.sample.x()) {
            assert_eq!(s, (0.1 + 0.1 * x * x).sqrt());
        }
    }

    #[test]
    fn charn_spec_reproduces_hardcoded_models() {
        let spec = ModelSpec {
            mean_fn: MeanFn::Linear { slope: -0.5 },
            vol_fn_pre: VolFn::ExpLinear { scale: 0.5, rate: -0.2 },
            vol_fn_post: VolFn::ExpLinear { scale: 0.5, rate: 0.2 },
            break_fraction: 0.75,
            covariate_kind: CovariateKind::ExogenousAr1 { coefficient: 0.4 },
            innovation_dist: InnovationDist::StandardNormal,
            burn_in: 200,
        };
        assert_eq!(gen_charn(&spec, 100, 3).unwrap(), gen_model1(100, 0.75, -0.5, 3).unwrap());
        let spec2 = ModelSpec::from_toml(&ModelSpec::model2(0.5, 0.5).to_toml().unwrap()).unwrap();
        assert_eq!(gen_charn(&spec2, 200, 4).unwrap(), gen_model2(200, 0.5, 0.5, 4).unwrap());
    }

    #[test]
    fn unit_volatility_gives_iid_normals() {
        let spec = ModelSpec {
            mean_fn: MeanFn::Zero,
            vol_fn_pre: VolFn::Constant { value: 1.0 },
            vol_fn_post: VolFn::Constant { value: 1.0 },
            break_fraction: 0.0,
            covariate_kind: CovariateKind::ExogenousAr1 { coefficient: 0.0 },
            innovation_dist: InnovationDist::StandardNormal,
            burn_in: 0,
        };
        let s = gen_charn(&spec, 5, 21).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for &y in s.y() {
            let _xi: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            assert_eq!(y, e);
        }
        assert_eq!(s, gen_charn(&spec, 5, 21).unwrap());
    }

    #[test]
    fn divergence_reports_index() {
        let spec = ModelSpec {
            mean_fn: MeanFn::Linear { slope: 1e200 },
            vol_fn_pre: VolFn::Constant { value: 1.0 },
            vol_fn_post: VolFn::Constant { value: 1.0 },
            break_fraction: 0.0,
            covariate_kind: CovariateKind::AutoregressiveLag1,
            innovation_dist: InnovationDist::StandardNormal,
            burn_in: 0,
        };
        match gen_charn(&spec, 10, 1) {
            Err(Error::SimulationDiverged { index }) => assert!(index >= 1 && index < 10),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_configuration() {
        assert!(matches!(gen_model1(0, 0.5, 0.5, 1), Err(Error::Config(_))));
        assert!(matches!(gen_model1(10, 1.5, 0.5, 1), Err(Error::Config(_))));
        assert!(matches!(gen_model2(10, -0.1, 0.5, 1), Err(Error::Config(_))));
        assert!(ModelSpec::from_toml("break_fraction = 0.5").is_err());
    }

    #[test]
    fn arch_stationarity_examples() {
        assert!(check_arch_stationarity(&[0.5], &[0.1]).unwrap());
        assert!(check_arch_stationarity(&[0.0], &[0.0]).unwrap());
        assert!(!check_arch_stationarity(&[0.5], &[0.8]).unwrap());
        // post-break regime of model 2: 0.25 + 0.7 < 1
        assert!(check_arch_stationarity(&[0.5], &[0.7]).unwrap());
        assert!(check_arch_stationarity(&[-0.5], &[0.7]).unwrap());
        assert!(check_arch_stationarity(&[0.5, 0.1], &[0.1]).is_err());
    }

    /// Two-sample Welch statistic on per-run means of Y^2: a long run's tail
    /// without burn-in against the default burn-in, ten runs each.
    #[test]
    fn burn_in_marginals_agree() {
        let n = 400;
        let stat = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>() / v.len() as f64;
        let mut with_burn = vec![];
        let mut tail = vec![];
        for seed in 0..10u64 {
            with_burn.push(stat(gen_model2(n, 0.0, 0.5, seed).unwrap().y()));
            let mut spec = ModelSpec::model2(0.0, 0.5);
            spec.burn_in = 0;
            let long = gen_charn(&spec, n + 1000, 1000 + seed).unwrap();
            tail.push(stat(&long.y()[1000..]));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let z = (mean(&with_burn) - mean(&tail))
            / (variance(&with_burn) / 10.0 + variance(&tail) / 10.0).sqrt();
        // t with ~18 df, two-sided 1%
        assert!(z.abs() < 2.88, "z = {z}");
    }

    proptest! {
        #[test]
        fn stationarity_is_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, da in 0.0f64..0.5, db in 0.0f64..0.5) {
            let base = check_arch_stationarity(&[a], &[b]).unwrap();
            let bigger = check_arch_stationarity(&[a + da], &[b + db]).unwrap();
            prop_assert!(base || !bigger);
            let neg = check_arch_stationarity(&[-(a + da)], &[b]).unwrap();
            prop_assert!(check_arch_stationarity(&[a], &[b]).unwrap() || !neg);
        }

        #[test]
        fn generation_is_deterministic(seed in any::<u64>(), s0 in 0.0f64..=1.0) {
            prop_assert_eq!(gen_model1(50, s0, 0.5, seed).unwrap(), gen_model1(50, s0, 0.5, seed).unwrap());
        }
    }
}
