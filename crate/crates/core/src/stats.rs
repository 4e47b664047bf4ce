// SPDX-License-Identifier: MIT OR Apache-2.0

//! Test statistics, the variance normalizer, p-values and the change-point
//! estimate.
//!
//! | statistic | reduction of `T(s, z)`                 | normalized by | null law   |
//! |-----------|----------------------------------------|---------------|------------|
//! | `T_n1`    | `sup_z sup_s abs(T)`                   | `sqrt(c_hat)` | kiefer-sup |
//! | `T_n2`    | `sup_z int_0^1 T^2 ds`                 | `c_hat`       | kiefer-cvm |
//! | `KS`      | `sup_s abs(T(s, inf))`                 | `sqrt(c_hat)` | bridge-sup |
//! | `CM`      | `int_0^1 T(s, inf)^2 ds`               | `c_hat`       | bridge-cvm |
//!
//! `T(., z)` is constant on `[k/n, (k+1)/n)`, so the integrals are exact
//! means over `k = 1..n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::EstimatorConfig;
use crate::model::Sample;
use crate::nulldist::{NullTable, NullTableSet, StatisticKind};
use crate::process::{build_grid, cusum_profile, residual_marks, MarkVector, ProcessGrid};

/// One value per statistic.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerStatistic<T> {
    pub tn1: T,
    pub tn2: T,
    pub ks: T,
    pub cm: T,
}

impl<T: Copy> PerStatistic<T> {
    pub fn get(&self, kind: StatisticKind) -> T {
        match kind {
            StatisticKind::KieferSup => self.tn1,
            StatisticKind::KieferCvm => self.tn2,
            StatisticKind::BridgeSup => self.ks,
            StatisticKind::BridgeCvm => self.cm,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(StatisticKind, T) -> U) -> PerStatistic<U> {
        PerStatistic {
            tn1: f(StatisticKind::KieferSup, self.tn1),
            tn2: f(StatisticKind::KieferCvm, self.tn2),
            ks: f(StatisticKind::BridgeSup, self.ks),
            cm: f(StatisticKind::BridgeCvm, self.cm),
        }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(StatisticKind, T) -> Result<U>) -> Result<PerStatistic<U>> {
        Ok(PerStatistic {
            tn1: f(StatisticKind::KieferSup, self.tn1)?,
            tn2: f(StatisticKind::KieferCvm, self.tn2)?,
            ks: f(StatisticKind::BridgeSup, self.ks)?,
            cm: f(StatisticKind::BridgeCvm, self.cm)?,
        })
    }
}

/// Statistic labels in table order.
pub const STATISTIC_NAMES: [&str; 4] = ["tn1", "tn2", "ks", "cm"];

fn abs_max(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn mean_square(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.map(|v| v * v).sum::<f64>() / n as f64
}

pub fn stat_tn1(grid: &ProcessGrid) -> f64 {
    abs_max(grid.rows().flat_map(|r| r.iter().copied()))
}

pub fn stat_tn2(grid: &ProcessGrid) -> f64 {
    let n = grid.n();
    let cols = grid.n_cols();
    let mut sums = vec![0.0; cols];
    for row in grid.rows().skip(1) {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v * v;
        }
    }
    sums.into_iter().fold(0.0_f64, |m, s| m.max(s / n as f64))
}

pub fn stat_ks(grid: &ProcessGrid) -> f64 {
    abs_max(grid.column(grid.sentinel()))
}

pub fn stat_cm(grid: &ProcessGrid) -> f64 {
    mean_square(grid.column(grid.sentinel()).skip(1), grid.n())
}

pub fn raw_statistics(grid: &ProcessGrid) -> PerStatistic<f64> {
    PerStatistic { tn1: stat_tn1(grid), tn2: stat_tn2(grid), ks: stat_ks(grid), cm: stat_cm(grid) }
}

/// `c_hat = n^{-1} sum mark_t^2`; the marks already carry the weight.
pub fn c_hat_from_marks(marks: &MarkVector) -> f64 {
    mean_square(marks.marks.iter().copied(), marks.len())
}

pub fn c_hat(sample: &Sample, config: &EstimatorConfig) -> Result<f64> {
    Ok(c_hat_from_marks(&residual_marks(sample, config)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub s_hat: f64,
    pub index: usize,
    /// Set when the CUSUM profile is identically zero.
    pub degenerate: bool,
}

/// `argmax_k sup_z |T(k/n, z)|`, smallest maximizer on ties.
pub fn estimate_changepoint(grid: &ProcessGrid) -> ChangePoint {
    let profile = cusum_profile(grid);
    let (index, top) = profile
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |(bi, bv), (k, &v)| if v > bv { (k, v) } else { (bi, bv) });
    ChangePoint { s_hat: index as f64 / grid.n() as f64, index, degenerate: top == 0.0 }
}

/// `(1 + #{draws >= stat}) / (R + 1)`.
pub fn p_value(stat_norm: f64, table: &NullTable) -> Result<f64> {
    if table.draws.is_empty() {
        return Err(Error::config("null table is empty"));
    }
    let r = table.draws.len();
    let below = table.draws.partition_point(|&d| d < stat_norm);
    Ok((1 + r - below) as f64 / (r + 1) as f64)
}

/// Marks, process surface and raw statistics of one sample.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub marks: MarkVector,
    pub grid: ProcessGrid,
    pub raw: PerStatistic<f64>,
    pub c_hat: f64,
}

pub fn analyze(sample: &Sample, config: &EstimatorConfig) -> Result<Analysis> {
    let marks = residual_marks(sample, config)?;
    let grid = build_grid(&marks, sample)?;
    let raw = raw_statistics(&grid);
    let c_hat = c_hat_from_marks(&marks);
    Ok(Analysis { marks, grid, raw, c_hat })
}

impl Analysis {
    /// Statistics divided by `sqrt(c_hat)` (sup type) or `c_hat` (integral type).
    pub fn normalized(&self) -> Result<PerStatistic<f64>> {
        if !(self.c_hat > 0.0) {
            return Err(Error::DegenerateSample);
        }
        let root = self.c_hat.sqrt();
        Ok(PerStatistic {
            tn1: self.raw.tn1 / root,
            tn2: self.raw.tn2 / self.c_hat,
            ks: self.raw.ks / root,
            cm: self.raw.cm / self.c_hat,
        })
    }

    pub fn report(&self, tables: &NullTableSet, alpha: f64) -> Result<TestReport> {
        check_alpha(alpha)?;
        let normalized = self.normalized()?;
        let p_values = normalized.try_map(|kind, v| p_value(v, tables.get(kind)))?;
        let reject = p_values.map(|_, p| p < alpha);
        Ok(TestReport {
            n: self.grid.n(),
            statistics: self.raw,
            normalized,
            c_hat: self.c_hat,
            p_values,
            reject,
            alpha,
            changepoint: estimate_changepoint(&self.grid),
        })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("level must lie in (0, 1), got {alpha}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub n: usize,
    pub statistics: PerStatistic<f64>,
    pub normalized: PerStatistic<f64>,
    pub c_hat: f64,
    pub p_values: PerStatistic<f64>,
    pub reject: PerStatistic<bool>,
    pub alpha: f64,
    pub changepoint: ChangePoint,
}

impl TestReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Full test: estimate, build the process, normalize and compare each
/// statistic with its null table. Rejects when `p < alpha`.
pub fn run_test(sample: &Sample, config: &EstimatorConfig, tables: &NullTableSet, alpha: f64) -> Result<TestReport> {
    analyze(sample, config)?.report(tables, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_model1, gen_model2};
    use crate::nulldist::TableParams;
    use proptest::prelude::*;

    fn grid_from(xs: Vec<f64>, marks: Vec<f64>) -> ProcessGrid {
        let n = xs.len();
        let s = Sample::univariate(xs, vec![0.0; n]).unwrap();
        let mk = MarkVector { marks, in_window: vec![true; n], weights_applied: true };
        build_grid(&mk, &s).unwrap()
    }

    fn small_tables() -> NullTableSet {
        NullTableSet::simulate(&TableParams { grid_1d: 100, grid_2d: 20, replications: 500, seed: 1 }).unwrap()
    }

    #[test]
    fn zero_marks_give_zero_statistics() {
        let g = grid_from(vec![0.3, -0.2, 0.9], vec![0.0; 3]);
        assert_eq!(raw_statistics(&g), PerStatistic::default());
        let cp = estimate_changepoint(&g);
        assert_eq!((cp.s_hat, cp.index, cp.degenerate), (0.0, 0, true));
    }

    #[test]
    fn single_mark() {
        let n = 8;
        let mu = -2.5;
        let mut marks = vec![0.0; n];
        marks[0] = mu;
        let g = grid_from((0..n).map(|i| i as f64 / 10.0).collect(), marks);
        let r = raw_statistics(&g);
        assert!((r.tn1 - mu.abs() / (n as f64).sqrt()).abs() < 1e-15);
        assert!((r.tn2 - mu * mu / n as f64).abs() < 1e-14);
        assert!((r.ks - r.tn1).abs() < 1e-15);
        assert!((r.cm - r.tn2).abs() < 1e-15);
        let cp = estimate_changepoint(&g);
        assert_eq!(cp.index, 1);
        assert_eq!(cp.s_hat, 1.0 / n as f64);
        assert!(!cp.degenerate);
    }

    #[test]
    fn cancelling_marks_still_give_positive_ks() {
        let g = grid_from(vec![0.1, 0.2, 0.3, 0.4], vec![3.0, 3.0, -3.0, -3.0]);
        assert!(stat_ks(&g) > 0.0);
        assert!(g.value(4, g.sentinel()).abs() < 1e-15);
        assert_eq!(estimate_changepoint(&g).index, 2);
    }

    #[test]
    fn tn2_matches_refined_riemann_sum() {
        let s = gen_model1(20, 0.5, 0.5, 3).unwrap();
        let c = EstimatorConfig::new(0.6, 2.0).unwrap();
        let a = analyze(&s, &c).unwrap();
        let n = 20;
        let refine = 10;
        let mut best = 0.0_f64;
        for j in 0..a.grid.n_cols() {
            // midpoints of a 10x finer grid; the step function takes the
            // value at k on ((k - 1) / n, k / n]
            let integral: f64 = (0..n * refine)
                .map(|q| a.grid.value(q / refine + 1, j).powi(2))
                .sum::<f64>()
                / (n * refine) as f64;
            best = best.max(integral);
        }
        assert!((a.raw.tn2 - best).abs() <= 1e-12 * best.max(1e-300));
    }

    #[test]
    fn c_hat_arithmetic() {
        let mk = MarkVector {
            marks: vec![2.0, -2.0, 0.0],
            in_window: vec![true, true, false],
            weights_applied: true,
        };
        assert!((c_hat_from_marks(&mk) - 8.0 / 3.0).abs() < 1e-15);
        let s = Sample::univariate(vec![0.1, 0.2, 0.3], vec![4.0; 3]).unwrap();
        assert_eq!(c_hat(&s, &EstimatorConfig::new(0.5, 1.0).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn c_hat_direct_loop_on_model2() {
        let s = gen_model2(500, 0.0, 0.5, 12).unwrap();
        let c = crate::kernel::default_config(500).unwrap();
        let got = c_hat(&s, &c).unwrap();
        let mut acc = 0.0;
        for t in 0..500 {
            let x = s.x_row(t);
            let w = crate::kernel::weight(x, &c);
            if w == 0.0 {
                continue;
            }
            let m = crate::kernel::nw_mean(&s, &c, x).unwrap();
            let v = crate::kernel::cond_var(&s, &c, x).unwrap();
            acc += ((s.y()[t] - m).powi(2) - v).powi(2) * w;
        }
        let want = acc / 500.0;
        assert!(got > 0.0 && got.is_finite());
        assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn p_value_edges() {
        let t = small_tables();
        let table = &t.bridge_sup;
        let r = table.draws.len() as f64;
        assert_eq!(p_value(-1.0, table).unwrap(), 1.0);
        assert_eq!(p_value(1e9, table).unwrap(), 1.0 / (r + 1.0));
        // synthetic table i / R: a statistic strictly inside the 95th
        // percentile's gap leaves exactly 5% of the draws above it
        let r = 100_000usize;
        let uniform = NullTable::from_draws(
            StatisticKind::BridgeSup,
            10,
            1,
            (0..r).map(|i| i as f64 / r as f64).collect(),
        );
        let stat = 0.95 - 0.5 / r as f64;
        let p = p_value(stat, &uniform).unwrap();
        assert!((p - 0.05).abs() <= 1.0 / (r as f64 + 1.0), "{p}");
        let empty = NullTable { draws: vec![], replications: 0, ..table.clone() };
        assert!(p_value(1.0, &empty).is_err());
    }

    #[test]
    fn degenerate_sample_is_an_error() {
        let s = Sample::univariate(vec![0.1, 0.2, 0.3, 0.35], vec![1.5; 4]).unwrap();
        let c = EstimatorConfig::new(0.5, 3.0).unwrap();
        let a = analyze(&s, &c).unwrap();
        assert_eq!(a.raw, PerStatistic::default());
        assert!(matches!(run_test(&s, &c, &small_tables(), 0.05), Err(Error::DegenerateSample)));
    }

    #[test]
    fn report_round_trips_through_json() {
        let s = gen_model2(200, 0.5, 0.5, 5).unwrap();
        let c = crate::kernel::default_config(200).unwrap();
        let rep = run_test(&s, &c, &small_tables(), 0.05).unwrap();
        let json = rep.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for key in ["statistics", "normalized", "p_values", "reject", "alpha", "c_hat", "changepoint"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(TestReport::from_json(&json).unwrap(), rep);
        for kind in StatisticKind::ALL {
            assert_eq!(rep.reject.get(kind), rep.p_values.get(kind) < 0.05);
        }
    }

    proptest! {
        #[test]
        fn reductions_are_ordered(seed in 0u64..10_000, n in 5usize..60) {
            let s = gen_model1(n, 0.5, 0.5, seed).unwrap();
            let c = EstimatorConfig::new(0.5, 2.5).unwrap();
            let a = analyze(&s, &c).unwrap();
            prop_assert!(a.raw.ks <= a.raw.tn1);
            prop_assert!(a.raw.cm <= a.raw.tn2);
            let cp = estimate_changepoint(&a.grid);
            let profile = cusum_profile(&a.grid);
            let top = profile.iter().cloned().fold(0.0f64, f64::max);
            let first = profile.iter().position(|&v| v == top).unwrap();
            prop_assert_eq!(cp.index, first);
        }

        #[test]
        fn p_value_is_antitone(a in 0.0f64..3.0, b in 0.0f64..3.0) {
            let t = NullTable { kind: StatisticKind::BridgeSup, grid_m: 2, replications: 5, seed: 0, draws: vec![0.5, 1.0, 1.0, 1.5, 2.0] };
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(p_value(lo, &t).unwrap() >= p_value(hi, &t).unwrap());
        }
    }
}
