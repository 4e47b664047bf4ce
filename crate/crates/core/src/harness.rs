// SPDX-License-Identifier: MIT OR Apache-2.0

//! Rejection-frequency experiments over `(s0, n)` cells of the two
//! simulation models.
//!
//! Replication `r` of cell `(model, case, s0, n)` is generated from the seed
//! `derive(master_seed, [model, case, s0, n, r])`, so every cell (and every
//! replication) can be regenerated in isolation and the aggregate does not
//! depend on how work is scheduled.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::default_config;
use crate::model::{gen_model1, gen_model2, Sample};
use crate::nulldist::{NullTableSet, StatisticKind, TableParams};
use crate::seed::derive;
use crate::stats::{analyze, check_alpha, PerStatistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// `m(x) = 0.5 x`
    A,
    /// `m(x) = -0.5 x`
    B,
}

impl Case {
    pub fn slope(self) -> f64 {
        match self {
            Case::A => 0.5,
            Case::B => -0.5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Case::A => "a",
            Case::B => "b",
        }
    }
}

fn default_replications() -> usize {
    1000
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// 1 or 2.
    pub model: u8,
    pub case: Case,
    pub s0_list: Vec<f64>,
    pub n_list: Vec<usize>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub tables: TableParams,
}

impl ExperimentConfig {
    /// All fifteen cells of one model/case at the study's defaults.
    pub fn full(model: u8, case: Case) -> Self {
        Self {
            model,
            case,
            s0_list: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            n_list: vec![100, 300, 500],
            replications: default_replications(),
            alpha: default_alpha(),
            master_seed: 0,
            tables: TableParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.model, 1 | 2) {
            return Err(Error::config(format!("model must be 1 or 2, got {}", self.model)));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        check_alpha(self.alpha)?;
        if let Some(s0) = self.s0_list.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(Error::config(format!("break fraction {s0} outside [0, 1]")));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return Err(Error::config(format!("sample size {n} is too small")));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn replication_seed(&self, s0: f64, n: usize, rep: usize) -> u64 {
        let case = match self.case {
            Case::A => 0,
            Case::B => 1,
        };
        derive(self.master_seed, &[u64::from(self.model), case, s0.to_bits(), n as u64, rep as u64])
    }

    pub fn generate(&self, s0: f64, n: usize, seed: u64) -> Result<Sample> {
        match self.model {
            1 => gen_model1(n, s0, self.case.slope(), seed),
            2 => gen_model2(n, s0, self.case.slope(), seed),
            m => Err(Error::config(format!("model must be 1 or 2, got {m}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub s0: f64,
    pub n: usize,
    pub frequency: PerStatistic<f64>,
    /// `sqrt(p (1 - p) / completed)`.
    pub std_error: PerStatistic<f64>,
    pub completed: usize,
    /// Replications dropped because the sample was degenerate.
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub config: ExperimentConfig,
    pub cells: Vec<CellResult>,
}

impl RejectionTable {
    pub fn cell(&self, s0: f64, n: usize) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.s0 == s0 && c.n == n)
    }
}

/// Reject flags of one replication, or `None` for a degenerate sample.
pub fn run_replication(config: &ExperimentConfig, tables: &NullTableSet, s0: f64, n: usize, rep: usize) -> Result<Option<PerStatistic<bool>>> {
    let sample = config.generate(s0, n, config.replication_seed(s0, n, rep))?;
    let est = default_config(n)?;
    match analyze(&sample, &est)?.report(tables, config.alpha) {
        Ok(r) => Ok(Some(r.reject)),
        Err(Error::DegenerateSample) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_experiment(config: &ExperimentConfig, tables: &NullTableSet) -> Result<RejectionTable> {
    config.validate()?;
    let cells: Vec<(f64, usize)> = config
        .s0_list
        .iter()
        .flat_map(|&s0| config.n_list.iter().map(move |&n| (s0, n)))
        .collect();
    let reps = config.replications;

    let outcomes: Vec<Option<PerStatistic<bool>>> = (0..cells.len() * reps)
        .into_par_iter()
        .map(|i| {
            let (s0, n) = cells[i / reps];
            run_replication(config, tables, s0, n, i % reps)
        })
        .collect::<Result<_>>()?;

    let results = cells
        .iter()
        .zip(outcomes.chunks(reps))
        .map(|(&(s0, n), chunk)| {
            let done: Vec<&PerStatistic<bool>> = chunk.iter().flatten().collect();
            let completed = done.len();
            let freq = |kind: StatisticKind| {
                if completed == 0 {
                    0.0
                } else {
                    done.iter().filter(|r| r.get(kind)).count() as f64 / completed as f64
                }
            };
            let frequency = PerStatistic::<f64>::default().map(|kind, _| freq(kind));
            let std_error = frequency.map(|_, p| {
                if completed == 0 {
                    0.0
                } else {
                    (p * (1.0 - p) / completed as f64).sqrt()
                }
            });
            CellResult { s0, n, frequency, std_error, completed, failed: reps - completed }
        })
        .collect();

    Ok(RejectionTable { config: config.clone(), cells: results })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableStyle {
    Csv,
    Markdown,
}

fn metadata_lines(cfg: &ExperimentConfig) -> Vec<String> {
    vec![
        format!("model={} case={}", cfg.model, cfg.case.label()),
        format!("replications={} alpha={} master_seed={}", cfg.replications, cfg.alpha, cfg.master_seed),
        format!(
            "null tables: grid_1d={} grid_2d={} replications={} seed={}",
            cfg.tables.grid_1d, cfg.tables.grid_2d, cfg.tables.replications, cfg.tables.seed
        ),
        "estimator: Epanechnikov kernel, h = n^(-1/3), c = ln n".to_string(),
    ]
}

/// CSV header.
pub const CSV_COLUMNS: [&str; 12] =
    ["s0", "n", "tn1", "tn2", "ks", "cm", "se_tn1", "se_tn2", "se_ks", "se_cm", "completed", "failed"];

/// Renders frequencies to three decimals. CSV output carries the metadata as
/// `#` comment lines.
pub fn format_table(table: &RejectionTable, style: TableStyle) -> String {
    let mut out = String::new();
    match style {
        TableStyle::Csv => {
            for line in metadata_lines(&table.config) {
                let _ = writeln!(out, "# {line}");
            }
            let _ = writeln!(out, "{}", CSV_COLUMNS.join(","));
            for c in &table.cells {
                let f = c.frequency;
                let e = c.std_error;
                let _ = writeln!(
                    out,
                    "{},{},{:.3},{:.3},{:.3},{:.3},{:.4},{:.4},{:.4},{:.4},{},{}",
                    c.s0, c.n, f.tn1, f.tn2, f.ks, f.cm, e.tn1, e.tn2, e.ks, e.cm, c.completed, c.failed
                );
            }
        }
        TableStyle::Markdown => {
            let cfg = &table.config;
            let _ = writeln!(out, "Rejection frequencies, model {} ({})\n", cfg.model, cfg.case.label());
            let _ = writeln!(out, "| s0 | n | T_n1 | T_n2 | KS | CM |");
            let _ = writeln!(out, "|---:|---:|---:|---:|---:|---:|");
            for c in &table.cells {
                let f = c.frequency;
                let _ = writeln!(out, "| {} | {} | {:.3} | {:.3} | {:.3} | {:.3} |", c.s0, c.n, f.tn1, f.tn2, f.ks, f.cm);
            }
            let _ = writeln!(out);
            for line in metadata_lines(cfg) {
                let _ = writeln!(out, "- {line}");
            }
        }
    }
    out
}

/// One parsed CSV row: `(s0, n, frequencies)`.
pub type CsvRow = (f64, usize, PerStatistic<f64>);

/// Reads back the frequency columns of [`format_table`]'s CSV output.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_COLUMNS {
        return Err(Error::input(format!("unexpected CSV header {headers:?}")));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| Error::input(format!("bad number '{}' in column {}", &rec[i], CSV_COLUMNS[i])))
        };
        let n = rec[1].parse().map_err(|_| Error::input(format!("bad sample size '{}'", &rec[1])))?;
        rows.push((num(0)?, n, PerStatistic { tn1: num(2)?, tn2: num(3)?, ks: num(4)?, cm: num(5)? }));
    }
    Ok(rows)
}
