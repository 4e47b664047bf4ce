// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo tables for the limiting null laws of the normalized statistics.
//!
//! Under the null hypothesis and `d = 1`, `T(s, z) / sqrt(c)` converges to a
//! Kiefer-Mueller process `K0(s, t)` with covariance
//! `(s1 ^ s2 - s1 s2)(t1 ^ t2)`: a Brownian bridge in the time fraction `s`
//! and a Brownian motion in the (time-changed) covariate coordinate `t`.
//! The classical CUSUM statistics see only `t = 1`, a standard Brownian
//! bridge.
//!
//! Lattice approximation on `{i/m} x {j/m}`: i.i.d. `N(0, 1/m^2)` cell
//! increments, summed in both directions, give the Brownian sheet `B`; then
//! `K0(s, t) = B(s, t) - s B(1, t)`.
//!
//! Replication `r` draws from ChaCha stream `r` of the key derived from the
//! table seed, so tables do not depend on the number of worker threads.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::stream_rng;

pub const TABLE_FORMAT_VERSION: u32 = 1;
const TABLE_MAGIC: &str = "# volchange null table";

/// Default master seed for all null tables.
pub const DEFAULT_TABLE_SEED: u64 = 20_190_610;
pub const DEFAULT_GRID_1D: usize = 1000;
pub const DEFAULT_GRID_2D: usize = 200;
pub const DEFAULT_REPLICATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatisticKind {
    /// `sup_s sup_t |K0(s, t)|`, limit of `T_n1 / sqrt(c)`.
    KieferSup,
    /// `sup_t int_0^1 K0(s, t)^2 ds`, limit of `T_n2 / c`.
    KieferCvm,
    /// `sup_s |B0(s)|`, limit of `KS / sqrt(c)`.
    BridgeSup,
    /// `int_0^1 B0(s)^2 ds`, limit of `CM / c`.
    BridgeCvm,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 4] = [
        StatisticKind::KieferSup,
        StatisticKind::KieferCvm,
        StatisticKind::BridgeSup,
        StatisticKind::BridgeCvm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StatisticKind::KieferSup => "kiefer-sup",
            StatisticKind::KieferCvm => "kiefer-cvm",
            StatisticKind::BridgeSup => "bridge-sup",
            StatisticKind::BridgeCvm => "bridge-cvm",
        }
    }

    pub fn is_kiefer(self) -> bool {
        matches!(self, StatisticKind::KieferSup | StatisticKind::KieferCvm)
    }
}

impl fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown statistic kind '{s}'")))
    }
}

/// Sorted Monte Carlo draws of one limiting functional.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTable {
    pub kind: StatisticKind,
    pub grid_m: usize,
    pub replications: usize,
    pub seed: u64,
    pub draws: Vec<f64>,
}

impl NullTable {
    pub(crate) fn from_draws(kind: StatisticKind, grid_m: usize, seed: u64, mut draws: Vec<f64>) -> Self {
        draws.sort_by(f64::total_cmp);
        Self { kind, grid_m, replications: draws.len(), seed, draws }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        quantile(self, p)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.draws.len() != self.replications {
            return Err(format!(
                "header declares {} replications, found {} draws",
                self.replications,
                self.draws.len()
            ));
        }
        if self.draws.is_empty() {
            return Err("table is empty".into());
        }
        if let Some(v) = self.draws.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(format!("invalid draw {v}"));
        }
        if self.draws.windows(2).any(|w| w[0] > w[1]) {
            return Err("draws are not sorted".into());
        }
        Ok(())
    }
}

fn check_params(grid_m: usize, replications: usize) -> Result<()> {
    if grid_m < 2 {
        return Err(Error::config(format!("lattice resolution must be >= 2, got {grid_m}")));
    }
    if replications == 0 {
        return Err(Error::config("at least one replication is required"));
    }
    Ok(())
}

/// Functionals of one lattice Kiefer-Mueller path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KieferDraw {
    /// `max |K0|` over the lattice.
    pub sup: f64,
    /// `max_t (1/m) sum_{i=1..m} K0(i/m, t)^2`.
    pub cvm: f64,
    /// `max_i |K0(i/m, 1)|`, the bridge at `t = 1`.
    pub bridge_sup: f64,
}

/// One Kiefer-Mueller path on the `m x m` lattice, reduced on the fly.
/// Memory is `O(m)`.
pub fn kiefer_draw(grid_m: usize, seed: u64, replication: u64) -> KieferDraw {
    let mut rng = stream_rng(seed, replication);
    let m = grid_m;
    let step = 1.0 / m as f64;
    // col[i] = B(i/m, t) for the current t, i = 1..m
    let mut col = vec![0.0_f64; m];
    let mut sup = 0.0_f64;
    let mut cvm = 0.0_f64;
    let mut last_row_sup = 0.0_f64;
    for _j in 0..m {
        let mut run = 0.0;
        for c in col.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            run += z * step;
            *c += run;
        }
        let end = col[m - 1];
        let mut row_sup = 0.0_f64;
        let mut row_sq = 0.0;
        for (i, &b) in col.iter().enumerate() {
            let k = b - (i + 1) as f64 * step * end;
            row_sup = row_sup.max(k.abs());
            row_sq += k * k;
        }
        sup = sup.max(row_sup);
        cvm = cvm.max(row_sq * step);
        last_row_sup = row_sup;
    }
    KieferDraw { sup, cvm, bridge_sup: last_row_sup }
}

/// The full lattice `K0(i/m, j/m)`, `i, j = 0..m`, row-major in `j` (the
/// covariate coordinate). Consumes randomness exactly like [`kiefer_draw`].
pub fn kiefer_lattice(grid_m: usize, seed: u64, replication: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, replication);
    let m = grid_m;
    let step = 1.0 / m as f64;
    let w = m + 1;
    let mut sheet = vec![0.0_f64; w * w];
    for j in 1..=m {
        for i in 1..=m {
            let z: f64 = rng.sample(StandardNormal);
            sheet[j * w + i] =
                z * step + sheet[(j - 1) * w + i] + sheet[j * w + i - 1] - sheet[(j - 1) * w + i - 1];
        }
    }
    let mut out = vec![0.0; w * w];
    for j in 0..=m {
        let end = sheet[j * w + m];
        for i in 0..=m {
            out[j * w + i] = sheet[j * w + i] - i as f64 * step * end;
        }
    }
    out
}

fn kiefer_draws(grid_m: usize, replications: usize, seed: u64) -> Vec<KieferDraw> {
    (0..replications as u64).into_par_iter().map(|r| kiefer_draw(grid_m, seed, r)).collect()
}

pub fn simulate_kiefer(kind: StatisticKind, grid_m: usize, replications: usize, seed: u64) -> Result<NullTable> {
    if !kind.is_kiefer() {
        return Err(Error::config(format!("{kind} is not a Kiefer-process functional")));
    }
    check_params(grid_m, replications)?;
    let draws = kiefer_draws(grid_m, replications, seed)
        .into_iter()
        .map(|d| if kind == StatisticKind::KieferSup { d.sup } else { d.cvm })
        .collect();
    Ok(NullTable::from_draws(kind, grid_m, seed, draws))
}

/// Both Kiefer tables from a single set of sheet paths; identical to two
/// calls of [`simulate_kiefer`] at half the cost.
pub fn simulate_kiefer_pair(grid_m: usize, replications: usize, seed: u64) -> Result<(NullTable, NullTable)> {
    check_params(grid_m, replications)?;
    let (sup, cvm): (Vec<f64>, Vec<f64>) =
        kiefer_draws(grid_m, replications, seed).into_iter().map(|d| (d.sup, d.cvm)).unzip();
    Ok((
        NullTable::from_draws(StatisticKind::KieferSup, grid_m, seed, sup),
        NullTable::from_draws(StatisticKind::KieferCvm, grid_m, seed, cvm),
    ))
}

/// `(sup |B0|, mean B0^2)` of one Brownian bridge simulated on `{i/m}`.
///
/// The mean square is the lattice Riemann sum. The supremum is taken over
/// the continuous path: between neighbouring lattice points the bridge,
/// conditioned on its two endpoint values, is itself a Brownian bridge, and
/// its maximum and minimum are drawn exactly from their conditional laws.
/// Without this the lattice maximum runs low by roughly `0.58 / sqrt(m)`.
pub fn bridge_draw(grid_m: usize, seed: u64, replication: u64) -> (f64, f64) {
    let mut rng = stream_rng(seed, replication);
    let m = grid_m;
    let step = 1.0 / m as f64;
    let scale = step.sqrt();
    let mut path = Vec::with_capacity(m + 1);
    path.push(0.0);
    let mut w = 0.0;
    for _ in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        w += z * scale;
        path.push(w);
    }
    let end = w;
    let mut sq = 0.0;
    for (i, v) in path.iter_mut().enumerate() {
        *v -= i as f64 * step * end;
        sq += *v * *v;
    }
    let mut sup = 0.0_f64;
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let hi = interval_extreme(a, b, step, 1.0 - rng.random::<f64>());
        let lo = interval_extreme(-a, -b, step, 1.0 - rng.random::<f64>());
        sup = sup.max(hi).max(lo);
    }
    (sup, sq * step)
}

/// Inverse-CDF draw of the maximum of a unit-rate Brownian bridge of
/// duration `len` pinned at `a` and `b`, with `u` uniform on `(0, 1]`.
fn interval_extreme(a: f64, b: f64, len: f64, u: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b + (d * d - 2.0 * len * u.ln()).sqrt())
}

fn bridge_draws(grid_m: usize, replications: usize, seed: u64) -> Vec<(f64, f64)> {
    (0..replications as u64).into_par_iter().map(|r| bridge_draw(grid_m, seed, r)).collect()
}

pub fn simulate_bridge(kind: StatisticKind, grid_m: usize, replications: usize, seed: u64) -> Result<NullTable> {
    if kind.is_kiefer() {
        return Err(Error::config(format!("{kind} is not a Brownian-bridge functional")));
    }
    check_params(grid_m, replications)?;
    let draws = bridge_draws(grid_m, replications, seed)
        .into_iter()
        .map(|(sup, cvm)| if kind == StatisticKind::BridgeSup { sup } else { cvm })
        .collect();
    Ok(NullTable::from_draws(kind, grid_m, seed, draws))
}

pub fn simulate_bridge_pair(grid_m: usize, replications: usize, seed: u64) -> Result<(NullTable, NullTable)> {
    check_params(grid_m, replications)?;
    let (sup, cvm): (Vec<f64>, Vec<f64>) = bridge_draws(grid_m, replications, seed).into_iter().unzip();
    Ok((
        NullTable::from_draws(StatisticKind::BridgeSup, grid_m, seed, sup),
        NullTable::from_draws(StatisticKind::BridgeCvm, grid_m, seed, cvm),
    ))
}

pub fn simulate(kind: StatisticKind, grid_m: usize, replications: usize, seed: u64) -> Result<NullTable> {
    if kind.is_kiefer() {
        simulate_kiefer(kind, grid_m, replications, seed)
    } else {
        simulate_bridge(kind, grid_m, replications, seed)
    }
}

/// Kolmogorov distribution `P(sup |B0| <= x) = 1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut sum = 0.0;
    for k in 1..100_000u32 {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

/// Conservative empirical quantile: the order statistic at `ceil(p R)` (1-based).
pub fn quantile(table: &NullTable, p: f64) -> Result<f64> {
    if table.draws.is_empty() {
        return Err(Error::config("null table is empty"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::config(format!("quantile level must lie in (0, 1), got {p}")));
    }
    let r = table.draws.len();
    let idx = ((p * r as f64).ceil() as usize).clamp(1, r);
    Ok(table.draws[idx - 1])
}

pub fn save_table(table: &NullTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    // write-then-rename so concurrent readers never see a partial table
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        writeln!(w, "{TABLE_MAGIC}")?;
        writeln!(w, "version={TABLE_FORMAT_VERSION}")?;
        writeln!(w, "kind={}", table.kind)?;
        writeln!(w, "grid_m={}", table.grid_m)?;
        writeln!(w, "replications={}", table.replications)?;
        writeln!(w, "seed={}", table.seed)?;
        writeln!(w, "---")?;
        for v in &table.draws {
            writeln!(w, "{v:?}")?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_table(path: impl AsRef<Path>) -> Result<NullTable> {
    let path = path.as_ref();
    let fail = |reason: String| Error::TableLoad { path: path.to_path_buf(), reason };
    let reader = BufReader::new(fs::File::open(path)?);
    let mut lines = reader.lines();
    match lines.next().transpose()? {
        Some(l) if l == TABLE_MAGIC => {}
        _ => return Err(fail("not a null table file".into())),
    }
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().transpose()?.ok_or_else(|| fail(format!("missing header field '{key}'")))?;
        let (k, v) = line.split_once('=').ok_or_else(|| fail(format!("malformed header line '{line}'")))?;
        if k != key {
            return Err(fail(format!("expected header field '{key}', found '{k}'")));
        }
        Ok(v.to_string())
    };
    let version: u32 = header("version")?.parse().map_err(|_| fail("bad version".into()))?;
    if version != TABLE_FORMAT_VERSION {
        return Err(fail(format!("format version {version}, expected {TABLE_FORMAT_VERSION}")));
    }
    let kind: StatisticKind = header("kind")?.parse().map_err(|e: Error| fail(e.to_string()))?;
    let grid_m: usize = header("grid_m")?.parse().map_err(|_| fail("bad grid_m".into()))?;
    let replications: usize = header("replications")?.parse().map_err(|_| fail("bad replications".into()))?;
    let seed: u64 = header("seed")?.parse().map_err(|_| fail("bad seed".into()))?;
    match lines.next().transpose()? {
        Some(l) if l == "---" => {}
        _ => return Err(fail("missing header terminator".into())),
    }
    let mut draws = Vec::with_capacity(replications);
    for (i, line) in lines.enumerate() {
        let line = line?;
        let v: f64 = line.trim().parse().map_err(|_| fail(format!("bad draw on data line {}", i + 1)))?;
        draws.push(v);
    }
    let table = NullTable { kind, grid_m, replications, seed, draws };
    table.validate().map_err(fail)?;
    Ok(table)
}

/// Lattice sizes, replication count and seed shared by the four tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableParams {
    pub grid_1d: usize,
    pub grid_2d: usize,
    pub replications: usize,
    pub seed: u64,
}

impl Default for TableParams {
    fn default() -> Self {
        Self {
            grid_1d: DEFAULT_GRID_1D,
            grid_2d: DEFAULT_GRID_2D,
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_TABLE_SEED,
        }
    }
}

impl TableParams {
    pub fn grid_for(&self, kind: StatisticKind) -> usize {
        if kind.is_kiefer() {
            self.grid_2d
        } else {
            self.grid_1d
        }
    }

    pub fn file_name(&self, kind: StatisticKind) -> String {
        format!("{kind}-m{}-r{}-s{}.tbl", self.grid_for(kind), self.replications, self.seed)
    }
}

/// One table per statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct NullTableSet {
    pub kiefer_sup: NullTable,
    pub kiefer_cvm: NullTable,
    pub bridge_sup: NullTable,
    pub bridge_cvm: NullTable,
}

impl NullTableSet {
    pub fn new(kiefer_sup: NullTable, kiefer_cvm: NullTable, bridge_sup: NullTable, bridge_cvm: NullTable) -> Result<Self> {
        let set = Self { kiefer_sup, kiefer_cvm, bridge_sup, bridge_cvm };
        for kind in StatisticKind::ALL {
            let t = set.get(kind);
            if t.kind != kind {
                return Err(Error::config(format!("table of kind {} supplied for {kind}", t.kind)));
            }
            if t.draws.is_empty() {
                return Err(Error::config(format!("{kind} table is empty")));
            }
        }
        Ok(set)
    }

    pub fn simulate(params: &TableParams) -> Result<Self> {
        let (ks, kc) = simulate_kiefer_pair(params.grid_2d, params.replications, params.seed)?;
        let (bs, bc) = simulate_bridge_pair(params.grid_1d, params.replications, params.seed)?;
        Self::new(ks, kc, bs, bc)
    }

    pub fn get(&self, kind: StatisticKind) -> &NullTable {
        match kind {
            StatisticKind::KieferSup => &self.kiefer_sup,
            StatisticKind::KieferCvm => &self.kiefer_cvm,
            StatisticKind::BridgeSup => &self.bridge_sup,
            StatisticKind::BridgeCvm => &self.bridge_cvm,
        }
    }
}

/// On-disk cache of null tables, one file per `(kind, grid_m, R, seed)`.
#[derive(Debug, Clone)]
pub struct TableCache {
    dir: PathBuf,
}

impl TableCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, kind: StatisticKind, params: &TableParams) -> PathBuf {
        self.dir.join(params.file_name(kind))
    }

    /// Loads a cached table or simulates and stores it. `on_build` is called
    /// before any simulation starts.
    pub fn get_or_build(
        &self,
        kind: StatisticKind,
        params: &TableParams,
        on_build: &mut dyn FnMut(StatisticKind),
    ) -> Result<NullTable> {
        let path = self.path(kind, params);
        if path.exists() {
            let t = load_table(&path)?;
            if t.kind == kind
                && t.grid_m == params.grid_for(kind)
                && t.replications == params.replications
                && t.seed == params.seed
            {
                return Ok(t);
            }
        }
        on_build(kind);
        // paired kinds share paths; store the sibling too
        let (a, b) = if kind.is_kiefer() {
            simulate_kiefer_pair(params.grid_2d, params.replications, params.seed)?
        } else {
            simulate_bridge_pair(params.grid_1d, params.replications, params.seed)?
        };
        save_table(&a, self.path(a.kind, params))?;
        save_table(&b, self.path(b.kind, params))?;
        Ok(if a.kind == kind { a } else { b })
    }

    pub fn load_or_build(&self, params: &TableParams, on_build: &mut dyn FnMut(StatisticKind)) -> Result<NullTableSet> {
        NullTableSet::new(
            self.get_or_build(StatisticKind::KieferSup, params, on_build)?,
            self.get_or_build(StatisticKind::KieferCvm, params, on_build)?,
            self.get_or_build(StatisticKind::BridgeSup, params, on_build)?,
            self.get_or_build(StatisticKind::BridgeCvm, params, on_build)?,
        )
    }
}
