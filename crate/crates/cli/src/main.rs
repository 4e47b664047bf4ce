// SPDX-License-Identifier: MIT OR Apache-2.0

//! `volchange`: test a time series for a change in its conditional variance
//! function, reproduce the Monte Carlo study, and manage null tables.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use volchange::data::{
    export_report, export_sample, export_trajectory, lag_embed, lagged_timestamps, load_csv, log_diff_returns,
    make_regression_sample, RawSeries,
};
use volchange::harness::{format_table, run_experiment, Case, ExperimentConfig, TableStyle};
use volchange::kernel::default_config;
use volchange::nulldist::{simulate, StatisticKind, TableCache, TableParams};
use volchange::process::cusum_profile;
use volchange::stats::analyze;
use volchange::{EstimatorConfig, Error as LibError};

#[derive(Parser)]
#[command(name = "volchange", version, about = "Nonparametric test for a change in the conditional variance function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test a series for a volatility change point
    Test(TestArgs),
    /// Run the Monte Carlo rejection-frequency study
    Simulate(SimulateArgs),
    /// Print a quantile of a simulated null distribution
    Critval(CritvalArgs),
    /// Write a simulated sample to CSV
    Gen(GenArgs),
}

#[derive(Args, Clone)]
struct TableArgs {
    /// Directory holding cached null tables
    #[arg(long, env = "VOLCHANGE_TABLES", default_value = "volchange-tables")]
    tables: PathBuf,
    /// Lattice size of the bridge tables
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    table_grid_1d: Option<u32>,
    /// Lattice size of the Kiefer-process tables
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    table_grid_2d: Option<u32>,
    /// Paths per null table
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    table_reps: Option<u32>,
    /// Master seed of the null tables
    #[arg(long)]
    table_seed: Option<u64>,
}

impl TableArgs {
    fn apply(&self, mut params: TableParams) -> TableParams {
        if let Some(m) = self.table_grid_1d {
            params.grid_1d = m as usize;
        }
        if let Some(m) = self.table_grid_2d {
            params.grid_2d = m as usize;
        }
        if let Some(r) = self.table_reps {
            params.replications = r as usize;
        }
        if let Some(s) = self.table_seed {
            params.seed = s;
        }
        params
    }
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("design").required(true).args(["x", "lags"])))]
struct TestArgs {
    /// Response series as `file.csv:column`
    #[arg(long, value_parser = parse_column_ref)]
    y: ColumnRef,
    /// Covariate series as `file.csv:column`
    #[arg(long, value_parser = parse_column_ref)]
    x: Option<ColumnRef>,
    /// Use the previous `d` responses as covariates
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    lags: Option<u32>,
    /// Timestamp column of the response file, used to date the change point
    #[arg(long)]
    timestamps: Option<String>,
    /// Test level
    #[arg(long, default_value_t = 0.05, value_parser = parse_open_unit)]
    alpha: f64,
    /// Kernel bandwidth (default n^(-1/3))
    #[arg(long, value_parser = parse_positive)]
    bandwidth: Option<f64>,
    /// Truncation radius of the weight window (default ln n)
    #[arg(long, value_parser = parse_positive)]
    truncation: Option<f64>,
    /// Replace each series by its log-difference returns first
    #[arg(long)]
    returns: bool,
    /// Write the full report as JSON
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Write the CUSUM trajectory as CSV
    #[arg(long)]
    out_trajectory: Option<PathBuf>,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    A,
    B,
}

impl From<CaseArg> for Case {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::A => Case::A,
            CaseArg::B => Case::B,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

#[derive(Args)]
struct SimulateArgs {
    /// Base configuration file (TOML); flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    model: Option<u8>,
    #[arg(long, value_enum)]
    case: Option<CaseArg>,
    /// Break fractions, comma separated
    #[arg(long, value_delimiter = ',', num_args = 1.., value_parser = parse_unit)]
    s0: Vec<f64>,
    /// Sample sizes, comma separated
    #[arg(long, value_delimiter = ',', num_args = 1.., value_parser = clap::value_parser!(u32).range(2..))]
    n: Vec<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    reps: Option<u32>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_open_unit)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file (standard output when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Args)]
struct CritvalArgs {
    #[arg(long)]
    kind: StatisticKind,
    /// Probability level of the quantile
    #[arg(long, value_parser = parse_open_unit)]
    p: f64,
    /// Lattice size (default depends on the kind)
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    grid: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    reps: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cache directory; the table is simulated in memory when absent
    #[arg(long)]
    tables: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    model: u8,
    #[arg(long, value_enum)]
    case: CaseArg,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    n: u32,
    #[arg(long, value_parser = parse_unit)]
    s0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct ColumnRef {
    path: PathBuf,
    column: String,
}

fn parse_column_ref(s: &str) -> std::result::Result<ColumnRef, String> {
    match s.rsplit_once(':') {
        Some((path, column)) if !path.is_empty() && !column.is_empty() => {
            Ok(ColumnRef { path: path.into(), column: column.to_string() })
        }
        _ => Err(format!("expected FILE:COLUMN, got '{s}'")),
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("{e}"))
}

fn parse_open_unit(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not strictly between 0 and 1"))
    }
}

fn parse_unit(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn parse_positive(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive number"))
    }
}

fn usage_error(kind: ErrorKind, msg: &str) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn build_notice(kind: StatisticKind) {
    eprintln!("building null table {kind} (first run only)...");
}

fn load_series(r: &ColumnRef, ts: Option<&str>, returns: bool) -> Result<RawSeries> {
    let series = load_csv(&r.path, &r.column, ts).with_context(|| format!("reading {}", r.path.display()))?;
    if returns {
        Ok(log_diff_returns(&series)?)
    } else {
        Ok(series)
    }
}

fn cmd_test(args: TestArgs) -> Result<()> {
    let y = load_series(&args.y, args.timestamps.as_deref(), args.returns)?;
    let (sample, stamps) = match (&args.x, args.lags) {
        (Some(x), _) => {
            let x = load_series(x, None, args.returns)?;
            (make_regression_sample(&y, &x)?, y.timestamps.clone())
        }
        (None, Some(d)) => (lag_embed(&y, d as usize)?, lagged_timestamps(&y, d as usize)),
        (None, None) => unreachable!("clap enforces the design group"),
    };
    let n = sample.len();
    let defaults = default_config(n)?;
    let config = EstimatorConfig::new(
        args.bandwidth.unwrap_or(defaults.bandwidth),
        args.truncation.unwrap_or(defaults.truncation_radius),
    )?;
    let params = args.table.apply(TableParams::default());
    let tables = TableCache::new(&args.table.tables)
        .load_or_build(&params, &mut build_notice)
        .with_context(|| format!("null tables under {}", args.table.tables.display()))?;

    let analysis = analyze(&sample, &config)?;
    let report = match analysis.report(&tables, args.alpha) {
        Err(LibError::DegenerateSample) => {
            bail!("degenerate sample: the estimated mark variance is zero (constant or perfectly smooth response), no test is possible")
        }
        other => other?,
    };

    let cp = report.changepoint;
    let date = match (&stamps, cp.index) {
        (Some(ts), k) if k >= 1 => format!(" ({})", ts[k - 1]),
        _ => String::new(),
    };
    println!("n = {n}, h = {:.5}, c = {:.4}, alpha = {}", config.bandwidth, config.truncation_radius, args.alpha);
    for kind in StatisticKind::ALL {
        let label = stat_label(kind);
        let p = report.p_values.get(kind);
        let decision = if report.reject.get(kind) { "reject" } else { "accept" };
        println!(
            "{label:<4} stat = {:>10.5}  p = {:.6}  {decision}  change point k = {}{date}",
            report.normalized.get(kind),
            p,
            cp.index
        );
    }
    if let Some(path) = &args.out_report {
        export_report(&report, path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.out_trajectory {
        let profile = cusum_profile(&analysis.grid);
        export_trajectory(&profile, stamps.as_deref(), path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

/// Report labels in the order of [`StatisticKind::ALL`].
fn stat_label(kind: StatisticKind) -> &'static str {
    match kind {
        StatisticKind::KieferSup => "tn1",
        StatisticKind::KieferCvm => "tn2",
        StatisticKind::BridgeSup => "ks",
        StatisticKind::BridgeCvm => "cm",
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => {
            let (Some(model), Some(case)) = (args.model, args.case) else {
                usage_error(ErrorKind::MissingRequiredArgument, "--model and --case are required without --config");
            };
            ExperimentConfig::full(model, case.into())
        }
    };
    if let Some(m) = args.model {
        config.model = m;
    }
    if let Some(c) = args.case {
        config.case = c.into();
    }
    if !args.s0.is_empty() {
        config.s0_list = args.s0.clone();
    }
    if !args.n.is_empty() {
        config.n_list = args.n.iter().map(|&n| n as usize).collect();
    }
    if let Some(r) = args.reps {
        config.replications = r as usize;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(a) = args.alpha {
        config.alpha = a;
    }
    config.tables = args.table.apply(config.tables);
    config.validate()?;

    let tables = TableCache::new(&args.table.tables).load_or_build(&config.tables, &mut build_notice)?;
    let result = run_experiment(&config, &tables)?;
    let style = match args.format {
        FormatArg::Csv => TableStyle::Csv,
        FormatArg::Markdown => TableStyle::Markdown,
    };
    write_output(args.out.as_deref(), &format_table(&result, style))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_critval(args: CritvalArgs) -> Result<()> {
    let defaults = TableParams::default();
    let grid = args.grid.map_or(defaults.grid_for(args.kind), |g| g as usize);
    let reps = args.reps.map_or(defaults.replications, |r| r as usize);
    let seed = args.seed.unwrap_or(defaults.seed);
    let table = match &args.tables {
        Some(dir) => {
            let mut params = TableParams { replications: reps, seed, ..defaults };
            if args.kind.is_kiefer() {
                params.grid_2d = grid;
            } else {
                params.grid_1d = grid;
            }
            TableCache::new(dir).get_or_build(args.kind, &params, &mut build_notice)?
        }
        None => simulate(args.kind, grid, reps, seed)?,
    };
    println!("{}", table.quantile(args.p)?);
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let config = ExperimentConfig::full(args.model, args.case.into());
    let sample = config.generate(args.s0, args.n as usize, args.seed)?;
    export_sample(&sample, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Critval(a) => cmd_critval(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
