//! `rankdep`: rank-based independence tests from the command line.
//!
//! Subcommands read a numeric CSV (`test`, `mvtest`) or simulate data
//! (`simulate`, `scatter`) and write a JSON or CSV report. Every random
//! stream is derived from `--seed`; when the flag is omitted a seed is drawn
//! and recorded in the report.

mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rankdep::combined::{self, Method, Standardization, TestOutcome, UniOptions};
use rankdep::montecarlo::experiment::{
    self, null_scatter, run_power, ExperimentConfig, ScatterPair, TestSpec, SCHEMA_VERSION,
};
use rankdep::montecarlo::{ScenarioId, ScenarioSpec};
use rankdep::mvstat::{self, MvKind, MvMode, MvOptions, SignCoding};
use rankdep::ranks::{MultiSample, PairedSample};
use rankdep::seed::{self, label};
use rankdep::PermutationPlan;

use crate::error::{CliError, Result};
use crate::io::Table;

#[derive(Parser)]
#[command(name = "rankdep", version, about = "Rank-based tests of independence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test two columns of a CSV file for independence.
    Test(TestArgs),
    /// Test two groups of columns (random vectors) for independence.
    Mvtest(MvTestArgs),
    /// Estimate rejection rates on a simulated scenario.
    Simulate(SimulateArgs),
    /// Sample joint null draws of a pair of statistics.
    Scatter(ScatterArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Coding {
    OrderPreserving,
    Magnitude,
}

impl From<Coding> for SignCoding {
    fn from(c: Coding) -> Self {
        match c {
            Coding::OrderPreserving => SignCoding::OrderPreserving,
            Coding::Magnitude => SignCoding::Magnitude,
        }
    }
}

#[derive(Args, Serialize)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Column of X, by header name or 1-based position. Defaults to the first.
    #[arg(long)]
    columns_x: Option<String>,
    /// Column of Y. Defaults to the second.
    #[arg(long)]
    columns_y: Option<String>,
    /// xi, spearman, kendall, quadrant, cs, ck, cq, xisym or cs_asym.
    #[arg(long, default_value = "ck")]
    method: Method,
    /// asymptotic, finite_sample or literal.
    #[arg(long, default_value = "asymptotic")]
    standardization: Standardization,
    /// Seed for breaking ties.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Args, Serialize)]
struct MvOpts {
    /// Permutation replicates B.
    #[arg(long, default_value_t = 1000)]
    permutations: usize,
    #[arg(long, default_value_t = mvstat::BorelConfig::DEFAULT_FRACTIONAL_BITS)]
    fractional_bits: u32,
    #[arg(long, value_enum, default_value_t = Coding::OrderPreserving)]
    sign_coding: Coding,
    /// Count each point as dominating itself in multivariate ranks.
    #[arg(long)]
    self_inclusion: bool,
}

#[derive(Args, Serialize)]
struct MvTestArgs {
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated columns of X.
    #[arg(long)]
    columns_x: String,
    /// Comma-separated columns of Y. Defaults to all columns not in X.
    #[arg(long)]
    columns_y: Option<String>,
    /// xisym, spearman, kendall, cs, ck, or `all` for every kind.
    #[arg(long, default_value = "ck")]
    method: String,
    /// grothe_permutation, borel_analytic or borel_permutation.
    #[arg(long, default_value = "grothe_permutation")]
    mode: MvMode,
    #[command(flatten)]
    mv: MvOpts,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    /// U1..U4, M1..M6, null_uni, null_mv or abs_noise.
    #[arg(long)]
    scenario: ScenarioId,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = experiment::MIN_REPS)]
    reps: usize,
    /// Comma-separated test names. Defaults to cs,ck,cq,xisym, or to every
    /// multivariate kind for vector scenarios.
    #[arg(long)]
    tests: Option<String>,
    /// Multivariate mode; implied for vector scenarios.
    #[arg(long)]
    mode: Option<MvMode>,
    #[arg(long, default_value_t = experiment::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value = "asymptotic")]
    standardization: Standardization,
    #[arg(long, default_value_t = experiment::DEFAULT_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = mvstat::BorelConfig::DEFAULT_FRACTIONAL_BITS)]
    fractional_bits: u32,
    #[arg(long, value_enum, default_value_t = Coding::OrderPreserving)]
    sign_coding: Coding,
    #[arg(long)]
    self_inclusion: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Args, Serialize)]
struct ScatterArgs {
    /// kendall_xi, quadrant_xi, spearman_xi, grothe_spearman_xi or grothe_kendall_xi.
    #[arg(long)]
    pair: ScatterPair,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = experiment::DEFAULT_SCATTER_REPS)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    #[serde(skip)]
    out: Output,
}

#[derive(Serialize)]
struct Provenance<'a, C> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a C,
}

#[derive(Serialize)]
struct Report<'a, C, T> {
    schema_version: u32,
    provenance: Provenance<'a, C>,
    result: T,
}

fn report<'a, C, T>(
    command: &'static str,
    seed: u64,
    config: &'a C,
    result: T,
) -> Report<'a, C, T> {
    Report {
        schema_version: SCHEMA_VERSION,
        provenance: Provenance {
            tool: "rankdep",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            config,
        },
        result,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Mvtest(a) => cmd_mvtest(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Scatter(a) => cmd_scatter(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rankdep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn single_column(table: &Table, spec: Option<&str>, default: usize, flag: &str) -> Result<usize> {
    let cols = match spec {
        Some(s) => table.select(s)?,
        None if default < table.columns.len() => vec![default],
        None => return Err(CliError::Usage("input needs at least two columns".into())),
    };
    match cols[..] {
        [c] => Ok(c),
        _ => Err(CliError::Usage(format!(
            "{flag} takes one column for `test`; use `mvtest` for vectors"
        ))),
    }
}

fn read_table(path: &std::path::Path, min_rows: usize) -> Result<Table> {
    let table = Table::read(path)?;
    if table.rows() < min_rows {
        return Err(CliError::TooFewRows {
            required: min_rows,
            got: table.rows(),
        });
    }
    Ok(table)
}

fn cmd_test(a: &TestArgs) -> Result<()> {
    let seed = resolve_seed(a.seed);
    let table = read_table(&a.input, 2)?;
    let x = single_column(&table, a.columns_x.as_deref(), 0, "--columns-x")?;
    let y = single_column(&table, a.columns_y.as_deref(), 1, "--columns-y")?;
    let sample = PairedSample::new(table.columns[x].clone(), table.columns[y].clone())?;
    let opts = UniOptions {
        tie_seed: Some(seed::derive(seed, label::TIES)),
        standardization: a.standardization,
    };
    let outcome = combined::test(&sample, a.method, &opts)?;
    emit_outcomes(&a.out, "test", seed, a, &[outcome], false)
}

fn cmd_mvtest(a: &MvTestArgs) -> Result<()> {
    let seed = resolve_seed(a.seed);
    let kind = match a.method.as_str() {
        "all" => None,
        m => Some(m.parse::<MvKind>()?),
    };
    let table = read_table(&a.input, 3)?;
    let xc = table.select(&a.columns_x)?;
    let yc = match &a.columns_y {
        Some(s) => table.select(s)?,
        None => (0..table.columns.len())
            .filter(|c| !xc.contains(c))
            .collect(),
    };
    if yc.is_empty() {
        return Err(CliError::Usage("no columns left for Y".into()));
    }
    let sample = MultiSample::from_rows(&table.rows_of(&xc), &table.rows_of(&yc))?;
    let mut opts = MvOptions::new(PermutationPlan::new(
        a.mv.permutations,
        seed::derive(seed, label::PERMS),
    )?);
    opts.fractional_bits = a.mv.fractional_bits;
    opts.sign_coding = a.mv.sign_coding.into();
    opts.self_inclusion = a.mv.self_inclusion;
    opts.tie_seed = Some(seed::derive(seed, label::TIES));
    let outcomes = match kind {
        Some(k) => vec![mvstat::mv_test(&sample, k, a.mode, &opts)?],
        None => mvstat::mv_suite(&sample, a.mode, &opts)?,
    };
    emit_outcomes(&a.out, "mvtest", seed, a, &outcomes, kind.is_none())
}

fn emit_outcomes<C: Serialize>(
    out: &Output,
    command: &'static str,
    seed: u64,
    config: &C,
    outcomes: &[TestOutcome],
    as_list: bool,
) -> Result<()> {
    let mut w = io::sink(out.output.as_ref())?;
    match out.format {
        Format::Json if as_list => io::write_json(&mut w, &report(command, seed, config, outcomes)),
        Format::Json => io::write_json(&mut w, &report(command, seed, config, &outcomes[0])),
        Format::Csv => {
            let header = [
                "method",
                "statistic",
                "standardized",
                "p_value",
                "p_source",
                "n",
                "seed",
                "permutations",
                "sigma_hat",
                "components",
            ];
            let opt = |v: Option<String>| v.unwrap_or_default();
            let rows: Vec<Vec<String>> = outcomes
                .iter()
                .map(|o| {
                    let components: Vec<String> = o
                        .components
                        .iter()
                        .map(|(k, v)| format!("{k}={v}"))
                        .collect();
                    vec![
                        o.method.clone(),
                        o.statistic.to_string(),
                        o.standardized.to_string(),
                        o.p_value.to_string(),
                        format!("{:?}", o.p_source).to_lowercase(),
                        o.n.to_string(),
                        opt(o.seed.map(|s| s.to_string())),
                        opt(o.permutations.map(|b| b.to_string())),
                        opt(o.sigma_hat.map(|s| s.to_string())),
                        components.join(";"),
                    ]
                })
                .collect();
            io::write_csv(&mut w, &header, &rows)
        }
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let seed = resolve_seed(a.seed);
    let mode = match (a.mode, a.scenario.is_multivariate()) {
        (Some(m), _) => Some(m),
        (None, true) => Some(MvMode::default()),
        (None, false) => None,
    };
    let tests: Vec<TestSpec> = match (&a.tests, mode) {
        (Some(list), _) => list
            .split(',')
            .map(|t| TestSpec::parse(t.trim(), mode))
            .collect::<rankdep::Result<_>>()?,
        (None, Some(mode)) => MvKind::ALL
            .iter()
            .map(|&kind| TestSpec::Multivariate { kind, mode })
            .collect(),
        (None, None) => [
            Method::CombinedSpearman,
            Method::CombinedKendall,
            Method::CombinedQuadrant,
            Method::XiSym,
        ]
        .into_iter()
        .map(TestSpec::from)
        .collect(),
    };
    let mut cfg = ExperimentConfig::new(a.reps, seed);
    cfg.alpha = a.alpha;
    cfg.standardization = a.standardization;
    cfg.permutations = a.permutations;
    cfg.fractional_bits = a.fractional_bits;
    cfg.sign_coding = a.sign_coding.into();
    cfg.self_inclusion = a.self_inclusion;
    let rep = run_power(&tests, &ScenarioSpec::new(a.scenario, a.n)?, &cfg)?;

    let mut w = io::sink(a.out.output.as_ref())?;
    match a.out.format {
        Format::Json => io::write_json(&mut w, &report("simulate", seed, a, &rep)),
        Format::Csv => {
            let header = [
                "scenario",
                "n",
                "reps",
                "alpha",
                "seed",
                "test",
                "rejections",
                "undefined",
                "rate",
                "mc_se",
            ];
            let rows: Vec<Vec<String>> = rep
                .rates
                .iter()
                .map(|r| {
                    vec![
                        rep.scenario.name().to_string(),
                        rep.n.to_string(),
                        rep.reps.to_string(),
                        rep.alpha.to_string(),
                        rep.seed.to_string(),
                        r.test.clone(),
                        r.rejections.to_string(),
                        r.undefined.to_string(),
                        r.rate.to_string(),
                        r.mc_se.to_string(),
                    ]
                })
                .collect();
            io::write_csv(&mut w, &header, &rows)
        }
    }
}

fn cmd_scatter(a: &ScatterArgs) -> Result<()> {
    let seed = resolve_seed(a.seed);
    let scatter = null_scatter(a.pair, a.n, a.reps, seed)?;
    let mut w = io::sink(a.out.output.as_ref())?;
    match a.out.format {
        Format::Json => io::write_json(&mut w, &report("scatter", seed, a, &scatter)),
        Format::Csv => {
            let (first, second) = a.pair.columns();
            let rows: Vec<Vec<String>> = scatter
                .rows
                .iter()
                .map(|(u, v)| vec![u.to_string(), v.to_string()])
                .collect();
            io::write_csv(&mut w, &[first, second], &rows)
        }
    }
}
