//! Command-line front end. Every flag maps onto a library parameter; this
//! module only parses, dispatches and writes.

pub mod grid;
pub mod input;
pub mod output;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::alpha::{pareto_lambda_max, reward_ratio, GradientReport};
use crate::axioms::VerifyOptions;
use crate::bounds::{
    beta_monotonicity_sweep, box_enumeration_min, box_lower_bound, starvation_bounds,
    threshold_self_check, BoxBound, BoxConstraint, StarvationBounds, SweepReport, ThresholdCheck,
    MAX_ENUMERATION_USERS,
};
use crate::error::{Error, Result};
use crate::measures::{jain_generalized, FairnessParams, FairnessValue};
use crate::suites::{self, linear_grid, Suite, VerifyConfig};
use crate::tradeoff::{
    dominance_search, dominance_tolerance, maximize_phi, tradeoff_curve, FeasibleRegion,
    SolverOptions, TradeoffPoint,
};
use crate::Allocation;

use grid::parse_grid;
use input::parse_allocations;
use output::{error_json, format_number, write_json, CsvTable};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "FAIRMETRIC_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fairmetric",
    version,
    about = "Fairness measures for resource allocations"
)]
pub struct RunConfig {
    /// Write results to this file instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate f_β (or F with --lambda-inv) for each input vector.
    Measure(MeasureArgs),
    /// Evaluate f_β along a β grid for each input vector.
    Sweep(SweepArgs),
    /// Generalized Jain's index f_β / n (β ≤ 1).
    Jain(JainArgs),
    /// Maximize Φ_λ over a feasible region.
    Tradeoff(TradeoffArgs),
    /// Reward ratio of α-fair gradients along a grid of α.
    Ratio(RatioArgs),
    /// Starvation and threshold bounds per vector, or the box bound.
    Bounds(BoundsArgs),
    /// Run the property suites; exits 1 if any fails.
    Verify(VerifyArgs),
    /// Tradeoff curve over a λ grid.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Growth exponent of the general family.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub r: f64,
    /// Degree of homogeneity of F = f·(Σx)^(1/λ).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lambda_inv: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `start:step:stop` or a comma list, ascending.
    #[arg(long, allow_hyphen_values = true)]
    pub beta_grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct JainArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Number of ascent starts.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            starts: self.starts,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    /// JSON file `{"A": [[...]], "b": [...], "names": [...]}`.
    #[arg(long)]
    pub region: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long)]
    pub region: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_grid: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Defaults to 50 evenly spaced points on [0, 8].
    #[arg(long)]
    pub alpha_grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: f64,
    /// Per-vector starvation and threshold bounds.
    #[arg(long, conflicts_with_all = ["box_min", "box_max", "users"])]
    pub input: Option<PathBuf>,
    /// Lower edge of the per-user box.
    #[arg(long, requires_all = ["box_max", "users"])]
    pub box_min: Option<f64>,
    #[arg(long, requires_all = ["box_min", "users"])]
    pub box_max: Option<f64>,
    /// Number of users for the box bound.
    #[arg(long, requires_all = ["box_min", "box_max"])]
    pub users: Option<usize>,
    /// Also enumerate every edge assignment (at most 24 users).
    #[arg(long, requires = "users")]
    pub enumerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Axioms,
    Schur,
    Pareto,
    Ratio,
    Bounds,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Axioms => Suite::Axioms,
            SuiteArg::Schur => Suite::Schur,
            SuiteArg::Pareto => Suite::Pareto,
            SuiteArg::Ratio => Suite::Ratio,
            SuiteArg::Bounds => Suite::Bounds,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random trials (or samples) per suite.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Relative tolerance of the axiom checks.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Degree of homogeneity for the axiom splitting checks.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub lambda_inv: f64,
    /// β grid for the axiom and Schur suites.
    #[arg(long, allow_hyphen_values = true)]
    pub beta_grid: Option<String>,
}

/// What a run produced, before anything is written.
enum Rendered {
    Csv(CsvTable),
    Json(serde_json::Value),
}

struct Outcome {
    rendered: Rendered,
    passed: bool,
    notices: Vec<String>,
}

impl Outcome {
    fn ok(rendered: Rendered) -> Self {
        Outcome {
            rendered,
            passed: true,
            notices: Vec::new(),
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<Rendered> {
    serde_json::to_value(value)
        .map(Rendered::Json)
        .map_err(|e| Error::Io(e.to_string()))
}

fn require_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("--{name} must be finite, got {v}")))
    }
}

#[derive(Serialize)]
struct MeasureRow<'a> {
    label: &'a str,
    #[serde(flatten)]
    params: FairnessParams,
    #[serde(flatten)]
    value: FairnessValue,
}

fn measure(args: &MeasureArgs) -> Result<Outcome> {
    require_finite("beta", args.beta)?;
    require_finite("r", args.r)?;
    require_finite("lambda-inv", args.lambda_inv)?;
    let params = FairnessParams::new(args.beta)
        .with_r(args.r)
        .with_lambda_inv(args.lambda_inv);
    let data = parse_allocations(&args.input)?;
    let values = data
        .iter()
        .map(|(_, x)| params.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let rendered = match args.format {
        Format::Csv => {
            let mut t = CsvTable::new(&["label", "beta", "f"]);
            for ((label, _), v) in data.iter().zip(&values) {
                t.push(vec![
                    label.clone(),
                    format_number(args.beta),
                    format_number(v.value),
                ]);
            }
            Rendered::Csv(t)
        }
        Format::Json => {
            let rows: Vec<MeasureRow> = data
                .iter()
                .zip(values)
                .map(|((label, _), value)| MeasureRow {
                    label,
                    params,
                    value,
                })
                .collect();
            json(&rows)?
        }
    };
    Ok(Outcome::ok(rendered))
}

fn grid_notices(grid: &[f64]) -> Vec<String> {
    let mut notices = Vec::new();
    if grid.contains(&0.0) {
        notices.push("beta = 0 evaluated as the entropy limit".to_string());
    }
    if grid.contains(&1.0) {
        notices.push("beta = 1 excluded (discontinuity)".to_string());
    }
    notices
}

#[derive(Serialize)]
struct WithLabel<'a, T> {
    label: &'a str,
    #[serde(flatten)]
    body: T,
}

fn sweep(args: &SweepArgs) -> Result<Outcome> {
    let grid = parse_grid(&args.beta_grid)?;
    let data = parse_allocations(&args.input)?;
    let reports = data
        .iter()
        .map(|(_, x)| beta_monotonicity_sweep(x, &grid))
        .collect::<Result<Vec<SweepReport>>>()?;
    let rendered = match args.format {
        Format::Csv => {
            let mut t = CsvTable::new(&["label", "beta", "f"]);
            for ((label, _), r) in data.iter().zip(&reports) {
                for p in &r.points {
                    t.push(vec![
                        label.clone(),
                        format_number(p.beta),
                        format_number(p.f),
                    ]);
                }
            }
            Rendered::Csv(t)
        }
        Format::Json => {
            let rows: Vec<_> = data
                .iter()
                .zip(reports)
                .map(|((label, _), body)| WithLabel { label, body })
                .collect();
            json(&rows)?
        }
    };
    Ok(Outcome {
        notices: grid_notices(&grid),
        ..Outcome::ok(rendered)
    })
}

fn jain(args: &JainArgs) -> Result<Outcome> {
    require_finite("beta", args.beta)?;
    let data = parse_allocations(&args.input)?;
    let values = data
        .iter()
        .map(|(_, x)| jain_generalized(x, args.beta))
        .collect::<Result<Vec<_>>>()?;
    #[derive(Serialize)]
    struct Row<'a> {
        label: &'a str,
        beta: f64,
        jain: f64,
    }
    let rendered = match args.format {
        Format::Csv => {
            let mut t = CsvTable::new(&["label", "beta", "jain"]);
            for ((label, _), v) in data.iter().zip(&values) {
                t.push(vec![
                    label.clone(),
                    format_number(args.beta),
                    format_number(*v),
                ]);
            }
            Rendered::Csv(t)
        }
        Format::Json => {
            let rows: Vec<Row> = data
                .iter()
                .zip(values)
                .map(|((label, _), jain)| Row {
                    label,
                    beta: args.beta,
                    jain,
                })
                .collect();
            json(&rows)?
        }
    };
    Ok(Outcome::ok(rendered))
}

fn read_region(path: &Path) -> Result<FeasibleRegion> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    FeasibleRegion::from_json(&text)
}

fn tradeoff(args: &TradeoffArgs) -> Result<Outcome> {
    let lambda_max = pareto_lambda_max(args.beta)?;
    let region = read_region(&args.region)?;
    let point = maximize_phi(&region, args.beta, args.lambda, &args.solver.options())?;
    let dominated_by = dominance_search(&region, &point.allocation, dominance_tolerance(&region))?;
    #[derive(Serialize)]
    struct Report {
        beta: f64,
        lambda_max: f64,
        #[serde(flatten)]
        point: TradeoffPoint,
        dominated_by: Option<Allocation>,
    }
    Ok(Outcome::ok(json(&Report {
        beta: args.beta,
        lambda_max,
        point,
        dominated_by,
    })?))
}

fn curve(args: &CurveArgs) -> Result<Outcome> {
    pareto_lambda_max(args.beta)?;
    let grid = parse_grid(&args.lambda_grid)?;
    let region = read_region(&args.region)?;
    let points = tradeoff_curve(&region, args.beta, &grid, &args.solver.options())?;
    let rendered = match args.format {
        Format::Csv => {
            let mut t = CsvTable::new(&["lambda", "fairness", "throughput", "pareto_flag"]);
            for p in &points {
                t.push(vec![
                    format_number(p.lambda),
                    format_number(p.fairness),
                    format_number(p.throughput),
                    p.pareto_flag.as_str().to_string(),
                ]);
            }
            Rendered::Csv(t)
        }
        Format::Json => json(&points)?,
    };
    Ok(Outcome::ok(rendered))
}

fn ratio(args: &RatioArgs) -> Result<Outcome> {
    let grid = match &args.alpha_grid {
        Some(text) => parse_grid(text)?,
        None => linear_grid(0.0, 8.0, 50),
    };
    let data = parse_allocations(&args.input)?;
    let reports = data
        .iter()
        .map(|(_, x)| {
            grid.iter()
                .map(|&a| reward_ratio(x, a))
                .collect::<Result<Vec<GradientReport>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rendered = match args.format {
        Format::Csv => {
            let mut t = CsvTable::new(&["label", "alpha", "ratio"]);
            for ((label, _), rs) in data.iter().zip(&reports) {
                for r in rs {
                    t.push(vec![
                        label.clone(),
                        format_number(r.alpha),
                        format_number(r.ratio),
                    ]);
                }
            }
            Rendered::Csv(t)
        }
        Format::Json => {
            let rows: Vec<_> = data
                .iter()
                .zip(reports)
                .map(|((label, _), points)| WithLabel {
                    label,
                    body: serde_json::json!({ "points": points }),
                })
                .collect();
            json(&rows)?
        }
    };
    Ok(Outcome::ok(rendered))
}

fn bounds(args: &BoundsArgs) -> Result<Outcome> {
    require_finite("beta", args.beta)?;
    if let Some(path) = &args.input {
        let data = parse_allocations(path)?;
        #[derive(Serialize)]
        struct Row<'a> {
            label: &'a str,
            beta: f64,
            starvation: StarvationBounds,
            threshold: Option<ThresholdCheck>,
        }
        let rows = data
            .iter()
            .map(|(label, x)| {
                let threshold = if x.is_strictly_positive() && args.beta != 0.0 {
                    Some(threshold_self_check(x, args.beta)?)
                } else {
                    None
                };
                Ok(Row {
                    label,
                    beta: args.beta,
                    starvation: starvation_bounds(x, args.beta)?,
                    threshold,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(Outcome::ok(json(&rows)?));
    }
    let (Some(lo), Some(hi), Some(n)) = (args.box_min, args.box_max, args.users) else {
        return Err(Error::Usage(
            "bounds needs --input or all of --box-min, --box-max, --users".into(),
        ));
    };
    if args.enumerate && n > MAX_ENUMERATION_USERS {
        return Err(Error::Usage(format!(
            "--enumerate supports at most {MAX_ENUMERATION_USERS} users"
        )));
    }
    let bx = BoxConstraint::new(lo, hi)?;
    let bound = box_lower_bound(bx, args.beta, n)?;
    let enumeration_min = args
        .enumerate
        .then(|| box_enumeration_min(bx, args.beta, n))
        .transpose()?;
    #[derive(Serialize)]
    struct Report {
        beta: f64,
        box_min: f64,
        box_max: f64,
        users: usize,
        #[serde(flatten)]
        bound: BoxBound,
        #[serde(skip_serializing_if = "Option::is_none")]
        enumeration_min: Option<f64>,
    }
    Ok(Outcome::ok(json(&Report {
        beta: args.beta,
        box_min: lo,
        box_max: hi,
        users: n,
        bound,
        enumeration_min,
    })?))
}

fn verify(args: &VerifyArgs) -> Result<Outcome> {
    let beta_grid = match &args.beta_grid {
        Some(text) => parse_grid(text)?,
        None => suites::DEFAULT_BETA_GRID.to_vec(),
    };
    let config = VerifyConfig {
        suite: args.suite.into(),
        seed: args.seed,
        trials: args.trials,
        beta_grid,
        axioms: VerifyOptions {
            tol: args.tol,
            lambda_inv: args.lambda_inv,
            seed: args.seed,
            ..VerifyOptions::default()
        },
    };
    let report = suites::verify(&config)?;
    Ok(Outcome {
        passed: report.passed,
        ..Outcome::ok(json(&report)?)
    })
}

fn dispatch(command: &Command) -> Result<Outcome> {
    match command {
        Command::Measure(a) => measure(a),
        Command::Sweep(a) => sweep(a),
        Command::Jain(a) => jain(a),
        Command::Tradeoff(a) => tradeoff(a),
        Command::Ratio(a) => ratio(a),
        Command::Bounds(a) => bounds(a),
        Command::Verify(a) => verify(a),
        Command::Curve(a) => curve(a),
    }
}

/// Runs one invocation and writes its artifact. Returns whether every
/// suite passed (always true outside `verify`).
pub fn run(config: &RunConfig) -> Result<bool> {
    let outcome = dispatch(&config.command)?;
    for notice in &outcome.notices {
        eprintln!("notice: {notice}");
    }
    let mut sink: Box<dyn Write> = match &config.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match &outcome.rendered {
        Rendered::Csv(t) => t.write_to(&mut sink)?,
        Rendered::Json(v) => write_json(v, &mut sink)?,
    }
    sink.flush()?;
    Ok(outcome.passed)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Error::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Usage(e.to_string()))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", error_json(e));
    ExitCode::from(2)
}

/// Binary entry point: exit 0 on success, 1 when `verify` finds a failing
/// suite, 2 with an error JSON line on stderr otherwise.
pub fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.render().to_string();
            let summary: Vec<&str> = message
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("Usage:") && !l.starts_with("For more"))
                .map(|l| l.trim_start_matches("error: "))
                .collect();
            return fail(&Error::Usage(summary.join(" ")));
        }
    };
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    match run(&config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(&e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        RunConfig::command().debug_assert();
    }

    #[test]
    fn negative_values_parse() {
        let c = RunConfig::try_parse_from([
            "fairmetric",
            "sweep",
            "--input",
            "x.csv",
            "--beta-grid",
            "-10:0.25:5",
        ])
        .unwrap();
        assert!(matches!(c.command, Command::Sweep(ref s) if s.beta_grid == "-10:0.25:5"));
        let c =
            RunConfig::try_parse_from(["fairmetric", "measure", "--input", "x", "--beta", "-1"])
                .unwrap();
        assert!(matches!(c.command, Command::Measure(ref m) if m.beta == -1.0));
    }
}
