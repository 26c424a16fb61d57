//! Command-line entry point: flag parsing, configuration resolution,
//! command dispatch, and report emission.
//!
//! Settings resolve in a fixed order: built-in defaults, then the config
//! file (`--config`), then `--set key=value` overrides, then dedicated
//! flags. The environment variable `OU_HYPER_THREADS` caps the worker
//! count after all of those.
//!
//! Exit codes are a stable contract:
//!
//! - 0: every requested check holds
//! - 1: a mathematical check failed (a verdict does not hold, a scan cell
//!   fails or errors, a violation search succeeds, a moment leaves its
//!   band, or both structural conditions are falsified)
//! - 2: configuration error (unknown flags or keys, malformed specs,
//!   missing files, out-of-scope requests)
//! - 3: numeric non-convergence (an error estimate above
//!   `tolerance.integration`, or an internal bracketing failure)
//!
//! Reports embed the resolved seed, dimension, quadrature order, and
//! tolerances, so a rerun with the same inputs reproduces the JSON output
//! byte for byte apart from the `timing` field. Output lands atomically
//! (temp file + rename) when `--output` is given, on stdout otherwise.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::{OuError, Result};
use crate::functions::{
    builtin_c, builtin_f, check_condition_c, check_condition_cprime, GeneratorC, GridSpec,
    TestFunction,
};
use crate::inequalities::{fitted_kappa, Direction, Evaluator, Verdict};
use crate::mc::{check_identity_in_law, EnsembleSpec};
use crate::ou::{default_rule, DEFAULT_ORDERS};
use crate::quadrature::{build_rule, MAX_DIM};
use crate::report::{write_atomic, OutputFormat, Report, REPORT_VERSION};
use crate::scan::{
    run_scan, search_counterexample, standard_corpus, GeneratorSweep, ScanCell, ScanSpec,
    DEFAULT_SEED,
};

/// Inequalities `verify` accepts; `suite` runs the hypercontractive and
/// exponential variants together over the same corpus.
const VERIFY_INEQUALITIES: [&str; 11] = [
    "hc",
    "ehc",
    "genhc",
    "genrhc",
    "lsi",
    "glsi",
    "rhc",
    "ctmain",
    "sandwich",
    "integrability",
    "suite",
];

#[derive(Parser)]
#[command(
    name = "ou-hyper",
    version,
    about = "Numerical verification of Ornstein-Uhlenbeck smoothing inequalities",
    max_term_width = 100
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Config file: `key = value` lines under `[section]` headers.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Single config override, e.g. `--set run.seed=7`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Report format: json or csv (`report` also accepts table).
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,
    /// RNG seed for the stochastic commands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Gauss-Hermite order per axis; per-dimension default when absent.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Ambient dimension, 1 to 3.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Worker threads for the parallel commands.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one inequality on a function (or the standard corpus).
    Verify(VerifyArgs),
    /// Sweep an inequality over a grid, or search for counterexamples.
    Scan(ScanArgs),
    /// Compare the semigroup quadrature against the Brownian martingale
    /// simulation, moment by moment.
    McCheck(McCheckArgs),
    /// Probe the structural conditions (C) and (C') for a generator.
    Conditions(ConditionsArgs),
    /// Re-render a stored JSON report as json, csv, or a text table.
    Report(ReportArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// One of hc, ehc, genhc, genrhc, lsi, glsi, rhc, ctmain, sandwich,
    /// integrability, suite.
    #[arg(long)]
    inequality: String,
    /// Test function `name:key=val,...`; the standard corpus (filtered to
    /// functions meeting the inequality's preconditions) when absent.
    #[arg(long)]
    f: Option<String>,
    /// Generator `name:key=val,...`; required by the generalized checks.
    #[arg(long)]
    c: Option<String>,
    /// Norm exponent for hc (p > 1).
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Reverse exponent for rhc (alpha > 0).
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Smoothing time; defaults to 0.5 (s/2 for sandwich).
    #[arg(long)]
    t: Option<f64>,
    /// Outer smoothing time for sandwich (0 <= t < s).
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    /// Run generator checks even when the structural condition fails its
    /// grid check; the verdict then records a warning.
    #[arg(long)]
    override_condition: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// One of hc, ehc, genhc, genrhc, lsi, glsi, rhc, ctmain, sandwich,
    /// integrability.
    #[arg(long)]
    inequality: String,
    /// Comma-separated family-name filters on the corpus.
    #[arg(long)]
    f: Option<String>,
    /// Generator sweep `name:key=v|v,...` (`|` separates grid values).
    #[arg(long)]
    c: Option<String>,
    /// Comma-separated smoothing times.
    #[arg(long)]
    t: Option<String>,
    /// Comma-separated p values (alpha values for genrhc via rhc).
    #[arg(long)]
    p: Option<String>,
    /// Diagnostic multiplier on the hypercontractive exponent q(t); values
    /// other than 1 deliberately break the claim.
    #[arg(long, default_value_t = 1.0)]
    q_scale: f64,
    /// Floor on the decision slack.
    #[arg(long)]
    min_slack: Option<f64>,
    /// Keep scanning generators whose structural condition fails its grid
    /// check.
    #[arg(long)]
    override_condition: bool,
    /// Randomized counterexample search with this evaluation budget,
    /// instead of the grid scan.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct McCheckArgs {
    /// Test function `name:key=val,...`.
    #[arg(long)]
    f: String,
    /// Smoothing time.
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Simulated paths (default 100000, config key `mc.paths`).
    #[arg(long)]
    paths: Option<usize>,
    /// Gauss-Hermite order of the per-path conditional expectation.
    #[arg(long)]
    inner_order: Option<usize>,
}

#[derive(Args)]
struct ConditionsArgs {
    /// Generator `name:key=val,...`.
    #[arg(long)]
    c: String,
    /// Probe grid `min:max:n:lin|log`; defaults to 1e-3:1e3:200:log.
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored JSON report to re-render.
    #[arg(long)]
    input: PathBuf,
}

/// Fully resolved run settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub output: Option<PathBuf>,
    pub format: String,
    pub seed: u64,
    pub dim: usize,
    /// Per-axis quadrature order; the per-dimension default when absent.
    pub order: Option<usize>,
    pub workers: Option<usize>,
    /// Floor on decision slack (config key `tolerance.min_slack`).
    pub min_slack: Option<f64>,
    /// Largest acceptable per-verdict numeric error estimate (config key
    /// `tolerance.integration`); exceeding it is a non-convergence error.
    pub max_error: Option<f64>,
    pub mc_paths: Option<usize>,
    pub mc_inner_order: Option<usize>,
}

impl RunConfig {
    fn resolve(g: &GlobalArgs) -> Result<RunConfig> {
        let mut config = match &g.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        for kv in &g.set {
            let Some((key, value)) = kv.split_once('=') else {
                return Err(OuError::InvalidParam(format!(
                    "--set expects key=value, got `{kv}`"
                )));
            };
            config.set(key.trim(), value.trim())?;
        }
        let dim = match g.dim {
            Some(d) => d,
            None => config.get_usize("run.dim")?.unwrap_or(1),
        };
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(OuError::InvalidParam(format!(
                "dim must be between 1 and {MAX_DIM}, got {dim}"
            )));
        }
        let order = match g.order {
            Some(o) => Some(o),
            None => config.get_usize(&format!("quadrature.order_d{dim}"))?,
        };
        let seed = match g.seed {
            Some(s) => s,
            None => config.get_u64("run.seed")?.unwrap_or(DEFAULT_SEED),
        };
        let format = g
            .format
            .clone()
            .or_else(|| config.get("output.format").map(str::to_string))
            .unwrap_or_else(|| "json".to_string());
        let output = g
            .output
            .clone()
            .or_else(|| config.get("output.path").map(PathBuf::from));
        let mut workers = match g.workers {
            Some(w) => Some(w),
            None => config.get_usize("run.workers")?,
        };
        if let Some(cap) = env_thread_cap()? {
            workers = Some(workers.map_or(cap, |w| w.min(cap)));
        }
        if workers == Some(0) {
            return Err(OuError::InvalidParam("workers must be >= 1".into()));
        }
        Ok(RunConfig {
            output,
            format,
            seed,
            dim,
            order,
            workers,
            min_slack: config.get_f64("tolerance.min_slack")?,
            max_error: config.get_f64("tolerance.integration")?,
            mc_paths: config.get_usize("mc.paths")?,
            mc_inner_order: config.get_usize("mc.inner_order")?,
        })
    }

    fn evaluator(&self) -> Result<Evaluator> {
        match self.order {
            Some(order) => Evaluator::with_order(order, self.dim),
            None => Evaluator::new(self.dim),
        }
    }

    fn effective_order(&self) -> usize {
        self.order.unwrap_or(DEFAULT_ORDERS[self.dim - 1])
    }
}

fn env_thread_cap() -> Result<Option<usize>> {
    match std::env::var("OU_HYPER_THREADS") {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(OuError::InvalidParam(format!("OU_HYPER_THREADS: {e}"))),
        Ok(s) => {
            let n: usize = s.trim().parse().map_err(|_| {
                OuError::InvalidParam(format!(
                    "OU_HYPER_THREADS: cannot parse `{s}` as a thread count"
                ))
            })?;
            if n == 0 {
                return Err(OuError::InvalidParam(
                    "OU_HYPER_THREADS must be >= 1".into(),
                ));
            }
            Ok(Some(n))
        }
    }
}

// ─── spec-string parsing ───

/// Splits `name:key=val,key=val` (the parameter list is optional).
fn parse_spec(text: &str) -> Result<(String, Vec<(String, f64)>)> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (text, None),
    };
    let name = name.trim();
    if name.is_empty() {
        return Err(OuError::InvalidParam(format!(
            "empty name in spec `{text}`"
        )));
    }
    let mut params = Vec::new();
    if let Some(rest) = rest {
        for piece in rest.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let Some((key, value)) = piece.split_once('=') else {
                return Err(OuError::InvalidParam(format!(
                    "spec `{text}`: expected key=value, got `{piece}`"
                )));
            };
            let value: f64 = value.trim().parse().map_err(|_| {
                OuError::InvalidParam(format!(
                    "spec `{text}`: cannot parse `{}` as a number",
                    value.trim()
                ))
            })?;
            params.push((key.trim().to_string(), value));
        }
    }
    Ok((name.to_string(), params))
}

/// Parses a test-function spec `name:key=val,key=val` into a builtin.
pub fn parse_function(text: &str, dim: usize) -> Result<TestFunction> {
    let (name, params) = parse_spec(text)?;
    builtin_f(&name, &params, dim)
}

/// Parses a generator spec `name:key=val,key=val` into a builtin.
pub fn parse_generator(text: &str) -> Result<GeneratorC> {
    let (name, params) = parse_spec(text)?;
    builtin_c(&name, &params)
}

/// Parses a sweep `name:key=v|v|v,key=v`; `|` separates grid values.
fn parse_sweep(text: &str) -> Result<GeneratorSweep> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (text.trim(), None),
    };
    if name.is_empty() {
        return Err(OuError::InvalidParam(format!(
            "empty generator name in sweep `{text}`"
        )));
    }
    let mut grids = Vec::new();
    if let Some(rest) = rest {
        for piece in rest.split(',') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            let Some((key, values)) = piece.split_once('=') else {
                return Err(OuError::InvalidParam(format!(
                    "sweep `{text}`: expected key=values, got `{piece}`"
                )));
            };
            let values: Vec<f64> = values
                .split('|')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        OuError::InvalidParam(format!(
                            "sweep `{text}`: cannot parse `{}` as a number",
                            v.trim()
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            grids.push((key.trim().to_string(), values));
        }
    }
    Ok(GeneratorSweep {
        family: name.to_string(),
        param_grids: grids,
    })
}

/// Parses a probe grid `min:max:n:lin|log`.
fn parse_grid(text: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let [min, max, n, spacing] = parts.as_slice() else {
        return Err(OuError::InvalidParam(format!(
            "grid spec is min:max:n:lin|log, got `{text}`"
        )));
    };
    let parse_part = |s: &str, what: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| {
            OuError::InvalidParam(format!("grid `{text}`: cannot parse {what} `{s}`"))
        })
    };
    let x_min = parse_part(min, "minimum")?;
    let x_max = parse_part(max, "maximum")?;
    let n_points: usize = n.trim().parse().map_err(|_| {
        OuError::InvalidParam(format!("grid `{text}`: cannot parse point count `{n}`"))
    })?;
    let log_spaced = match spacing.trim() {
        "log" => true,
        "lin" => false,
        other => {
            return Err(OuError::InvalidParam(format!(
                "grid `{text}`: spacing must be lin or log, got `{other}`"
            )))
        }
    };
    Ok(GridSpec {
        x_min,
        x_max,
        n_points,
        log_spaced,
    })
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                OuError::InvalidParam(format!("{what}: cannot parse `{}` as a number", s.trim()))
            })
        })
        .collect()
}

// ─── emission helpers ───

fn emit_text(rc: &RunConfig, text: &str) -> Result<()> {
    match &rc.output {
        Some(path) => write_atomic(path, text),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            match writeln!(out, "{}", text.trim_end()) {
                Ok(()) => Ok(()),
                // The reader went away (output piped to head and the
                // like); the checks finished, keep their exit code.
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn record_common_inputs(report: &mut Report, rc: &RunConfig) {
    report.add_input("seed", rc.seed.to_string());
    report.add_input("dim", rc.dim.to_string());
    report.add_input("order", rc.effective_order().to_string());
    if let Some(w) = rc.workers {
        report.add_input("workers", w.to_string());
    }
    if let Some(ms) = rc.min_slack {
        report.add_input("min_slack", ms.to_string());
    }
    if let Some(me) = rc.max_error {
        report.add_input("max_error", me.to_string());
    }
}

fn common_inputs(rc: &RunConfig) -> BTreeMap<String, String> {
    let mut report = Report::new("");
    record_common_inputs(&mut report, rc);
    report.inputs
}

/// Raises every verdict's slack to the configured floor, re-deciding
/// `holds`; a raised floor only widens what counts as holding.
fn apply_min_slack(verdicts: &mut [Verdict], floor: f64) {
    for v in verdicts {
        if v.slack < floor {
            v.slack = floor;
            v.holds = match v.direction {
                Direction::Leq => v.margin >= -v.slack,
                Direction::Geq => v.margin <= v.slack,
            };
        }
    }
}

/// Enforces `tolerance.integration`: any verdict whose numeric error
/// estimate exceeds the configured budget is a non-convergence failure.
fn enforce_max_error(verdicts: &[Verdict], max_error: Option<f64>) -> Result<()> {
    let Some(budget) = max_error else {
        return Ok(());
    };
    for v in verdicts {
        if v.error_estimate > budget {
            return Err(OuError::NonConvergent {
                what: format!("numeric error of verdict `{}` (budget {budget:e})", v.name),
                value: v.error_estimate,
                error_estimate: v.error_estimate,
            });
        }
    }
    Ok(())
}

// ─── entry points ───

/// Parses the process arguments and runs the selected command; this is the
/// whole binary. Malformed flags exit 2 with usage text.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let rc = RunConfig::resolve(&cli.global)?;
    if let Some(n) = rc.workers {
        // The global pool admits one build per process; later calls keep
        // the first size, which is fine for a single CLI invocation.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let start = Instant::now();
    match &cli.command {
        Command::Verify(args) => cmd_verify(&rc, args, start),
        Command::Scan(args) => cmd_scan(&rc, args, start),
        Command::McCheck(args) => cmd_mc_check(&rc, args, start),
        Command::Conditions(args) => cmd_conditions(&rc, args, start),
        Command::Report(args) => cmd_report(&rc, args),
    }
}

// ─── verify ───

/// Corpus restricted to functions meeting the inequality's preconditions,
/// so corpus mode never fails on a function that is out of scope by design.
fn corpus_for(inequality: &str, dim: usize) -> Result<Vec<TestFunction>> {
    let all = standard_corpus(dim)?;
    let kept: Vec<TestFunction> = match inequality {
        "glsi" | "genrhc" => all
            .into_iter()
            .filter(TestFunction::bounded_away_from_zero)
            .collect(),
        "rhc" | "ctmain" | "sandwich" | "genhc" | "integrability" => {
            all.into_iter().filter(TestFunction::positivity).collect()
        }
        _ => all,
    };
    Ok(kept)
}

fn cmd_verify(rc: &RunConfig, args: &VerifyArgs, start: Instant) -> Result<bool> {
    let ineq = args.inequality.as_str();
    if !VERIFY_INEQUALITIES.contains(&ineq) {
        return Err(OuError::InvalidParam(format!(
            "unknown inequality `{ineq}`; expected one of {VERIFY_INEQUALITIES:?}"
        )));
    }
    let ev = rc.evaluator()?;
    let t = args.t.unwrap_or(if ineq == "sandwich" {
        args.s / 2.0
    } else {
        0.5
    });
    let generator = args.c.as_deref().map(parse_generator).transpose()?;
    let needs_generator = matches!(ineq, "genhc" | "genrhc" | "glsi" | "integrability");
    if needs_generator && generator.is_none() {
        return Err(OuError::InvalidParam(format!(
            "--c is required for {ineq}"
        )));
    }
    let functions = match &args.f {
        Some(spec) => vec![parse_function(spec, rc.dim)?],
        None => corpus_for(ineq, rc.dim)?,
    };

    let mut verdicts = Vec::new();
    for f in &functions {
        match ineq {
            "hc" => verdicts.push(ev.check_hc(f, args.p, t)?),
            "ehc" => verdicts.push(ev.check_ehc(f, t)?),
            "rhc" => verdicts.push(ev.check_rhc(f, args.alpha, t)?),
            "lsi" => verdicts.push(ev.check_lsi(f)?),
            "ctmain" => verdicts.push(ev.check_ctmain(f, t)?),
            "sandwich" => {
                let (upper, lower) = ev.check_sandwich(f, args.s, t)?;
                verdicts.push(upper);
                verdicts.push(lower);
            }
            "genhc" => {
                let c = generator.as_ref().unwrap();
                verdicts.push(ev.check_genhc_with(c, f, t, args.override_condition)?);
            }
            "genrhc" => {
                let c = generator.as_ref().unwrap();
                verdicts.push(ev.check_genrhc_with(c, f, t, args.override_condition)?);
            }
            "glsi" => verdicts.push(ev.check_glsi(generator.as_ref().unwrap(), f)?),
            "integrability" => {
                let c = generator.as_ref().unwrap();
                verdicts.push(ev.check_integrability_implication(c, f, t)?);
            }
            "suite" => {
                verdicts.push(ev.check_hc(f, args.p, t)?);
                // The exponential variant needs exp(f) integrable, which
                // the unbounded corpus members do not satisfy; skip those
                // in corpus mode (an explicit --f still runs both).
                if args.f.is_some() || f.upper_bound().is_some() {
                    verdicts.push(ev.check_ehc(f, t)?);
                }
            }
            _ => unreachable!("inequality validated above"),
        }
    }
    if ineq == "suite" && args.f.is_none() {
        // Exercise the exponential variant along its extremal direction
        // (exp of linear), which no bounded corpus member covers.
        let linear = builtin_f(
            "poly_plus_const",
            &[("c0".to_string(), 0.4), ("c1".to_string(), 0.6), ("kappa".to_string(), 0.0)],
            rc.dim,
        )?;
        verdicts.push(ev.check_ehc(&linear, t)?);
    }
    if let Some(floor) = rc.min_slack {
        apply_min_slack(&mut verdicts, floor);
    }
    enforce_max_error(&verdicts, rc.max_error)?;

    let mut report = Report::new("verify");
    record_common_inputs(&mut report, rc);
    report.add_input("inequality", ineq);
    report.add_input("f", args.f.as_deref().unwrap_or("corpus"));
    if let Some(c) = &args.c {
        report.add_input("c", c);
    }
    match ineq {
        "lsi" | "glsi" => {}
        _ => report.add_input("t", t.to_string()),
    }
    match ineq {
        "hc" | "suite" => report.add_input("p", args.p.to_string()),
        "rhc" => report.add_input("alpha", args.alpha.to_string()),
        "sandwich" => report.add_input("s", args.s.to_string()),
        _ => {}
    }
    if args.override_condition {
        report.add_input("override_condition", "true");
    }
    report.push_verdicts(verdicts);
    report.timing = start.elapsed().as_secs_f64();

    let pass = report.all_hold();
    emit_text(rc, &report.render(OutputFormat::from_str(&rc.format)?)?)?;
    Ok(pass)
}

// ─── scan ───

fn scan_inputs(rc: &RunConfig, args: &ScanArgs, spec: &ScanSpec) -> BTreeMap<String, String> {
    let mut inputs = common_inputs(rc);
    inputs.insert("inequality".into(), spec.inequality.clone());
    if let Some(f) = &args.f {
        inputs.insert("f".into(), f.clone());
    }
    if let Some(c) = &args.c {
        inputs.insert("c".into(), c.clone());
    }
    inputs.insert("t_grid".into(), format!("{:?}", spec.t_grid));
    inputs.insert("p_grid".into(), format!("{:?}", spec.p_grid));
    if spec.q_scale != 1.0 {
        inputs.insert("q_scale".into(), spec.q_scale.to_string());
    }
    if spec.override_condition {
        inputs.insert("override_condition".into(), "true".into());
    }
    if let Some(b) = args.budget {
        inputs.insert("budget".into(), b.to_string());
    }
    inputs
}

/// A scan cell as a CSV verdict row; error cells become rows named
/// `<inequality>_error` with NaN numerics and the message in params.
fn cell_row(inequality: &str, cell: &ScanCell) -> Verdict {
    if let Some(v) = &cell.verdict {
        return v.clone();
    }
    let mut inputs = cell.coordinates.clone();
    inputs.insert(
        "error".into(),
        cell.error.clone().unwrap_or_else(|| "unknown".into()),
    );
    Verdict {
        name: format!("{inequality}_error"),
        lhs: f64::NAN,
        rhs: f64::NAN,
        margin: f64::NAN,
        slack: f64::NAN,
        holds: false,
        error_estimate: f64::NAN,
        direction: Direction::Leq,
        inputs,
    }
}

fn cmd_scan(rc: &RunConfig, args: &ScanArgs, start: Instant) -> Result<bool> {
    let mut spec = ScanSpec::new(&args.inequality, rc.dim);
    spec.seed = rc.seed;
    spec.order = rc.order;
    spec.workers = rc.workers;
    spec.q_scale = args.q_scale;
    spec.override_condition = args.override_condition;
    spec.min_slack = args.min_slack.or(rc.min_slack);
    if let Some(t) = &args.t {
        spec.t_grid = parse_f64_list(t, "--t")?;
    }
    if let Some(p) = &args.p {
        spec.p_grid = parse_f64_list(p, "--p")?;
    }
    if let Some(f) = &args.f {
        spec.corpus_filter = f.split(',').map(|s| s.trim().to_string()).collect();
    }
    if let Some(c) = &args.c {
        spec.generator = Some(parse_sweep(c)?);
    }
    let inputs = scan_inputs(rc, args, &spec);
    let format = OutputFormat::from_str(&rc.format)?;

    if let Some(budget) = args.budget {
        let search = search_counterexample(&spec, budget)?;
        if format != OutputFormat::Json {
            return Err(OuError::InvalidParam(
                "search reports are JSON only; rerun with --format json".into(),
            ));
        }
        let found = search.violation.is_some();
        let doc = serde_json::json!({
            "version": REPORT_VERSION,
            "command": "scan",
            "inputs": inputs,
            "search": search,
            "timing": start.elapsed().as_secs_f64(),
        });
        emit_text(rc, &serde_json::to_string_pretty(&doc)?)?;
        return Ok(!found);
    }

    let result = run_scan(&spec)?;
    let pass = result.n_failures == 0 && result.n_errors == 0;
    let text = match format {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "version": REPORT_VERSION,
                "command": "scan",
                "inputs": inputs,
                "result": result,
                "timing": start.elapsed().as_secs_f64(),
            });
            serde_json::to_string_pretty(&doc)?
        }
        OutputFormat::Csv => {
            let mut report = Report::new("scan");
            report.inputs = inputs;
            report.push_verdicts(result.cells.iter().map(|c| cell_row(&result.inequality, c)));
            report.timing = start.elapsed().as_secs_f64();
            report.to_csv()
        }
    };
    emit_text(rc, &text)?;
    Ok(pass)
}

// ─── mc-check ───

fn cmd_mc_check(rc: &RunConfig, args: &McCheckArgs, start: Instant) -> Result<bool> {
    let f = parse_function(&args.f, rc.dim)?;
    let paths = args.paths.or(rc.mc_paths).unwrap_or(100_000);
    let mut spec = EnsembleSpec::new(paths, rc.seed, rc.dim)?;
    if let Some(io) = args.inner_order.or(rc.mc_inner_order) {
        spec = spec.with_inner_rule(build_rule(io, rc.dim)?)?;
    }
    let rule = match rc.order {
        Some(order) => build_rule(order, rc.dim)?,
        None => default_rule(rc.dim)?,
    };
    let law = check_identity_in_law(&f, args.t, &spec, &rule)?;

    let mut inputs = common_inputs(rc);
    inputs.insert("f".into(), args.f.clone());
    inputs.insert("t".into(), args.t.to_string());
    inputs.insert("paths".into(), paths.to_string());
    inputs.insert("inner_order".into(), spec.inner_rule.order().to_string());

    let text = match OutputFormat::from_str(&rc.format)? {
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "version": REPORT_VERSION,
                "command": "mc-check",
                "inputs": inputs,
                "report": law,
                "timing": start.elapsed().as_secs_f64(),
            });
            serde_json::to_string_pretty(&doc)?
        }
        OutputFormat::Csv => {
            // Two-sided moment rows: lhs is the absolute discrepancy, rhs
            // the 4-SE band, so holds means |quad - mc| <= band exactly.
            let mut report = Report::new("mc-check");
            report.inputs = inputs;
            for m in &law.moments {
                let diff = (m.quadrature - m.monte_carlo).abs();
                let band = 4.0 * m.std_error + 1e-12 * m.quadrature.abs().max(1.0);
                let mut row_inputs = BTreeMap::new();
                row_inputs.insert("quadrature".to_string(), format!("{:.17e}", m.quadrature));
                row_inputs.insert("monte_carlo".to_string(), format!("{:.17e}", m.monte_carlo));
                row_inputs.insert("t".to_string(), args.t.to_string());
                report.push_verdict(Verdict {
                    name: format!("identity_moment_{}", m.order),
                    lhs: diff,
                    rhs: band,
                    margin: band - diff,
                    slack: 0.0,
                    holds: m.within_bands,
                    error_estimate: m.std_error,
                    direction: Direction::Leq,
                    inputs: row_inputs,
                });
            }
            report.timing = start.elapsed().as_secs_f64();
            report.to_csv()
        }
    };
    emit_text(rc, &text)?;
    Ok(law.passed)
}

// ─── conditions ───

fn cmd_conditions(rc: &RunConfig, args: &ConditionsArgs, start: Instant) -> Result<bool> {
    if OutputFormat::from_str(&rc.format)? != OutputFormat::Json {
        return Err(OuError::InvalidParam(
            "condition reports are JSON only; rerun with --format json".into(),
        ));
    }
    let c = parse_generator(&args.c)?;
    let grid = args.grid.as_deref().map(parse_grid).transpose()?.unwrap_or_default();
    let report_c = check_condition_c(&c, &grid)?;
    let report_cp = check_condition_cprime(&c, &grid)?;
    let (kappa1, kappa2) = fitted_kappa(&c, &grid)?;
    let natural = if report_c.passed {
        "C"
    } else if report_cp.passed {
        "C_prime"
    } else {
        "none"
    };
    let passed = report_c.passed || report_cp.passed;

    let mut inputs = common_inputs(rc);
    inputs.insert("c".into(), args.c.clone());
    inputs.insert(
        "grid".into(),
        format!(
            "{}:{}:{}:{}",
            grid.x_min,
            grid.x_max,
            grid.n_points,
            if grid.log_spaced { "log" } else { "lin" }
        ),
    );
    let doc = serde_json::json!({
        "version": REPORT_VERSION,
        "command": "conditions",
        "inputs": inputs,
        "condition_c": report_c,
        "condition_c_prime": report_cp,
        "natural": natural,
        "passed": passed,
        "fitted_kappa1": kappa1,
        "fitted_kappa2": kappa2,
        "timing": start.elapsed().as_secs_f64(),
    });
    emit_text(rc, &serde_json::to_string_pretty(&doc)?)?;
    Ok(passed)
}

// ─── report ───

fn cmd_report(rc: &RunConfig, args: &ReportArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.input)?;
    let report = Report::from_json(&text)?;
    let rendered = match rc.format.as_str() {
        "table" => report.to_table(),
        other => report.render(OutputFormat::from_str(other)?)?,
    };
    emit_text(rc, &rendered)?;
    Ok(true)
}
