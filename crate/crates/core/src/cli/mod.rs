//! Command-line front end: `bounds`, `optimize`, `sweep`, `simulate`,
//! `refine` and `verify`.
//!
//! Exit codes: 0 on success, 1 on bad arguments or a failed computation,
//! 2 when `verify` finds a failing check.

mod verify;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    bounds, kfold_alice_lower, optimize_lambda, ours_alice_bound, refined_alice_bound, sweep_k, AliceCurve,
    BoundsReport, OptimizationResult, SweepRow,
};
use crate::engine::{Adversary, ChannelModel, Protocol, RunStats, Scenario};
use crate::error::{Error, Result};
use crate::states::{Bit, LambdaParam};

pub use verify::{property_check, verify_suite, CheckOutcome, Property, VerifySummary};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "COINFLIP_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AdversaryKind {
    None,
    BobDiscriminate,
    AliceProduct,
}

#[derive(Debug, Parser)]
#[command(name = "coinflip", version, about = "Loss-tolerant quantum coin flipping: bounds, optimization and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    pub format: Format,
    /// Write the report to this file instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cheating probabilities for one protocol and λ.
    Bounds {
        #[arg(long, default_value = "ours")]
        protocol: Protocol,
        #[arg(long, default_value = "0.859", value_parser = parse_lambda)]
        lambda: LambdaParam,
        /// Repetitions; used by the unencrypted protocol only.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
    },
    /// λ minimizing max(P*_A, P*_B).
    Optimize {
        #[arg(long, default_value = "ours")]
        protocol: Protocol,
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..=64))]
        k: u32,
        /// Use the product-strategy lower bound g(k, λ) for the unencrypted protocol.
        #[arg(long)]
        lower: bool,
    },
    /// Minimax values for k = 1..=k_max repetitions.
    Sweep {
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(3..=20))]
        k_max: u32,
    },
    /// Monte Carlo run of the protocol.
    Simulate {
        #[arg(long, default_value = "ours")]
        protocol: Protocol,
        #[arg(long, default_value = "0.859", value_parser = parse_lambda)]
        lambda: LambdaParam,
        /// Per-register loss probability.
        #[arg(long, default_value = "0", value_parser = parse_eta)]
        eta: ChannelModel,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        /// Defaults to $COINFLIP_SEED, then 42.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "none")]
        adversary: AdversaryKind,
        /// Outcome the adversary tries to force.
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
        target: u8,
        /// Write every trial's transcript to this file.
        #[arg(long)]
        dump_transcripts: Option<PathBuf>,
    },
    /// Numeric cheating-Alice value for the two-register protocol.
    Refine {
        #[arg(long, default_value = "0.859", value_parser = parse_lambda)]
        lambda: LambdaParam,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Runs the invariant and property checks.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        /// Random instances per inequality.
        #[arg(long, default_value_t = 10_000)]
        instances: u64,
    },
}

fn parse_lambda(s: &str) -> std::result::Result<LambdaParam, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    LambdaParam::new(v).map_err(|e| e.to_string())
}

fn parse_eta(s: &str) -> std::result::Result<ChannelModel, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    ChannelModel::new(v).map_err(|e| e.to_string())
}

/// Explicit flag, then `$COINFLIP_SEED`, then [`DEFAULT_SEED`].
pub fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinedReport {
    pub lambda: f64,
    pub restarts: usize,
    pub seed: u64,
    pub value: f64,
    /// g(2, λ).
    pub p_alice_lower: f64,
    /// ½ + ½((1 + 2√(λ(1−λ)))/2)².
    pub p_alice_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Bounds(BoundsReport),
    Optimization(OptimizationResult),
    Sweep(Vec<SweepRow>),
    Run(RunStats),
    Refined(RefinedReport),
    Verify(VerifySummary),
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn opt6(x: Option<f64>) -> String {
    x.map(f6).unwrap_or_default()
}

/// Renders a report. JSON keeps full precision so it parses back exactly;
/// text and CSV print probabilities to 6 decimals.
pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = match report {
                Report::Bounds(r) => serde_json::to_string_pretty(r),
                Report::Optimization(r) => serde_json::to_string_pretty(r),
                Report::Sweep(r) => serde_json::to_string_pretty(r),
                Report::Run(r) => serde_json::to_string_pretty(r),
                Report::Refined(r) => serde_json::to_string_pretty(r),
                Report::Verify(r) => serde_json::to_string_pretty(r),
            }
            .expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Csv => emit_csv(report),
        Format::Text => emit_text(report),
    }
}

fn emit_csv(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Bounds(r) => {
            out.push_str("protocol,lambda,k,p_alice_upper,p_alice_lower,p_bob\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.protocol,
                f6(r.lambda),
                r.k,
                f6(r.p_alice_upper),
                opt6(r.p_alice_lower),
                f6(r.p_bob)
            );
        }
        Report::Optimization(r) => {
            out.push_str("curve,lambda_star,p_star,bias,iterations,boundary\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.curve,
                f6(r.lambda_star),
                f6(r.p_star),
                f6(r.bias),
                r.iterations,
                r.boundary
            );
        }
        Report::Sweep(rows) => {
            out.push_str("k,lambda_star_lower,p_lower,lambda_star_upper,p_upper\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.k,
                    f6(r.lambda_star_lower),
                    f6(r.p_lower),
                    f6(r.lambda_star_upper),
                    f6(r.p_upper)
                );
            }
        }
        Report::Run(r) => {
            out.push_str("trials,discarded,freq_x0,freq_x1,freq_abort,mean_restarts,adversary_win_rate\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.trials,
                r.discarded,
                f6(r.freq_x0),
                f6(r.freq_x1),
                f6(r.freq_abort),
                f6(r.mean_restarts),
                opt6(r.adversary_win_rate)
            );
        }
        Report::Refined(r) => {
            out.push_str("lambda,restarts,seed,value,p_alice_lower,p_alice_upper\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                f6(r.lambda),
                r.restarts,
                r.seed,
                f6(r.value),
                f6(r.p_alice_lower),
                f6(r.p_alice_upper)
            );
        }
        Report::Verify(v) => {
            out.push_str("name,instances,violations,worst_excess,passed\n");
            for c in &v.checks {
                let _ = writeln!(
                    out,
                    "\"{}\",{},{},{:e},{}",
                    c.name, c.instances, c.violations, c.worst_excess, c.passed
                );
            }
        }
    }
    out
}

fn emit_text(report: &Report) -> String {
    let mut out = String::new();
    match report {
        Report::Bounds(r) => {
            let tag = |exact: bool| if exact { " (exact)" } else { " (upper bound)" };
            let _ = writeln!(out, "protocol={} lambda={} k={}", r.protocol, f6(r.lambda), r.k);
            let _ = writeln!(out, "p_alice={}{}", f6(r.p_alice_upper), tag(r.which_exact.alice));
            if let Some(lower) = r.p_alice_lower {
                let _ = writeln!(out, "p_alice_lower={} (product strategy)", f6(lower));
            }
            let _ = writeln!(out, "p_bob={}{}", f6(r.p_bob), tag(r.which_exact.bob));
        }
        Report::Optimization(r) => {
            let _ = writeln!(out, "lambda*={} P*={} bias={}", f6(r.lambda_star), f6(r.p_star), f6(r.bias));
            let _ = writeln!(
                out,
                "curve={} solver=bisection iterations={} tolerance={:e}{}",
                r.curve,
                r.iterations,
                r.tolerance,
                if r.boundary { " boundary" } else { "" }
            );
        }
        Report::Sweep(rows) => {
            let _ = writeln!(out, "{:>3}  {:>17}  {:>8}  {:>17}  {:>8}", "k", "lambda_star_lower", "p_lower", "lambda_star_upper", "p_upper");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{:>3}  {:>17}  {:>8}  {:>17}  {:>8}",
                    r.k,
                    f6(r.lambda_star_lower),
                    f6(r.p_lower),
                    f6(r.lambda_star_upper),
                    f6(r.p_upper)
                );
            }
        }
        Report::Run(r) => {
            let _ = writeln!(out, "trials={} discarded={}", r.trials, r.discarded);
            let _ = writeln!(out, "freq_x0={} freq_x1={} freq_abort={}", f6(r.freq_x0), f6(r.freq_x1), f6(r.freq_abort));
            let _ = writeln!(out, "mean_restarts={}", f6(r.mean_restarts));
            if let Some(w) = r.adversary_win_rate {
                let _ = writeln!(out, "adversary_win_rate={} (sigma {})", f6(w), f6(r.sigma(w)));
            }
        }
        Report::Refined(r) => {
            let _ = writeln!(out, "lambda={} restarts={} seed={}", f6(r.lambda), r.restarts, r.seed);
            let _ = writeln!(
                out,
                "p_alice={} (product {} <= value <= bound {})",
                f6(r.value),
                f6(r.p_alice_lower),
                f6(r.p_alice_upper)
            );
        }
        Report::Verify(v) => {
            for c in &v.checks {
                let _ = writeln!(
                    out,
                    "{} {} ({} instances, {} violations, worst excess {:.3e})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.instances,
                    c.violations,
                    c.worst_excess
                );
            }
            let _ = writeln!(out, "seed={} passed={} failed={}", v.seed, v.passed, v.failed);
        }
    }
    out
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn adversary(kind: AdversaryKind, target: Bit) -> Adversary {
    match kind {
        AdversaryKind::None => Adversary::None,
        AdversaryKind::BobDiscriminate => Adversary::BobDiscriminate { target },
        AdversaryKind::AliceProduct => Adversary::AliceProduct { target },
    }
}

fn optimize_curve(protocol: Protocol, k: u32, lower: bool) -> AliceCurve {
    match (protocol, lower) {
        (Protocol::Berlin, _) => AliceCurve::Berlin,
        (Protocol::Ours, _) => AliceCurve::Ours,
        (Protocol::Unencrypted, false) => AliceCurve::KfoldUpper(k),
        (Protocol::Unencrypted, true) => AliceCurve::KfoldLower(k),
    }
}

/// Runs a parsed command and returns its report.
pub fn execute(command: &Command) -> Result<Report> {
    Ok(match command {
        Command::Bounds { protocol, lambda, k } => Report::Bounds(bounds(*protocol, *lambda, *k)?),
        Command::Optimize { protocol, k, lower } => Report::Optimization(optimize_lambda(optimize_curve(*protocol, *k, *lower))?),
        Command::Sweep { k_max } => Report::Sweep(sweep_k(*k_max)?),
        Command::Simulate {
            protocol,
            lambda,
            eta,
            trials,
            seed,
            adversary: kind,
            target,
            dump_transcripts,
        } => {
            let seed = resolve_seed(*seed)?;
            let scenario = Scenario {
                protocol: *protocol,
                lambda: *lambda,
                channel: *eta,
                adversary: adversary(*kind, *target),
            };
            let stats = match dump_transcripts {
                Some(path) => {
                    let mut text = String::new();
                    let stats = scenario.run_with(*trials, seed, |t| t.write_lines(&mut text))?;
                    write_atomic(path, &text)?;
                    stats
                }
                None => scenario.run(*trials, seed)?,
            };
            Report::Run(stats)
        }
        Command::Refine { lambda, restarts, seed } => {
            let seed = resolve_seed(*seed)?;
            Report::Refined(RefinedReport {
                lambda: lambda.value(),
                restarts: (*restarts).max(1),
                seed,
                value: refined_alice_bound(*lambda, *restarts, seed),
                p_alice_lower: kfold_alice_lower(2, *lambda)?,
                p_alice_upper: ours_alice_bound(*lambda),
            })
        }
        Command::Verify { seed, instances } => Report::Verify(verify_suite(resolve_seed(*seed)?, *instances)),
    })
}

/// Parses `argv` (including the program name), runs it and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let text = emit_report(&report, cli.format);
    let written = match &cli.output {
        Some(path) => write_atomic(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 1;
    }
    match report {
        Report::Verify(v) if !v.all_passed() => 2,
        _ => 0,
    }
}
