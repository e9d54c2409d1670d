use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dropmor::commands;
use dropmor::config::{parse_pbox, BasisName, PairingName};
use dropmor::{CliError, RunConfig};

/// Alias so clap parses the whole list as one value.
type ParamBox = Vec<[f64; 2]>;

/// Stdout lines; a closed pipe is not an error.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

/// Structure-preserving model reduction from sampled reachable and observable subspaces.
#[derive(Debug, Parser)]
#[command(name = "dropmor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample, reduce and write the reduced system with its singular values.
    Reduce(RunArgs),
    /// Compare full and reduced transfer functions on a frequency/parameter grid.
    Sweep(RunArgs),
    /// Check interpolation and Hermite conditions at the sample points.
    Verify(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML or JSON file with the same keys as these flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin benchmark: demo, delay or heat.
    #[arg(long, conflicts_with = "manifest")]
    bench: Option<String>,
    /// Benchmark size (delay: n, heat: grid points per side).
    #[arg(long)]
    size: Option<usize>,
    /// System manifest (TOML).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    nfreq: Option<usize>,
    /// Lower angular frequency of the sampling and sweep range.
    #[arg(long)]
    fmin: Option<f64>,
    #[arg(long)]
    fmax: Option<f64>,
    #[arg(long)]
    nparam: Option<usize>,
    /// Parameter box as lo:hi[,lo:hi...].
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pbox)]
    pbox: Option<ParamBox>,
    #[arg(long, value_enum)]
    pairing: Option<PairingName>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed reduced order.
    #[arg(long, conflicts_with = "tol")]
    order: Option<usize>,
    /// Relative singular-value truncation tolerance (default 1e-8).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    one_sided: bool,
    #[arg(long)]
    tangential: bool,
    /// Post-processing of the sampled bases.
    #[arg(long, value_enum)]
    basis: Option<BasisName>,
    /// Use real bases (real and imaginary parts of the samples).
    #[arg(long)]
    realify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reduced manifest for sweep and verify (default: <out>/reduced.toml).
    #[arg(long)]
    reduced: Option<PathBuf>,
    #[arg(long)]
    sweep_nfreq: Option<usize>,
    #[arg(long)]
    sweep_nparam: Option<usize>,
    #[arg(long)]
    interp_tol: Option<f64>,
    #[arg(long)]
    hermite_tol: Option<f64>,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if self.bench.is_some() {
            cfg.bench = self.bench;
            cfg.manifest = None;
        }
        if self.manifest.is_some() {
            cfg.manifest = self.manifest;
            cfg.bench = None;
        }
        if self.order.is_some() {
            cfg.order = self.order;
            cfg.tol = None;
        }
        if self.tol.is_some() {
            cfg.tol = self.tol;
            cfg.order = None;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    cfg.$field = v.into();
                }
            )*};
        }
        set!(size, nfreq, fmin, fmax, nparam, pbox, reduced);
        set!(pairing, seed, basis, out, sweep_nfreq, sweep_nparam, interp_tol, hermite_tol);
        cfg.one_sided |= self.one_sided;
        cfg.tangential |= self.tangential;
        cfg.realify |= self.realify;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Reduce(args) => {
            let cfg = args.into_config()?;
            let outcome = commands::reduce(&cfg)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            out!("reduced order {} written to {}", outcome.order, outcome.reduced_path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let cfg = args.into_config()?;
            let report = commands::sweep(&cfg)?;
            for (k, msg) in &report.failures {
                eprintln!("warning: point {k} not evaluated: {msg}");
            }
            out!(
                "max_abs {:e}  max_rel {:e}  l2 {:e}  ({} points)",
                report.max_abs,
                report.max_rel,
                report.l2_err,
                report.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let cfg = args.into_config()?;
            let outcome = commands::verify(&cfg)?;
            for (label, check) in [("interpolation", &outcome.interpolation), ("hermite", &outcome.hermite)] {
                out!(
                    "{label}: max residual {:e} (tol {:e}) {}",
                    check.max_residual(),
                    check.tol,
                    if check.passed() { "ok" } else { "FAILED" }
                );
                for p in check.failing() {
                    let why = p.failure.as_deref().map(|f| format!(" ({f})")).unwrap_or_default();
                    out!("  point {} s = {} p = {:?}: {:e}{why}", p.index, p.sigma, p.param, p.residual);
                }
            }
            Ok(if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
