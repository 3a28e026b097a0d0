//! Command-line front end for `dicke-critic`.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::commands::Outcome;
use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error(transparent)]
    Core(#[from] dicke_critic::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const NO_TRANSITION: i32 = 2;
    pub const DISAGREEMENT: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "dicke-critic", version, about = "Critical coupling of the open Dicke model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical coupling at one parameter point.
    Gc,
    /// Critical coupling over a one- or two-axis grid.
    Sweep {
        #[arg(long)]
        sweep_axis: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        sweep_axis2: Option<String>,
        #[arg(long)]
        grid2: Option<String>,
    },
    /// Steady-state two-time correlator S_x(t).
    Corr {
        #[arg(long)]
        tmax: Option<String>,
        #[arg(long)]
        dt: Option<String>,
    },
    /// Cavity determinant and susceptibility against frequency.
    Spectrum {
        #[arg(long)]
        g: Option<String>,
        /// `start:step:stop` or a comma list.
        #[arg(long, allow_hyphen_values = true)]
        omegas: Option<String>,
    },
    /// Steady state of N atoms and a truncated cavity over a coupling grid.
    Exact {
        #[arg(long)]
        atoms: Option<String>,
        /// Number of Fock states kept.
        #[arg(long)]
        cutoff: Option<String>,
        #[arg(long)]
        g_grid: Option<String>,
    },
    /// Mean-field time evolution from the normal state with a seeded cavity.
    Trajectory {
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        duration: Option<String>,
        #[arg(long)]
        dt: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha0: Option<String>,
    },
    /// Closed form against quadrature and the mean-field threshold.
    Oracle {
        /// Run the built-in nine-point suite instead of the configured point.
        #[arg(long)]
        suite: bool,
        #[arg(long)]
        no_meanfield: bool,
        #[arg(long)]
        no_quadrature: bool,
        #[arg(long)]
        tol: Option<String>,
        #[arg(long)]
        threshold: Option<String>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    bath: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_z: Option<String>,
    #[arg(long, global = true)]
    omega0: Option<String>,
    #[arg(long, global = true)]
    kappa: Option<String>,
    /// self-consistent or paper-literal.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// numeric or closed-form.
    #[arg(long, global = true)]
    method: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Report frequencies as given instead of in units of omega_z.
    #[arg(long, global = true)]
    raw_units: bool,
}

fn overlay(cfg: &mut RunConfig, key: &str, flag: &str, value: Option<&str>) -> Result<(), CliError> {
    if let Some(v) = value {
        cfg.set(key, v).map_err(|(_, m)| CliError::Usage(format!("--{flag}: {m}")))?;
    }
    Ok(())
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let c = &cli.common;
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        cfg.apply_file(&text)?;
    }
    for (key, flag, v) in [
        ("bath", "bath", &c.bath),
        ("omega_z", "omega-z", &c.omega_z),
        ("omega0", "omega0", &c.omega0),
        ("kappa", "kappa", &c.kappa),
        ("mode", "mode", &c.mode),
        ("method", "method", &c.method),
        ("format", "format", &c.format),
    ] {
        overlay(&mut cfg, key, flag, v.as_deref())?;
    }
    if let Some(p) = &c.output {
        cfg.output = Some(p.clone());
    }
    if c.raw_units {
        cfg.raw_units = true;
    }
    match &cli.command {
        Command::Gc => {}
        Command::Sweep { sweep_axis, grid, sweep_axis2, grid2 } => {
            overlay(&mut cfg, "sweep_axis", "sweep-axis", sweep_axis.as_deref())?;
            overlay(&mut cfg, "grid", "grid", grid.as_deref())?;
            overlay(&mut cfg, "sweep_axis2", "sweep-axis2", sweep_axis2.as_deref())?;
            overlay(&mut cfg, "grid2", "grid2", grid2.as_deref())?;
        }
        Command::Corr { tmax, dt } => {
            overlay(&mut cfg, "tmax", "tmax", tmax.as_deref())?;
            overlay(&mut cfg, "dt", "dt", dt.as_deref())?;
        }
        Command::Spectrum { g, omegas } => {
            overlay(&mut cfg, "g", "g", g.as_deref())?;
            overlay(&mut cfg, "omegas", "omegas", omegas.as_deref())?;
        }
        Command::Exact { atoms, cutoff, g_grid } => {
            overlay(&mut cfg, "atoms", "atoms", atoms.as_deref())?;
            overlay(&mut cfg, "cutoff", "cutoff", cutoff.as_deref())?;
            overlay(&mut cfg, "g_grid", "g-grid", g_grid.as_deref())?;
        }
        Command::Trajectory { g, duration, dt, alpha0 } => {
            overlay(&mut cfg, "g", "g", g.as_deref())?;
            overlay(&mut cfg, "duration", "duration", duration.as_deref())?;
            overlay(&mut cfg, "dt", "dt", dt.as_deref())?;
            overlay(&mut cfg, "alpha0", "alpha0", alpha0.as_deref())?;
        }
        Command::Oracle { suite, no_meanfield, no_quadrature, tol, threshold } => {
            cfg.oracle_suite |= *suite;
            cfg.oracle_meanfield &= !*no_meanfield;
            cfg.oracle_quadrature &= !*no_quadrature;
            overlay(&mut cfg, "tol", "tol", tol.as_deref())?;
            overlay(&mut cfg, "oracle_threshold", "threshold", threshold.as_deref())?;
        }
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("DICKE_CRITIC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("DICKE_CRITIC_THREADS=`{v}` is not a positive integer")))?;
    // A pool built earlier in the process (tests) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    init_threads()?;
    let cfg = configure(cli)?;
    let Outcome { table, status, notes } = match cli.command {
        Command::Gc => commands::gc(&cfg)?,
        Command::Sweep { .. } => commands::sweep(&cfg)?,
        Command::Corr { .. } => commands::corr(&cfg)?,
        Command::Spectrum { .. } => commands::spectrum(&cfg)?,
        Command::Exact { .. } => commands::exact(&cfg)?,
        Command::Trajectory { .. } => commands::trajectory(&cfg)?,
        Command::Oracle { .. } => commands::oracle(&cfg)?,
    };
    emit(&cfg, &table.render(cfg.format))?;
    for n in notes {
        eprintln!("{n}");
    }
    Ok(status)
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::USAGE } else { exit::OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::USAGE
        }
    }
}
