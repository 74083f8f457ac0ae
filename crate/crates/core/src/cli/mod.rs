//! Command-line front end. Exit status: 0 on success, 1 when a verification
//! fails or the solver does not converge, 2 on invalid configuration.

mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::chain::{self, CertificateVerdict, TransitionMatrix};
use crate::error::RatchetError;
use crate::fokker_planck::{
    find_periodic, simulate, DensityGrid, PhaseBoundary,
};
use crate::kernel::KernelEval;
use crate::measures::{self, ratchet_localization_check, verify_transport};

pub use config::{ExperimentConfig, OutputConfig, Overrides, Resolved};
pub use output::{fmt_f64, to_json, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot parse config {}: {source}", path.display())]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("invalid config field `{field}`: {reason}")]
    Field { field: String, reason: String },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Solver(#[from] RatchetError),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub(crate) fn field(field: &str, reason: impl Into<String>) -> Self {
        CliError::Field {
            field: field.to_owned(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(RatchetError::InvalidParameter { .. })
            | CliError::Solver(RatchetError::MisalignedGrid { .. })
            | CliError::Solver(RatchetError::GridTooSmall(..)) => 2,
            CliError::Solver(_) | CliError::Verification(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ratchet-lab", version, about = "Flashing-ratchet Brownian motor lab")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CSV of the Neumann Green's function g(ξ, x, s) on a grid.
    KernelTable {
        #[arg(long, default_value_t = 50)]
        xi_points: usize,
        #[arg(long, default_value_t = 50)]
        x_points: usize,
        /// Diffusion times.
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 0.5, 1.0])]
        s: Vec<f64>,
    },
    /// Discrete-ratchet Markov chain.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Fokker-Planck solver.
    #[command(subcommand)]
    Pde(PdeCommand),
    /// Periodic orbit against the chain for the potential and its mirror (JSON).
    Verify,
    /// Periodic orbits along the sweep ladder (CSV).
    Sweep,
    /// W₁ distance to the collapsed initial state during the ratchet phase (CSV).
    Compare {
        /// Ratchet-phase durations, ascending.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0])]
        durations: Vec<f64>,
        /// Noise levels to compare; defaults to the configured sigma.
        #[arg(long, value_delimiter = ',')]
        sigmas: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChainCommand {
    /// Transition matrix P(τ) (JSON).
    Build,
    /// Stationary vector and κ (JSON), or a gap-vs-τ table with --taus (CSV).
    Stationary {
        #[arg(long, value_delimiter = ',')]
        taus: Vec<f64>,
    },
    /// Structural certificate and gap bound (JSON).
    Certify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Initial {
    Uniform,
    Boltzmann,
}

#[derive(Debug, Subcommand)]
pub enum PdeCommand {
    /// Snapshots of ρ(x, t) at every phase boundary (CSV).
    Simulate {
        #[arg(long, default_value_t = 5)]
        cycles: usize,
        #[arg(long, value_enum, default_value_t = Initial::Uniform)]
        initial: Initial,
    },
    /// Fixed point of the period map with its residual trace (JSON).
    Periodic,
}

/// Parses `args` and runs the command, printing errors to stderr.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let uses_grid = !matches!(cli.command, Command::KernelTable { .. } | Command::Chain(_));
    let cfg = config::resolve(&cli.overrides, uses_grid)?;
    let out = cfg.output.as_deref();
    match &cli.command {
        Command::KernelTable {
            xi_points,
            x_points,
            s,
        } => output::emit(out, &kernel_table(*xi_points, *x_points, s)?.to_csv()),
        Command::Chain(cmd) => chain_command(cmd, &cfg),
        Command::Pde(cmd) => pde_command(cmd, &cfg),
        Command::Verify => {
            let report = with_thread_cap(|| {
                verify_transport(&cfg.potential, &cfg.schedule, &cfg.grid, &cfg.solver)
            })??;
            output::emit(out, &to_json(&Report::new(&cfg, &report)))?;
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Verification(report.failures.join("; ")))
            }
        }
        Command::Sweep => {
            let rows = with_thread_cap(|| {
                measures::sweep(&cfg.potential, &cfg.sweep, &cfg.grid, &cfg.solver)
            })??;
            emit_csv(&cfg, &sweep_table(&rows, cfg.potential.k()))
        }
        Command::Compare { durations, sigmas } => {
            let sigmas = if sigmas.is_empty() {
                vec![cfg.schedule.sigma()]
            } else {
                sigmas.clone()
            };
            let rho0 = DensityGrid::uniform(cfg.grid.n)?;
            let mut table = Table::new(["sigma", "t_tr", "w1"]);
            for sigma in sigmas {
                let trace =
                    ratchet_localization_check(&cfg.potential, sigma, &rho0, durations, cfg.grid.dt)?;
                for pt in trace {
                    table.push(vec![fmt_f64(sigma), fmt_f64(pt.t_tr), fmt_f64(pt.distance)]);
                }
            }
            emit_csv(&cfg, &table)
        }
    }
}

/// JSON report with the effective config echoed alongside.
#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    body: &'a T,
}

impl<'a, T: Serialize> Report<'a, T> {
    fn new(cfg: &'a Resolved, body: &'a T) -> Self {
        Self {
            config: &cfg.effective,
            body,
        }
    }
}

/// CSV to the output path with the effective config in `<path>.config.json`
/// next to it; to stdout alone otherwise.
fn emit_csv(cfg: &Resolved, table: &Table) -> Result<(), CliError> {
    let out = cfg.output.as_deref();
    output::emit(out, &table.to_csv())?;
    if let Some(path) = out {
        let mut side = path.as_os_str().to_owned();
        side.push(".config.json");
        output::emit(Some(Path::new(&side)), &to_json(&cfg.effective))?;
    }
    Ok(())
}

fn with_thread_cap<T>(f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    let threads = match std::env::var("RATCHET_LAB_THREADS") {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::field("RATCHET_LAB_THREADS", format!("not a positive integer: {v:?}")))?,
        Err(_) => return Ok(f()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::field("RATCHET_LAB_THREADS", e.to_string()))?;
    Ok(pool.install(f))
}

fn kernel_table(xi_points: usize, x_points: usize, times: &[f64]) -> Result<Table, CliError> {
    if xi_points < 2 || x_points < 2 {
        return Err(CliError::field("xi_points/x_points", "need at least 2 points"));
    }
    let eval = KernelEval::default();
    let mut table = Table::new(["xi", "x", "s", "g", "g_images", "g_cosine"]);
    for &s in times {
        for i in 0..xi_points {
            let xi = i as f64 / (xi_points - 1) as f64;
            for j in 0..x_points {
                let x = j as f64 / (x_points - 1) as f64;
                table.push(vec![
                    fmt_f64(xi),
                    fmt_f64(x),
                    fmt_f64(s),
                    fmt_f64(eval.green(xi, x, s)?),
                    fmt_f64(eval.green_images(xi, x, s)?),
                    fmt_f64(eval.green_cosine(xi, x, s)?),
                ]);
            }
        }
    }
    Ok(table)
}

#[derive(Serialize)]
struct StationaryReport {
    tau: f64,
    mu: Vec<f64>,
    residual: f64,
    kappa: f64,
    monotone: chain::MonotoneVerdict,
}

fn chain_command(cmd: &ChainCommand, cfg: &Resolved) -> Result<(), CliError> {
    let out = cfg.output.as_deref();
    let tau = cfg.schedule.tau();
    match cmd {
        ChainCommand::Build => {
            let p = TransitionMatrix::build(&cfg.potential, tau)?;
            output::emit(out, &to_json(&Report::new(cfg, &p)))
        }
        ChainCommand::Stationary { taus } if taus.is_empty() => {
            let report = stationary_report(cfg, tau)?;
            output::emit(out, &to_json(&Report::new(cfg, &report)))
        }
        ChainCommand::Stationary { taus } => {
            let k = cfg.potential.k();
            let mut header = vec!["tau".to_string(), "kappa".into(), "min_gap".into()];
            header.extend((1..=k).map(|i| format!("mu_{i}")));
            header.extend((1..k).map(|i| format!("gap_{i}")));
            let mut table = Table::new(header);
            for &t in taus {
                let r = stationary_report(cfg, t)?;
                let mut row = vec![fmt_f64(t), fmt_f64(r.kappa), fmt_f64(r.monotone.min_gap)];
                row.extend(r.mu.iter().copied().map(fmt_f64));
                row.extend(r.monotone.gaps.iter().copied().map(fmt_f64));
                table.push(row);
            }
            emit_csv(cfg, &table)
        }
        ChainCommand::Certify => {
            let p = TransitionMatrix::build(&cfg.potential, tau)?;
            let cert = chain::certify_gap(&p);
            output::emit(out, &to_json(&Report::new(cfg, &cert)))?;
            match cert.verdict {
                CertificateVerdict::Failed => {
                    Err(CliError::Verification(cert.failure_reasons().join("; ")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn stationary_report(cfg: &Resolved, tau: f64) -> Result<StationaryReport, CliError> {
    let p = TransitionMatrix::build(&cfg.potential, tau)?;
    let mu = chain::stationary(&p)?;
    Ok(StationaryReport {
        tau,
        kappa: chain::kappa(&p)?,
        monotone: chain::verify_monotone(&mu, tau),
        residual: mu.residual,
        mu: mu.mu,
    })
}

#[derive(Serialize)]
struct PeriodicReport {
    converged: bool,
    cycles: usize,
    final_residual: f64,
    contraction: Option<f64>,
    well_masses: Option<Vec<f64>>,
    h2_norm: Option<f64>,
    trace: Vec<f64>,
    x: Vec<f64>,
    density: Vec<f64>,
}

fn pde_command(cmd: &PdeCommand, cfg: &Resolved) -> Result<(), CliError> {
    let out = cfg.output.as_deref();
    match cmd {
        PdeCommand::Simulate { cycles, initial } => {
            let rho0 = match initial {
                Initial::Uniform => DensityGrid::uniform(cfg.grid.n)?,
                Initial::Boltzmann => crate::fokker_planck::boltzmann_density(
                    &cfg.potential,
                    cfg.schedule.sigma(),
                    cfg.grid.n,
                )?,
            };
            let snaps = simulate(rho0.clone(), &cfg.potential, &cfg.schedule, &cfg.grid, *cycles)?;
            let mut table = Table::new(["cycle", "time", "boundary", "x", "rho"]);
            let centers: Vec<f64> = rho0.centers().collect();
            for snap in &snaps {
                let boundary = match snap.boundary {
                    PhaseBoundary::PeriodStart => "period_start",
                    PhaseBoundary::RatchetEnd => "ratchet_end",
                };
                for (x, v) in centers.iter().zip(snap.density.cells()) {
                    table.push(vec![
                        snap.cycle.to_string(),
                        fmt_f64(snap.time),
                        boundary.into(),
                        fmt_f64(*x),
                        fmt_f64(*v),
                    ]);
                }
            }
            emit_csv(cfg, &table)
        }
        PdeCommand::Periodic => {
            let x = DensityGrid::uniform(cfg.grid.n)?.centers().collect();
            match find_periodic(&cfg.potential, &cfg.schedule, &cfg.grid, &cfg.solver) {
                Ok(orbit) => {
                    let report = PeriodicReport {
                        converged: true,
                        cycles: orbit.cycles(),
                        final_residual: orbit.final_residual(),
                        contraction: orbit.contraction_estimate(),
                        well_masses: Some(measures::well_masses(&orbit.density, &cfg.potential)?.0),
                        h2_norm: Some(orbit.density.sobolev_h2_norm()?),
                        trace: orbit.trace.clone(),
                        x,
                        density: orbit.density.into_cells(),
                    };
                    output::emit(out, &to_json(&Report::new(cfg, &report)))
                }
                Err(RatchetError::NotConverged {
                    cycles,
                    last_residual,
                    trace,
                }) => {
                    let report = PeriodicReport {
                        converged: false,
                        cycles,
                        final_residual: last_residual,
                        contraction: None,
                        well_masses: None,
                        h2_norm: None,
                        trace,
                        x: Vec::new(),
                        density: Vec::new(),
                    };
                    output::emit(out, &to_json(&Report::new(cfg, &report)))?;
                    Err(CliError::Solver(RatchetError::NotConverged {
                        cycles,
                        last_residual,
                        trace: Vec::new(),
                    }))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn sweep_table(rows: &[measures::SweepRow], k: usize) -> Table {
    let mut header: Vec<String> = ["n", "t_tr", "tau", "sigma"].map(String::from).to_vec();
    header.extend((1..k).map(|i| format!("gap_{i}")));
    header.extend(
        ["distance", "kappa", "residual", "bound", "min_stationary_gap", "ratio", "h2", "cycles"]
            .map(String::from),
    );
    let mut table = Table::new(header);
    for r in rows {
        let a = &r.analysis;
        let mut row = vec![r.index.to_string(), fmt_f64(a.t_tr), fmt_f64(a.tau), fmt_f64(a.sigma)];
        row.extend(a.well_gaps.iter().copied().map(fmt_f64));
        let min_gap = a.stationary_gaps.iter().copied().fold(f64::INFINITY, f64::min);
        row.extend([
            fmt_f64(a.distance),
            fmt_f64(a.kappa),
            fmt_f64(a.chain_residual),
            fmt_f64(a.bound),
            fmt_f64(min_gap),
            fmt_f64(a.consistency_ratio),
            fmt_f64(a.h2_norm),
            a.cycles.to_string(),
        ]);
        table.push(row);
    }
    table
}
