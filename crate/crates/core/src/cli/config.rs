use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::cli::CliError;
use crate::error::RatchetError;
use crate::fokker_planck::{GridSettings, RatchetSchedule, ScheduleParams, SolverSettings};
use crate::measures::SweepLadder;
use crate::potential::{PotentialParams, RatchetPotential};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Where the artifact goes; stdout when absent.
    pub path: Option<PathBuf>,
}

/// Everything a run needs, as read from JSON. Every section is optional and
/// falls back to the `k = 2, a = 0.2, σ = 0.05, T_tr = 4, τ = 0.5` defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub potential: PotentialParams,
    pub schedule: ScheduleParams,
    pub grid: GridSettings,
    pub solver: SolverSettings,
    pub sweep: SweepLadder,
    pub output: OutputConfig,
}

/// Flag overrides; anything given here wins over the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Number of wells.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Position of the first minimum, in (0, 1/k).
    #[arg(long, global = true)]
    pub a: Option<f64>,
    /// Potential amplitude.
    #[arg(long = "v0", global = true)]
    pub v0: Option<f64>,
    /// Noise strength
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Ratchet-phase duration.
    #[arg(long = "t-tr", global = true)]
    pub t_tr: Option<f64>,
    /// Diffusion-phase duration.
    #[arg(long = "t-diff", global = true, conflicts_with = "tau")]
    pub t_diff: Option<f64>,
    /// Nondimensional diffusion time σ·T_diff; sets t_diff = tau / sigma.
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Grid cells; must be a multiple of k.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Ratchet-phase time step (default min(T_tr/200, 10h²/σ))
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// L¹ tolerance between successive periods
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Period-map iterations before giving up
    #[arg(long = "max-cycles", global = true)]
    pub max_cycles: Option<usize>,
    /// Output file (default stdout).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub potential: RatchetPotential,
    pub schedule: RatchetSchedule,
    pub grid: GridSettings,
    pub solver: SolverSettings,
    pub sweep: SweepLadder,
    pub output: Option<PathBuf>,
    /// The config that produced these values, for echoing into reports.
    pub effective: ExperimentConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        if let Some(k) = o.k {
            self.potential.k = k;
        }
        set(&mut self.potential.a, o.a);
        set(&mut self.potential.v0, o.v0);
        set(&mut self.schedule.sigma, o.sigma);
        set(&mut self.schedule.t_tr, o.t_tr);
        set(&mut self.schedule.t_diff, o.t_diff);
        if let Some(tau) = o.tau {
            self.schedule.t_diff = tau / self.schedule.sigma;
        }
        if let Some(n) = o.n {
            self.grid.n = n;
        }
        if o.dt.is_some() {
            self.grid.dt = o.dt;
        }
        set(&mut self.solver.tol, o.tol);
        if let Some(m) = o.max_cycles {
            self.solver.max_cycles = m;
        }
        if o.output.is_some() {
            self.output.path = o.output.clone();
        }
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        self.resolve_with(true)
    }

    /// As [`resolve`](Self::resolve); commands that never touch the grid
    /// pass `check_grid = false` so `n` need not split into `k` wells.
    pub fn resolve_with(self, check_grid: bool) -> Result<Resolved, CliError> {
        let potential = RatchetPotential::try_from(self.potential).map_err(in_section("potential"))?;
        let schedule = RatchetSchedule::try_from(self.schedule).map_err(in_section("schedule"))?;
        if check_grid {
            self.grid
                .validate(potential.k())
                .map_err(in_section("grid"))?;
        }
        if !(self.solver.tol > 0.0 && self.solver.tol.is_finite()) {
            return Err(CliError::field(
                "solver.tol",
                format!("must be positive, got {}", self.solver.tol),
            ));
        }
        if self.solver.max_cycles == 0 {
            return Err(CliError::field("solver.max_cycles", "must be at least 1"));
        }
        self.sweep.validate().map_err(in_section("sweep"))?;
        Ok(Resolved {
            potential,
            schedule,
            grid: self.grid,
            solver: self.solver,
            sweep: self.sweep,
            output: self.output.path.clone(),
            effective: self,
        })
    }
}

/// Rewrites a library validation error as a dotted config field.
fn in_section(section: &'static str) -> impl Fn(RatchetError) -> CliError {
    move |e| match e {
        RatchetError::InvalidParameter { field, reason } => {
            CliError::field(&format!("{section}.{field}"), reason)
        }
        RatchetError::MisalignedGrid { .. } => CliError::field("grid.n", e.to_string()),
        RatchetError::GridTooSmall(..) => CliError::field("grid.n", e.to_string()),
        other => CliError::field(section, other.to_string()),
    }
}

/// Config file (if any) with flag overrides applied, then validated.
pub fn resolve(o: &Overrides, check_grid: bool) -> Result<Resolved, CliError> {
    let mut cfg = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(o);
    cfg.resolve_with(check_grid)
}
