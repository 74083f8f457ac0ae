use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fokker_planck::{find_periodic, GridSettings, RatchetSchedule, SolverSettings};
use crate::measures::{analyze_orbit, OrbitAnalysis};
use crate::potential::RatchetPotential;

/// Geometric parameter ladder `T_tr,n = t_tr0·t_tr_ratio^n`,
/// `τ_n = tau0 + tau_step·n`, `σ_n = sigma0·sigma_ratio^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepLadder {
    pub t_tr0: f64,
    pub t_tr_ratio: f64,
    pub tau0: f64,
    pub tau_step: f64,
    pub sigma0: f64,
    pub sigma_ratio: f64,
    pub points: usize,
}

impl Default for SweepLadder {
    fn default() -> Self {
        Self {
            t_tr0: 2.0,
            t_tr_ratio: 1.5,
            tau0: 0.3,
            tau_step: 0.1,
            sigma0: 0.1,
            sigma_ratio: 0.7,
            points: 7,
        }
    }
}

impl SweepLadder {
    pub fn schedule(&self, n: usize) -> Result<RatchetSchedule> {
        let step = n as i32;
        RatchetSchedule::from_tau(
            self.sigma0 * self.sigma_ratio.powi(step),
            self.t_tr0 * self.t_tr_ratio.powi(step),
            self.tau0 + self.tau_step * n as f64,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(invalid("sweep.points", "must be at least 1"));
        }
        for n in 0..self.points {
            let s = self.schedule(n)?;
            if s.tau() <= 0.0 {
                return Err(invalid("sweep.tau0", format!("τ_{n} = {} is not positive", s.tau())));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub index: usize,
    #[serde(flatten)]
    pub analysis: OrbitAnalysis,
}

/// Periodic orbits along the ladder. Points run on the current rayon pool;
/// rows come back in ladder order.
pub fn sweep(
    p: &RatchetPotential,
    ladder: &SweepLadder,
    grid: &GridSettings,
    solver: &SolverSettings,
) -> Result<Vec<SweepRow>> {
    ladder.validate()?;
    grid.validate(p.k())?;
    let mut rows: Vec<SweepRow> = (0..ladder.points)
        .into_par_iter()
        .map(|index| {
            let sched = ladder.schedule(index)?;
            let orbit = find_periodic(p, &sched, grid, solver)?;
            Ok(SweepRow {
                index,
                analysis: analyze_orbit(p, &sched, &orbit, solver)?,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.index);
    Ok(rows)
}
