//! The switched drift-diffusion problem and its periodic orbit.
//!
//! One period of length `T = T_tr + T_diff` consists of a ratchet phase
//! (potential on, solved by the exponentially fitted implicit scheme in
//! [`scheme`]) followed by a diffusion phase (potential off, propagated
//! exactly in the cosine basis with `s = τ = σ·T_diff`).

mod density;
pub mod scheme;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, RatchetError, Result};
use crate::kernel::SpectralPropagator;
use crate::potential::RatchetPotential;

pub use density::{DensityGrid, MASS_TOLERANCE, NEGATIVITY_TOLERANCE};
pub use scheme::{DriftDiffusionOperator, ImplicitEuler, Tridiagonal};

/// Switching protocol: potential on for `t_tr`, off for `t_diff`, repeated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleParams", into = "ScheduleParams")]
pub struct RatchetSchedule {
    sigma: f64,
    t_tr: f64,
    t_diff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleParams {
    pub sigma: f64,
    pub t_tr: f64,
    pub t_diff: f64,
}

impl Default for ScheduleParams {
    /// `σ = 0.05`, `T_tr = 4`, `τ = 0.5`.
    fn default() -> Self {
        Self {
            sigma: 0.05,
            t_tr: 4.0,
            t_diff: 10.0,
        }
    }
}

impl TryFrom<ScheduleParams> for RatchetSchedule {
    type Error = RatchetError;

    fn try_from(p: ScheduleParams) -> Result<Self> {
        RatchetSchedule::new(p.sigma, p.t_tr, p.t_diff)
    }
}

impl From<RatchetSchedule> for ScheduleParams {
    fn from(s: RatchetSchedule) -> Self {
        ScheduleParams {
            sigma: s.sigma,
            t_tr: s.t_tr,
            t_diff: s.t_diff,
        }
    }
}

impl RatchetSchedule {
    /// Either phase may be empty (the `h ≡ 0` and `h ≡ 1` limits), not both.
    pub fn new(sigma: f64, t_tr: f64, t_diff: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(t_tr >= 0.0 && t_tr.is_finite()) {
            return Err(invalid("t_tr", format!("must be non-negative, got {t_tr}")));
        }
        if !(t_diff >= 0.0 && t_diff.is_finite()) {
            return Err(invalid("t_diff", format!("must be non-negative, got {t_diff}")));
        }
        if t_tr + t_diff <= 0.0 {
            return Err(invalid("t_diff", "period T = t_tr + t_diff must be positive"));
        }
        Ok(Self { sigma, t_tr, t_diff })
    }

    /// Schedule with diffusion-phase length `τ / σ`.
    pub fn from_tau(sigma: f64, t_tr: f64, tau: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        Self::new(sigma, t_tr, tau / sigma)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t_tr(&self) -> f64 {
        self.t_tr
    }

    pub fn t_diff(&self) -> f64 {
        self.t_diff
    }

    pub fn period(&self) -> f64 {
        self.t_tr + self.t_diff
    }

    /// Nondimensional diffusion time `τ = σ·T_diff`.
    pub fn tau(&self) -> f64 {
        self.sigma * self.t_diff
    }

    /// Switching function: 1 on `(nT, nT + T_tr]`, 0 on `(nT + T_tr, (n+1)T]`.
    pub fn switch(&self, t: f64) -> f64 {
        let period = self.period();
        let cycle = (t / period).ceil() - 1.0;
        let phase = t - cycle * period;
        if phase <= self.t_tr {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    /// Number of cells.
    pub n: usize,
    /// Ratchet-phase time step; `None` selects [`default_time_step`].
    #[serde(default)]
    pub dt: Option<f64>,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { n: 1024, dt: None }
    }
}

impl GridSettings {
    pub fn with_cells(n: usize) -> Self {
        Self { n, dt: None }
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.n < 8 {
            return Err(RatchetError::GridTooSmall(self.n, 8));
        }
        if !self.n.is_multiple_of(k) {
            return Err(RatchetError::MisalignedGrid {
                cells: self.n,
                wells: k,
            });
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt", format!("must be positive, got {dt}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// L¹ tolerance on successive period-map iterates.
    pub tol: f64,
    pub max_cycles: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_cycles: 10_000,
        }
    }
}

/// `min(T_tr / 200, 10 h² / σ)`.
pub fn default_time_step(t_tr: f64, sigma: f64, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    (t_tr / 200.0).min(10.0 * h * h / sigma)
}

/// Potential sampled at the cell centres of an `n`-cell grid.
pub fn sample_potential(p: &RatchetPotential, n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (0..n).map(|i| p.psi_unchecked((i as f64 + 0.5) * h)).collect()
}

/// Discrete Boltzmann density `e^{−ψ/σ} / Z` at cell centres: the exact
/// steady state of the ratchet-phase scheme.
pub fn boltzmann_density(p: &RatchetPotential, sigma: f64, n: usize) -> Result<DensityGrid> {
    let psi = sample_potential(p, n);
    DensityGrid::normalized(psi.iter().map(|v| (-v / sigma).exp()).collect())
}

/// Cells spanning the region `ψ < σ` around one minimum.
fn cells_across_well_bottom(p: &RatchetPotential, sigma: f64, n: usize) -> usize {
    let per_tooth = (n / p.k()).max(1);
    sample_potential(p, n)
        .iter()
        .take(per_tooth)
        .filter(|&&v| v < sigma)
        .count()
}

/// Prepared ratchet phase: operator factored once, reused every period.
#[derive(Debug, Clone)]
pub struct RatchetPhase {
    stepper: ImplicitEuler,
    steps: usize,
    cells: usize,
}

impl RatchetPhase {
    pub fn new(
        p: &RatchetPotential,
        sigma: f64,
        t_tr: f64,
        grid: &GridSettings,
    ) -> Result<Self> {
        grid.validate(p.k())?;
        let psi = sample_potential(p, grid.n);
        let operator = DriftDiffusionOperator::new(sigma, &psi)?;
        let resolved = cells_across_well_bottom(p, sigma, grid.n);
        if resolved < 4 {
            log::warn!(
                "grid of {} cells puts only {resolved} cells inside each well bottom (ψ < σ = {sigma}); \
                 the equilibrium profile is under-resolved",
                grid.n
            );
        }
        Self::with_operator(operator, t_tr, grid.dt)
    }

    /// Ratchet phase for an arbitrary prepared operator (e.g. zero drift).
    pub fn with_operator(
        operator: DriftDiffusionOperator,
        duration: f64,
        dt: Option<f64>,
    ) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(RatchetError::NonPositiveTime(duration));
        }
        let cells = operator.cells();
        let dt = dt.unwrap_or_else(|| default_time_step(duration, operator.sigma(), cells));
        let steps = (duration / dt).ceil().max(1.0) as usize;
        let stepper = operator.implicit_euler(duration / steps as f64)?;
        Ok(Self {
            stepper,
            steps,
            cells,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.stepper.dt()
    }

    pub fn apply(&self, rho: &DensityGrid) -> Result<DensityGrid> {
        if rho.len() != self.cells {
            return Err(RatchetError::GridMismatch(rho.len(), self.cells));
        }
        // The scheme conserves mass exactly; only rounding accumulates over
        // many steps, and `run` has already checked it is within tolerance.
        DensityGrid::normalized(self.stepper.run(rho, self.steps)?.into_cells())
    }
}

/// Runs the potential-on phase for `t_tr` (zero `t_tr` is the identity).
pub fn ratchet_phase(
    rho: &DensityGrid,
    p: &RatchetPotential,
    sigma: f64,
    t_tr: f64,
    dt: Option<f64>,
) -> Result<DensityGrid> {
    if t_tr == 0.0 {
        return Ok(rho.clone());
    }
    let grid = GridSettings { n: rho.len(), dt };
    RatchetPhase::new(p, sigma, t_tr, &grid)?.apply(rho)
}

/// One full switching period, prepared for repeated application.
#[derive(Debug, Clone)]
pub struct PeriodMap {
    ratchet: Option<RatchetPhase>,
    diffusion: Option<SpectralPropagator>,
    cells: usize,
}

impl PeriodMap {
    pub fn new(p: &RatchetPotential, sched: &RatchetSchedule, grid: &GridSettings) -> Result<Self> {
        grid.validate(p.k())?;
        let ratchet = if sched.t_tr() > 0.0 {
            Some(RatchetPhase::new(p, sched.sigma(), sched.t_tr(), grid)?)
        } else {
            None
        };
        let tau = sched.tau();
        let diffusion = (tau > 0.0).then(|| SpectralPropagator::new(grid.n, tau));
        Ok(Self {
            ratchet,
            diffusion,
            cells: grid.n,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn ratchet(&self, rho: &DensityGrid) -> Result<DensityGrid> {
        match &self.ratchet {
            Some(phase) => phase.apply(rho),
            None => Ok(rho.clone()),
        }
    }

    pub fn diffuse(&self, rho: &DensityGrid) -> Result<DensityGrid> {
        match &self.diffusion {
            Some(prop) => prop.apply(rho),
            None => Ok(rho.clone()),
        }
    }

    pub fn apply(&self, rho: &DensityGrid) -> Result<DensityGrid> {
        if rho.len() != self.cells {
            return Err(RatchetError::GridMismatch(rho.len(), self.cells));
        }
        self.diffuse(&self.ratchet(rho)?)
    }
}

pub fn period_map(
    rho: &DensityGrid,
    p: &RatchetPotential,
    sched: &RatchetSchedule,
    dt: Option<f64>,
) -> Result<DensityGrid> {
    PeriodMap::new(p, sched, &GridSettings { n: rho.len(), dt })?.apply(rho)
}

/// Converged periodic orbit, sampled at the start of a period (`t = nT`).
#[derive(Debug, Clone)]
pub struct PeriodicOrbit {
    pub density: DensityGrid,
    /// L¹ distance between successive period-map iterates.
    pub trace: Vec<f64>,
}

impl PeriodicOrbit {
    pub fn cycles(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().copied().unwrap_or(0.0)
    }

    /// Contraction factor estimated from the last ratio of successive
    /// residuals that is not dominated by round-off.
    pub fn contraction_estimate(&self) -> Option<f64> {
        self.trace
            .windows(2)
            .rev()
            .find(|w| w[0] > 1e-13 && w[1] > 1e-13)
            .map(|w| w[1] / w[0])
    }
}

/// Fixed point of the period map, started from the uniform density.
pub fn find_periodic(
    p: &RatchetPotential,
    sched: &RatchetSchedule,
    grid: &GridSettings,
    solver: &SolverSettings,
) -> Result<PeriodicOrbit> {
    let map = PeriodMap::new(p, sched, grid)?;
    iterate_to_fixed_point(&map, DensityGrid::uniform(grid.n)?, solver)
}

pub fn find_periodic_from(
    initial: DensityGrid,
    p: &RatchetPotential,
    sched: &RatchetSchedule,
    grid: &GridSettings,
    solver: &SolverSettings,
) -> Result<PeriodicOrbit> {
    let map = PeriodMap::new(p, sched, grid)?;
    iterate_to_fixed_point(&map, initial, solver)
}

pub fn iterate_to_fixed_point(
    map: &PeriodMap,
    initial: DensityGrid,
    solver: &SolverSettings,
) -> Result<PeriodicOrbit> {
    if !(solver.tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {}", solver.tol)));
    }
    let mut current = initial;
    let mut trace = Vec::new();
    for _ in 0..solver.max_cycles {
        let next = map.apply(&current)?;
        let residual = next.l1_distance(&current)?;
        trace.push(residual);
        current = next;
        if residual <= solver.tol {
            return Ok(PeriodicOrbit {
                density: current,
                trace,
            });
        }
    }
    Err(RatchetError::NotConverged {
        cycles: solver.max_cycles,
        last_residual: trace.last().copied().unwrap_or(f64::NAN),
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseBoundary {
    /// `t = nT`, start of a ratchet phase.
    PeriodStart,
    /// `t = nT + T_tr`, potential switched off.
    RatchetEnd,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub cycle: usize,
    pub time: f64,
    pub boundary: PhaseBoundary,
    pub density: DensityGrid,
}

/// Runs `cycles` periods from `initial`, recording the density at every
/// phase boundary (including the initial state and the final period end).
pub fn simulate(
    initial: DensityGrid,
    p: &RatchetPotential,
    sched: &RatchetSchedule,
    grid: &GridSettings,
    cycles: usize,
) -> Result<Vec<Snapshot>> {
    let map = PeriodMap::new(p, sched, grid)?;
    let mut out = Vec::with_capacity(2 * cycles + 1);
    let mut current = initial;
    for cycle in 0..cycles {
        let start = cycle as f64 * sched.period();
        let after_ratchet = map.ratchet(&current)?;
        out.push(Snapshot {
            cycle,
            time: start,
            boundary: PhaseBoundary::PeriodStart,
            density: current,
        });
        current = map.diffuse(&after_ratchet)?;
        out.push(Snapshot {
            cycle,
            time: start + sched.t_tr(),
            boundary: PhaseBoundary::RatchetEnd,
            density: after_ratchet,
        });
    }
    out.push(Snapshot {
        cycle: cycles,
        time: cycles as f64 * sched.period(),
        boundary: PhaseBoundary::PeriodStart,
        density: current,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::diffuse;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn base() -> (RatchetPotential, RatchetSchedule) {
        (
            RatchetPotential::new(2, 0.2, 1.0).unwrap(),
            RatchetSchedule::from_tau(0.05, 4.0, 0.5).unwrap(),
        )
    }

    #[test]
    fn schedule_switching() {
        let s = RatchetSchedule::new(0.1, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(s.tau(), 0.2, epsilon = 1e-15);
        assert_eq!(s.switch(0.5), 1.0);
        assert_eq!(s.switch(1.0), 1.0);
        assert_eq!(s.switch(1.5), 0.0);
        assert_eq!(s.switch(3.0), 0.0);
        assert_eq!(s.switch(3.2), 1.0);
        assert_eq!(s.switch(4.0), 1.0);
        assert_eq!(s.switch(4.01), 0.0);
        assert!(RatchetSchedule::new(0.0, 1.0, 1.0).is_err());
        assert!(RatchetSchedule::new(0.1, -1.0, 1.0).is_err());
        assert!(RatchetSchedule::new(0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn schedule_json_validates() {
        let s: RatchetSchedule =
            serde_json::from_str(r#"{"sigma":0.05,"t_tr":4,"t_diff":10}"#).unwrap();
        assert_abs_diff_eq!(s.tau(), 0.5, epsilon = 1e-15);
        assert!(serde_json::from_str::<RatchetSchedule>(r#"{"sigma":-1,"t_tr":4,"t_diff":10}"#).is_err());
    }

    #[test]
    fn grid_must_align_with_wells() {
        let p = RatchetPotential::new(3, 0.1, 1.0).unwrap();
        let s = RatchetSchedule::new(0.1, 1.0, 1.0).unwrap();
        let err = PeriodMap::new(&p, &s, &GridSettings::with_cells(1024)).unwrap_err();
        assert_eq!(err, RatchetError::MisalignedGrid { cells: 1024, wells: 3 });
    }

    #[test]
    fn flat_drift_reduces_to_heat_flow() {
        let n = 256;
        let sigma = 0.1;
        let t = 0.5;
        let rho = DensityGrid::from_cosine_modes(n, &[1.0, 0.5, 0.2]).unwrap();
        let op = DriftDiffusionOperator::pure_diffusion(sigma, n).unwrap();
        let phase = RatchetPhase::with_operator(op, t, Some(1e-4)).unwrap();
        let stepped = phase.apply(&rho).unwrap();
        let exact = diffuse(&rho, sigma * t).unwrap();
        // O(Δt) + O(h²) agreement
        assert!(stepped.l1_distance(&exact).unwrap() < 1e-4);
    }

    #[test]
    fn boltzmann_density_is_stationary() {
        let (p, _) = base();
        let sigma = 0.05;
        let eq = boltzmann_density(&p, sigma, 512).unwrap();
        let out = ratchet_phase(&eq, &p, sigma, 2.0, None).unwrap();
        assert!(out.l1_distance(&eq).unwrap() < 1e-8);
    }

    #[test]
    fn trivial_schedules() {
        let (p, _) = base();
        let n = 256;
        let rho = DensityGrid::from_fn(n, |x| 1.0 + 0.8 * (3.0 * PI * x).cos()).unwrap();
        let no_ratchet = RatchetSchedule::from_tau(0.05, 0.0, 0.1).unwrap();
        let a = period_map(&rho, &p, &no_ratchet, None).unwrap();
        let b = diffuse(&rho, 0.1).unwrap();
        assert!(a.l1_distance(&b).unwrap() < 1e-15);

        let no_diffusion = RatchetSchedule::new(0.05, 1.0, 0.0).unwrap();
        let a = period_map(&rho, &p, &no_diffusion, None).unwrap();
        let b = ratchet_phase(&rho, &p, 0.05, 1.0, None).unwrap();
        assert!(a.l1_distance(&b).unwrap() < 1e-15);
    }

    #[test]
    fn pure_diffusion_fixed_point_is_uniform() {
        let (p, _) = base();
        let sched = RatchetSchedule::from_tau(0.05, 0.0, 0.5).unwrap();
        let orbit = find_periodic(&p, &sched, &GridSettings::with_cells(128), &SolverSettings::default())
            .unwrap();
        assert_eq!(orbit.cycles(), 1);
        let u = DensityGrid::uniform(128).unwrap();
        assert!(orbit.density.l1_distance(&u).unwrap() < 1e-14);
    }

    #[test]
    fn non_convergence_carries_trace() {
        let (p, sched) = base();
        let solver = SolverSettings {
            tol: 1e-14,
            max_cycles: 2,
        };
        match find_periodic(&p, &sched, &GridSettings::with_cells(64), &solver) {
            Err(RatchetError::NotConverged { cycles, trace, .. }) => {
                assert_eq!(cycles, 2);
                assert_eq!(trace.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn simulate_records_phase_boundaries() {
        let (p, sched) = base();
        let grid = GridSettings::with_cells(64);
        let snaps = simulate(DensityGrid::uniform(64).unwrap(), &p, &sched, &grid, 2).unwrap();
        assert_eq!(snaps.len(), 5);
        assert_eq!(snaps[1].boundary, PhaseBoundary::RatchetEnd);
        assert_abs_diff_eq!(snaps[1].time, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(snaps[4].time, 28.0, epsilon = 1e-12);
        for s in &snaps {
            assert_abs_diff_eq!(s.density.mass(), 1.0, epsilon = 1e-12);
        }
    }
}
