use serde::Serialize;

use crate::chain::{self, euclidean_distance, gap_tolerance, TransitionMatrix};
use crate::error::{invalid, RatchetError, Result};
use crate::fokker_planck::{
    find_periodic, DensityGrid, GridSettings, PeriodicOrbit, RatchetPhase, RatchetSchedule,
    SolverSettings,
};
use crate::measures::{collapse, wasserstein1, well_masses};
use crate::potential::RatchetPotential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationPoint {
    pub t_tr: f64,
    /// `W₁(ρ(·, T_tr), Σ μ*_i δ_{a_i})` with `μ*` the well masses of `ρ₀`.
    pub distance: f64,
}

/// Runs the ratchet phase from `rho0` and records the Wasserstein distance
/// to the collapsed initial state at each requested (ascending) duration.
pub fn ratchet_localization_check(
    p: &RatchetPotential,
    sigma: f64,
    rho0: &DensityGrid,
    durations: &[f64],
    dt: Option<f64>,
) -> Result<Vec<LocalizationPoint>> {
    if durations.windows(2).any(|w| w[1] < w[0]) || durations.first().is_some_and(|&t| t < 0.0) {
        return Err(invalid("t_tr", "durations must be non-negative and ascending"));
    }
    let comb = collapse(rho0, p)?;
    let grid = GridSettings { n: rho0.len(), dt };
    let mut current = rho0.clone();
    let mut elapsed = 0.0;
    let mut trace = Vec::with_capacity(durations.len());
    for &t in durations {
        if t > elapsed {
            current = RatchetPhase::new(p, sigma, t - elapsed, &grid)?.apply(&current)?;
            elapsed = t;
        }
        trace.push(LocalizationPoint {
            t_tr: t,
            distance: wasserstein1(&current, &comb)?,
        });
    }
    Ok(trace)
}

/// Ordering of well masses from left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Strictly decreasing: net transport to the left.
    Decreasing,
    /// Strictly increasing: net transport to the right.
    Increasing,
    /// All gaps within the resolution threshold.
    Balanced,
    Mixed,
}

impl Direction {
    pub fn classify(gaps: &[f64], threshold: f64) -> Self {
        if gaps.iter().all(|g| g.abs() <= threshold) {
            Direction::Balanced
        } else if gaps.iter().all(|&g| g > threshold) {
            Direction::Decreasing
        } else if gaps.iter().all(|&g| g < -threshold) {
            Direction::Increasing
        } else {
            Direction::Mixed
        }
    }

    /// Direction predicted by where the minima sit inside their wells.
    pub fn expected_for(p: &RatchetPotential) -> Self {
        if p.is_symmetric() {
            Direction::Balanced
        } else if p.a() < 0.5 * p.period() {
            Direction::Decreasing
        } else {
            Direction::Increasing
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Decreasing => Direction::Increasing,
            Direction::Increasing => Direction::Decreasing,
            other => other,
        }
    }
}

/// Periodic orbit of the flashing ratchet set against its Markov chain.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitAnalysis {
    pub k: usize,
    pub a: f64,
    pub sigma: f64,
    pub t_tr: f64,
    pub tau: f64,
    /// `ρ̂^s`.
    pub well_masses: Vec<f64>,
    pub well_gaps: Vec<f64>,
    /// `μ^s` of `P(τ)`.
    pub stationary: Vec<f64>,
    pub stationary_gaps: Vec<f64>,
    pub kappa: f64,
    /// `|ρ̂^s − ρ̂^s P(τ)|`.
    pub chain_residual: f64,
    /// `|ρ̂^s − μ^s|`.
    pub distance: f64,
    /// `|ρ̂^s − ρ̂^s P(τ)| / κ(P(τ))`.
    pub bound: f64,
    /// `|μ^s P − μ^s|` for the computed stationary vector.
    pub stationary_residual: f64,
    /// The bound as it applies to the computed `μ^s`:
    /// `(r + |μ^s P − μ^s| + δ) / κ` where `δ` is the forward rounding error
    /// of the vector differences, widened by a few ulps for the SVD.
    pub certified_bound: f64,
    /// `distance ≤ certified_bound`.
    pub bound_holds: bool,
    /// `distance ≤ bound` with no allowance; can fail by rounding when the
    /// bound is an identity (k = 2).
    pub strict_bound_holds: bool,
    /// `|ρ̂^s − μ^s| / min_i (μ_i − μ_{i+1})`.
    pub consistency_ratio: f64,
    pub h2_norm: f64,
    pub cycles: usize,
    pub final_residual: f64,
    pub contraction: Option<f64>,
    /// Smallest gap magnitude treated as a real ordering.
    pub resolution: f64,
    pub direction: Direction,
}

pub fn analyze_orbit(
    p: &RatchetPotential,
    sched: &RatchetSchedule,
    orbit: &PeriodicOrbit,
    solver: &SolverSettings,
) -> Result<OrbitAnalysis> {
    let tau = sched.tau();
    let masses = well_masses(&orbit.density, p)?;
    let matrix = TransitionMatrix::build(p, tau)?;
    let mu = chain::stationary(&matrix)?;
    let kappa = chain::kappa(&matrix)?;
    let advanced = matrix.left_multiply(masses.as_slice());
    let chain_residual = euclidean_distance(masses.as_slice(), &advanced);
    let distance = euclidean_distance(masses.as_slice(), &mu.mu);
    let bound = chain_residual / kappa;
    // Forward rounding error of the two differences of O(1) vectors.
    let k = p.k() as f64;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let rounding = 4.0 * k * f64::EPSILON * (norm(masses.as_slice()) + norm(&mu.mu));
    let certified_bound =
        (chain_residual + mu.residual + rounding) / kappa * (1.0 + 16.0 * k * f64::EPSILON);
    let stationary_gaps = chain::consecutive_gaps(&mu.mu);
    let min_gap = stationary_gaps
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let well_gaps = masses.gaps();
    let resolution = (10.0 * solver.tol).max(gap_tolerance(p.k()));
    Ok(OrbitAnalysis {
        k: p.k(),
        a: p.a(),
        sigma: sched.sigma(),
        t_tr: sched.t_tr(),
        tau,
        direction: Direction::classify(&well_gaps, resolution),
        well_masses: masses.0,
        well_gaps,
        stationary: mu.mu,
        stationary_gaps,
        kappa,
        chain_residual,
        distance,
        bound,
        stationary_residual: mu.residual,
        certified_bound,
        bound_holds: distance <= certified_bound,
        strict_bound_holds: distance <= bound,
        consistency_ratio: distance / min_gap,
        h2_norm: orbit.density.sobolev_h2_norm()?,
        cycles: orbit.cycles(),
        final_residual: orbit.final_residual(),
        contraction: orbit.contraction_estimate(),
        resolution,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransportReport {
    pub expected: Direction,
    pub original: Option<OrbitAnalysis>,
    /// Same schedule with the reflected potential (`a → 1/k − a`).
    pub mirrored: Option<OrbitAnalysis>,
    pub ordering_holds: bool,
    pub bound_holds: bool,
    pub mirror_reversed: bool,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Finds the periodic orbits of `p` and of its mirror image and checks
/// (i) the predicted strict ordering of well masses, (ii) the κ bound on the
/// distance to the chain's stationary vector and (iii) that reflection
/// reverses the ordering. Failures are reported in the returned value.
pub fn verify_transport(
    p: &RatchetPotential,
    sched: &RatchetSchedule,
    grid: &GridSettings,
    solver: &SolverSettings,
) -> Result<TransportReport> {
    grid.validate(p.k())?;
    let expected = Direction::expected_for(p);
    let mirror = p.mirrored();
    let run = |pot: &RatchetPotential| -> Result<std::result::Result<OrbitAnalysis, String>> {
        match find_periodic(pot, sched, grid, solver) {
            Ok(orbit) => analyze_orbit(pot, sched, &orbit, solver).map(Ok),
            Err(RatchetError::NotConverged {
                cycles,
                last_residual,
                ..
            }) => Ok(Err(format!(
                "no periodic orbit for a = {} within {cycles} cycles (last residual {last_residual:e})",
                pot.a()
            ))),
            Err(e) => Err(e),
        }
    };
    let (original, mirrored) = if p.is_symmetric() {
        let r = run(p)?;
        (r.clone(), r)
    } else {
        let (o, m) = rayon::join(|| run(p), || run(&mirror));
        (o?, m?)
    };

    let mut failures = Vec::new();
    let original = original.map_err(|e| failures.push(e)).ok();
    let mirrored = mirrored.map_err(|e| failures.push(e)).ok();

    let ordering_holds = original.as_ref().is_some_and(|o| o.direction == expected);
    if let (Some(o), false) = (&original, ordering_holds) {
        failures.push(format!(
            "well masses {:?} are {:?}, expected {:?}",
            o.well_masses, o.direction, expected
        ));
    }
    let bound_holds = [&original, &mirrored]
        .iter()
        .all(|o| o.as_ref().is_some_and(|o| o.bound_holds));
    for o in [&original, &mirrored].into_iter().flatten() {
        if !o.bound_holds {
            failures.push(format!(
                "a = {}: |ρ̂ − μ| = {:e} exceeds (|ρ̂ − ρ̂P| + |μP − μ| + δ)/κ = {:e}",
                o.a, o.distance, o.certified_bound
            ));
        }
    }
    let mirror_reversed = mirrored
        .as_ref()
        .is_some_and(|m| m.direction == expected.reversed());
    if let (Some(m), false) = (&mirrored, mirror_reversed) {
        failures.push(format!(
            "mirrored potential gives {:?}, expected {:?}",
            m.direction,
            expected.reversed()
        ));
    }
    Ok(TransportReport {
        expected,
        passed: failures.is_empty(),
        original,
        mirrored,
        ordering_holds,
        bound_holds,
        mirror_reversed,
        failures,
    })
}
