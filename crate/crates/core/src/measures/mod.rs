//! Well masses, the discrete ratchet, and the checks that tie the
//! continuous flashing ratchet to its Markov chain.

mod sweep;
mod transport;
mod wasserstein;

use serde::Serialize;

use crate::chain::TransitionMatrix;
use crate::error::{invalid, RatchetError, Result};
use crate::fokker_planck::DensityGrid;
use crate::potential::RatchetPotential;

pub use sweep::{sweep, SweepLadder, SweepRow};
pub use transport::{
    analyze_orbit, ratchet_localization_check, verify_transport, Direction, LocalizationPoint,
    OrbitAnalysis, TransportReport,
};
pub use wasserstein::{wasserstein1, UnitIntervalMeasure};

/// Probability carried by each well `[x_i, x_{i+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WellMasses(pub Vec<f64>);

impl WellMasses {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `ρ̂_i − ρ̂_{i+1}`.
    pub fn gaps(&self) -> Vec<f64> {
        crate::chain::consecutive_gaps(&self.0)
    }
}

/// Point masses `Σ w_i δ_{p_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiracComb {
    weights: Vec<f64>,
    positions: Vec<f64>,
}

impl DiracComb {
    pub fn new(weights: Vec<f64>, positions: Vec<f64>) -> Result<Self> {
        if weights.len() != positions.len() || weights.is_empty() {
            return Err(invalid("comb", "weights and positions must have equal, nonzero length"));
        }
        if let Some(&x) = positions.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(RatchetError::OutOfDomain(x));
        }
        if let Some((i, &w)) = weights.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(RatchetError::Negativity { cell: i, value: w });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(RatchetError::Unnormalized(total));
        }
        Ok(Self { weights, positions })
    }

    /// Skips validation; for constructing deliberately invalid inputs.
    #[cfg(test)]
    pub(crate) fn from_raw(weights: Vec<f64>, positions: Vec<f64>) -> Self {
        Self { weights, positions }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.positions.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Exact per-well sums of cell masses. The grid must split evenly into wells.
pub fn well_masses(rho: &DensityGrid, p: &RatchetPotential) -> Result<WellMasses> {
    let (n, k) = (rho.len(), p.k());
    if n % k != 0 {
        return Err(RatchetError::MisalignedGrid { cells: n, wells: k });
    }
    let h = rho.cell_width();
    Ok(WellMasses(
        rho.cells()
            .chunks(n / k)
            .map(|well| well.iter().sum::<f64>() * h)
            .collect(),
    ))
}

/// Concentrates each well's mass at that well's minimum.
pub fn collapse(rho: &DensityGrid, p: &RatchetPotential) -> Result<DiracComb> {
    let masses = well_masses(rho, p)?;
    DiracComb::new(masses.0, p.minima())
}

/// Diffuses every atom for time `τ` and records the mass landing in each of
/// the `k` equal wells: `μ* P(τ)` for the comb's own sites.
pub fn discrete_ratchet_step(comb: &DiracComb, tau: f64) -> Result<WellMasses> {
    let matrix = TransitionMatrix::from_sites(comb.positions(), tau)?;
    Ok(WellMasses(matrix.left_multiply(comb.weights())))
}
