//! The discrete-ratchet Markov chain.
//!
//! Row `i` of `P(τ)` is the distribution over wells of a unit mass released
//! at the minimum `a_i` and left to diffuse for the nondimensional time `τ`:
//! `p_ij = ∫_{x_j}^{x_{j+1}} g(a_i, x, τ) dx`. Entries are evaluated through
//! the closed-form antiderivative of the Green function, so they carry no
//! quadrature error.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{invalid, RatchetError, Result};
use crate::kernel::KernelEval;
use crate::potential::RatchetPotential;

/// Row sums must equal one within this tolerance.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// Gaps at or below `10·ε·k` are indistinguishable from round-off.
pub fn gap_tolerance(k: usize) -> f64 {
    10.0 * f64::EPSILON * k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    k: usize,
    tau: f64,
    sites: Vec<f64>,
    /// Row-major `k × k` entries.
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// `P(τ)` for the minima of `p`.
    pub fn build(p: &RatchetPotential, tau: f64) -> Result<Self> {
        Self::from_sites(&p.minima(), tau)
    }

    /// `P(τ)` for unit masses released at arbitrary `sites`, one per well.
    pub fn from_sites(sites: &[f64], tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(RatchetError::NonPositiveTime(tau));
        }
        let k = sites.len();
        if k < 2 {
            return Err(invalid("k", format!("need at least 2 wells, got {k}")));
        }
        let kernel = KernelEval::default();
        let kf = k as f64;
        let mut entries = Vec::with_capacity(k * k);
        for &site in sites {
            let mut cdf = vec![0.0; k + 1];
            for (j, c) in cdf.iter_mut().enumerate() {
                *c = kernel.green_cdf(site, j as f64 / kf, tau)?;
            }
            entries.extend(cdf.windows(2).map(|w| w[1] - w[0]));
        }
        let m = Self {
            k,
            tau,
            sites: sites.to_vec(),
            entries,
        };
        m.check_ergodic()?;
        Ok(m)
    }

    /// Wraps an arbitrary row-stochastic matrix with positive entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        if k < 2 || rows.iter().any(|r| r.len() != k) {
            return Err(invalid("matrix", "must be square with at least 2 rows"));
        }
        let m = Self {
            k,
            tau: f64::NAN,
            sites: Vec::new(),
            entries: rows.into_iter().flatten().collect(),
        };
        m.check_ergodic()?;
        Ok(m)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Diffusion time `τ`; NaN for matrices built by [`Self::from_rows`].
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.k + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.k).map(<[f64]>::to_vec).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.k)
            .map(|j| (0..self.k).map(|i| self.get(i, j)).sum())
            .collect()
    }

    /// Row vector times matrix, `y P`.
    pub fn left_multiply(&self, y: &[f64]) -> Vec<f64> {
        (0..self.k)
            .map(|j| y.iter().enumerate().map(|(i, yi)| yi * self.get(i, j)).sum())
            .collect()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.k, self.k, &self.entries)
    }

    fn check_ergodic(&self) -> Result<()> {
        for (i, row) in self.entries.chunks(self.k).enumerate() {
            if let Some(j) = row.iter().position(|&v| !(v > 0.0)) {
                return Err(RatchetError::NotErgodic(format!(
                    "entry ({i}, {j}) = {} is not positive",
                    row[j]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(RatchetError::NotErgodic(format!(
                    "row {i} sums to {sum}"
                )));
            }
        }
        Ok(())
    }
}

pub fn build_p(p: &RatchetPotential, tau: f64) -> Result<TransitionMatrix> {
    TransitionMatrix::build(p, tau)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationaryVector {
    pub mu: Vec<f64>,
    /// Euclidean norm of `μP − μ`.
    pub residual: f64,
}

impl StationaryVector {
    fn new(mu: Vec<f64>, p: &TransitionMatrix) -> Self {
        let residual = euclidean_distance(&p.left_multiply(&mu), &mu);
        Self { mu, residual }
    }
}

/// Solves `(Pᵀ − I) μ = 0` with the last equation replaced by `Σ μ_i = 1`.
pub fn stationary(p: &TransitionMatrix) -> Result<StationaryVector> {
    let k = p.k();
    let mut a = p.to_matrix().transpose() - DMatrix::<f64>::identity(k, k);
    a.row_mut(k - 1).fill(1.0);
    let mut rhs = DVector::<f64>::zeros(k);
    rhs[k - 1] = 1.0;
    let mu = a.lu().solve(&rhs).ok_or(RatchetError::Singular)?;
    Ok(StationaryVector::new(mu.iter().copied().collect(), p))
}

/// Power iteration `μ ← μP` from the uniform vector until successive
/// iterates differ by at most `tol` in the max norm.
pub fn stationary_power(
    p: &TransitionMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryVector> {
    let k = p.k();
    let mut mu = vec![1.0 / k as f64; k];
    for _ in 0..max_iter {
        let next = p.left_multiply(&mu);
        let change = next
            .iter()
            .zip(&mu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let total: f64 = next.iter().sum();
        mu = next.into_iter().map(|v| v / total).collect();
        if change <= tol {
            return Ok(StationaryVector::new(mu, p));
        }
    }
    Err(RatchetError::NotConverged {
        cycles: max_iter,
        last_residual: euclidean_distance(&p.left_multiply(&mu), &mu),
        trace: Vec::new(),
    })
}

/// Orthonormal basis (as columns) of the zero-sum subspace of `R^k`:
/// normalized Helmert contrasts.
pub fn zero_sum_basis(k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k - 1, |row, col| {
        let m = (col + 1) as f64;
        let norm = (m * (m + 1.0)).sqrt();
        match row.cmp(&(col + 1)) {
            std::cmp::Ordering::Less => 1.0 / norm,
            std::cmp::Ordering::Equal => -m / norm,
            std::cmp::Ordering::Greater => 0.0,
        }
    })
}

/// `κ(P) = min |yP − y|` over zero-sum unit vectors `y`: the smallest
/// singular value of `Qᵀ(P − I)Q` for an orthonormal zero-sum basis `Q`.
pub fn kappa(p: &TransitionMatrix) -> Result<f64> {
    let k = p.k();
    let q = zero_sum_basis(k);
    let shifted = p.to_matrix() - DMatrix::<f64>::identity(k, k);
    let restricted = q.transpose() * shifted * &q;
    let svd = restricted.svd(false, false);
    svd.singular_values
        .iter()
        .copied()
        .reduce(f64::min)
        .ok_or(RatchetError::Singular)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateVerdict {
    /// Both structural hypotheses hold with a positive column-sum gap.
    Certified,
    /// Column sums are equal to round-off: no preferred direction.
    Symmetric,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingViolation {
    pub row: usize,
    pub column: usize,
    /// `p_{i,j} − p_{i,j+1}`; should be ≥ 0 above the crossing row, ≤ 0 below.
    pub difference: f64,
}

/// Checkable form of the column-monotonicity criterion that forces a
/// monotone stationary vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCertificate {
    pub k: usize,
    pub tau: f64,
    /// Crossing row `s = ⌊(k+1)/2⌋` (1-based), the same for every column.
    pub crossing_row: usize,
    pub crossing_violations: Vec<CrossingViolation>,
    pub column_sums: Vec<f64>,
    /// `Ā_j − Ā_{j+1}` for `j = 1..k-1`.
    pub column_gaps: Vec<f64>,
    /// Measured gap `d = min_j (Ā_j − Ā_{j+1})`.
    pub gap: f64,
    /// `C (2/k − 4a) e^{−π²τ} / k` with `C = π sin(πa)`; NaN without a potential.
    pub predicted_gap: f64,
    /// Minimum of the last column.
    pub last_column_min: f64,
    /// `M − 1/k`.
    pub last_column_deviation: f64,
    pub crossing_holds: bool,
    pub gap_holds: bool,
    pub verdict: CertificateVerdict,
}

impl GapCertificate {
    pub fn passes(&self) -> bool {
        self.verdict == CertificateVerdict::Certified
    }

    /// Guaranteed lower bound `M·d` on every consecutive stationary gap.
    pub fn stationary_gap_bound(&self) -> f64 {
        self.last_column_min * self.gap
    }

    pub fn failure_reasons(&self) -> Vec<String> {
        let mut reasons = Vec::new();
        for v in &self.crossing_violations {
            reasons.push(format!(
                "row {} breaks monotonicity between columns {} and {} (difference {:e})",
                v.row + 1,
                v.column + 1,
                v.column + 2,
                v.difference
            ));
        }
        if !self.gap_holds && self.verdict == CertificateVerdict::Failed {
            reasons.push(format!("column sums are not strictly decreasing (min gap {:e})", self.gap));
        }
        reasons
    }
}

pub fn certify_gap(p: &TransitionMatrix) -> GapCertificate {
    let k = p.k();
    let s = k.div_ceil(2);
    let mut crossing_violations = Vec::new();
    for j in 0..k - 1 {
        for i in 0..k {
            let row = i + 1;
            let difference = p.get(i, j) - p.get(i, j + 1);
            let bad = (row < s && difference < 0.0) || (row > s && difference > 0.0);
            if bad {
                crossing_violations.push(CrossingViolation {
                    row: i,
                    column: j,
                    difference,
                });
            }
        }
    }
    let column_sums = p.column_sums();
    let column_gaps: Vec<f64> = column_sums.windows(2).map(|w| w[0] - w[1]).collect();
    let gap = column_gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = gap_tolerance(k);
    let crossing_holds = crossing_violations.is_empty();
    let gap_holds = gap > tol;
    let symmetric = column_gaps.iter().all(|g| g.abs() <= tol);
    let verdict = if crossing_holds && gap_holds {
        CertificateVerdict::Certified
    } else if symmetric {
        CertificateVerdict::Symmetric
    } else {
        CertificateVerdict::Failed
    };
    let last_column_min = (0..k).map(|i| p.get(i, k - 1)).fold(f64::INFINITY, f64::min);
    let predicted_gap = predicted_column_gap(p);
    GapCertificate {
        k,
        tau: p.tau(),
        crossing_row: s,
        crossing_violations,
        column_sums,
        column_gaps,
        gap,
        predicted_gap,
        last_column_min,
        last_column_deviation: last_column_min - 1.0 / k as f64,
        crossing_holds,
        gap_holds,
        verdict,
    }
}

/// Leading-order column-sum gap for equally spaced sites `a + (i-1)/k`.
fn predicted_column_gap(p: &TransitionMatrix) -> f64 {
    use std::f64::consts::PI;
    let Some(&a) = p.sites().first() else {
        return f64::NAN;
    };
    let k = p.k() as f64;
    let c = PI * (PI * a).sin();
    c * (2.0 / k - 4.0 * a) * (-PI * PI * p.tau()).exp() / k
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneVerdict {
    /// `μ_i − μ_{i+1}`.
    pub gaps: Vec<f64>,
    pub min_gap: f64,
    /// `min gap · e^{π²τ}`: empirical constant of the exponential gap law.
    pub scaled_min_gap: f64,
    pub decreasing: bool,
}

pub fn verify_monotone(mu: &StationaryVector, tau: f64) -> MonotoneVerdict {
    let gaps = consecutive_gaps(&mu.mu);
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = gap_tolerance(mu.mu.len());
    MonotoneVerdict {
        scaled_min_gap: min_gap * (std::f64::consts::PI.powi(2) * tau).exp(),
        decreasing: gaps.iter().all(|&g| g > tol),
        min_gap,
        gaps,
    }
}

pub fn consecutive_gaps(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[0] - w[1]).collect()
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}
