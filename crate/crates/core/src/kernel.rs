//! Heat kernels on the unit interval with reflecting (Neumann) ends.
//!
//! `Γ_s(x) = exp(-x²/4s) / (2√(πs))` is the free-space kernel of `y_s = y_xx`.
//! Its 2-periodic image sum `G(x, s) = Σ_n Γ_s(x + 2n)` equals the cosine
//! series `1/2 + Σ_{n≥1} cos(nπx) e^{-n²π²s}`, and the Neumann Green function
//! is `g(ξ, x, s) = G(x + ξ, s) + G(x − ξ, s)`. Short times are evaluated
//! through the images, long times through the cosine series; both converge
//! geometrically in their own regime.

use std::f64::consts::PI;

use crate::error::{RatchetError, Result};
use crate::fokker_planck::DensityGrid;

const MAX_TERMS: usize = 1 << 20;

/// Modes whose decay factor falls below this are dropped by [`KernelEval::diffuse`].
const DIFFUSE_MODE_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    /// Absolute bound on the truncated tail of every series.
    pub tolerance: f64,
    /// Times below this use the image sum, times at or above the cosine series.
    pub switch_time: f64,
}

impl Default for KernelEval {
    fn default() -> Self {
        Self {
            tolerance: 1e-14,
            switch_time: 1.0 / PI,
        }
    }
}

impl KernelEval {
    pub fn gamma(&self, x: f64, s: f64) -> Result<f64> {
        positive_time(s)?;
        Ok(gamma_unchecked(x, s))
    }

    /// `G(x, s)` with the representation chosen by `switch_time`.
    pub fn periodic(&self, x: f64, s: f64) -> Result<f64> {
        positive_time(s)?;
        Ok(if s < self.switch_time {
            self.periodic_images_unchecked(x, s)
        } else {
            self.periodic_cosine_unchecked(x, s)
        })
    }

    pub fn periodic_images(&self, x: f64, s: f64) -> Result<f64> {
        positive_time(s)?;
        Ok(self.periodic_images_unchecked(x, s))
    }

    pub fn periodic_cosine(&self, x: f64, s: f64) -> Result<f64> {
        positive_time(s)?;
        Ok(self.periodic_cosine_unchecked(x, s))
    }

    pub fn green(&self, xi: f64, x: f64, s: f64) -> Result<f64> {
        check_pair(xi, x, s)?;
        Ok(if s < self.switch_time {
            self.green_images_unchecked(xi, x, s)
        } else {
            self.green_cosine_unchecked(xi, x, s)
        })
    }

    pub fn green_images(&self, xi: f64, x: f64, s: f64) -> Result<f64> {
        check_pair(xi, x, s)?;
        Ok(self.green_images_unchecked(xi, x, s))
    }

    /// `1 + 2 Σ cos(nπξ) cos(nπx) e^{-n²π²s}`.
    pub fn green_cosine(&self, xi: f64, x: f64, s: f64) -> Result<f64> {
        check_pair(xi, x, s)?;
        Ok(self.green_cosine_unchecked(xi, x, s))
    }

    /// `∫_0^x g(ξ, y, s) dy = x + 2 Σ cos(nπξ) sin(nπx) e^{-n²π²s} / (nπ)`.
    pub fn green_cdf(&self, xi: f64, x: f64, s: f64) -> Result<f64> {
        check_pair(xi, x, s)?;
        Ok(self.green_cdf_unchecked(xi, x, s))
    }

    /// Propagates `rho` by the Neumann heat flow for time `s`.
    ///
    /// Works on the cosine mirror of the grid: coefficient `n` is scaled by
    /// `e^{-n²π²s}`. The constant mode, hence the mass, is untouched.
    pub fn diffuse(&self, rho: &DensityGrid, s: f64) -> Result<DensityGrid> {
        if s < 0.0 || s.is_nan() {
            return Err(RatchetError::NegativeTime(s));
        }
        if s == 0.0 {
            return Ok(rho.clone());
        }
        SpectralPropagator::new(rho.len(), s).apply(rho)
    }

    pub(crate) fn periodic_images_unchecked(&self, x: f64, s: f64) -> f64 {
        // Fold into [-1, 1]; the images then sit at distance ≥ 2n - 1.
        let x = x - 2.0 * (0.5 * x).round();
        let ratio = (-2.0 / s).exp();
        let mut sum = gamma_unchecked(x, s);
        for n in 1..MAX_TERMS {
            let shift = 2.0 * n as f64;
            sum += gamma_unchecked(x + shift, s) + gamma_unchecked(x - shift, s);
            let tail = 2.0 * gamma_unchecked(shift + 1.0, s) / (1.0 - ratio);
            if tail < self.tolerance {
                break;
            }
        }
        sum
    }

    pub(crate) fn periodic_cosine_unchecked(&self, x: f64, s: f64) -> f64 {
        let mut sum = 0.5;
        for n in 1..MAX_TERMS {
            let nf = n as f64;
            sum += (nf * PI * x).cos() * decay(nf, s);
            if cosine_tail(n + 1, s) < self.tolerance {
                break;
            }
        }
        sum
    }

    pub(crate) fn green_images_unchecked(&self, xi: f64, x: f64, s: f64) -> f64 {
        self.periodic_images_unchecked(x + xi, s) + self.periodic_images_unchecked(x - xi, s)
    }

    pub(crate) fn green_cosine_unchecked(&self, xi: f64, x: f64, s: f64) -> f64 {
        let mut sum = 1.0;
        for n in 1..MAX_TERMS {
            let nf = n as f64;
            sum += 2.0 * (nf * PI * xi).cos() * (nf * PI * x).cos() * decay(nf, s);
            if 2.0 * cosine_tail(n + 1, s) < self.tolerance {
                break;
            }
        }
        sum
    }

    pub(crate) fn green_cdf_unchecked(&self, xi: f64, x: f64, s: f64) -> f64 {
        let mut sum = x;
        for n in 1..MAX_TERMS {
            let nf = n as f64;
            sum += 2.0 * (nf * PI * xi).cos() * (nf * PI * x).sin() * decay(nf, s) / (nf * PI);
            if 2.0 * cosine_tail(n + 1, s) / ((n + 1) as f64 * PI) < self.tolerance {
                break;
            }
        }
        sum
    }
}

/// Exact Neumann heat propagation of cell-averaged grids for a fixed time.
///
/// The surviving cosine modes are tabulated once so that repeated
/// application (e.g. inside a period map) costs `O(N·M)`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    cells: usize,
    /// `cos(nπ x_i)` for the retained modes `n ≥ 1`, row-major by mode.
    table: Vec<f64>,
    /// `e^{-n²π²s}` for the retained modes `n ≥ 1`.
    factors: Vec<f64>,
}

impl SpectralPropagator {
    pub fn new(cells: usize, s: f64) -> Self {
        let h = 1.0 / cells as f64;
        let factors: Vec<f64> = (1..cells)
            .map(|n| decay(n as f64, s))
            .take_while(|&f| f >= DIFFUSE_MODE_FLOOR)
            .collect();
        let mut table = Vec::with_capacity(factors.len() * cells);
        for n in 1..=factors.len() {
            table.extend((0..cells).map(|i| (n as f64 * PI * (i as f64 + 0.5) * h).cos()));
        }
        Self {
            cells,
            table,
            factors,
        }
    }

    pub fn retained_modes(&self) -> usize {
        self.factors.len()
    }

    pub fn apply(&self, rho: &DensityGrid) -> Result<DensityGrid> {
        if rho.len() != self.cells {
            return Err(RatchetError::GridMismatch(rho.len(), self.cells));
        }
        let n = self.cells;
        let values = rho.cells();
        let mean = rho.mass();
        let mut out = vec![mean; n];
        for (row, &factor) in self.table.chunks_exact(n).zip(&self.factors) {
            let projection: f64 = row.iter().zip(values).map(|(c, r)| c * r).sum();
            let weight = 2.0 * projection / n as f64 * factor;
            out.iter_mut().zip(row).for_each(|(o, c)| *o += weight * c);
        }
        DensityGrid::repaired(out)
    }
}

pub fn gamma(x: f64, s: f64) -> Result<f64> {
    KernelEval::default().gamma(x, s)
}

pub fn periodic_kernel(x: f64, s: f64) -> Result<f64> {
    KernelEval::default().periodic(x, s)
}

pub fn green(xi: f64, x: f64, s: f64) -> Result<f64> {
    KernelEval::default().green(xi, x, s)
}

pub fn green_cdf(xi: f64, x: f64, s: f64) -> Result<f64> {
    KernelEval::default().green_cdf(xi, x, s)
}

pub fn diffuse(rho: &DensityGrid, s: f64) -> Result<DensityGrid> {
    KernelEval::default().diffuse(rho, s)
}

fn gamma_unchecked(x: f64, s: f64) -> f64 {
    (-x * x / (4.0 * s)).exp() / (2.0 * (PI * s).sqrt())
}

fn decay(n: f64, s: f64) -> f64 {
    (-n * n * PI * PI * s).exp()
}

/// Bound on `Σ_{m≥n} e^{-m²π²s}`.
fn cosine_tail(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    decay(nf, s) / (1.0 - (-(2.0 * nf + 1.0) * PI * PI * s).exp())
}

fn positive_time(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(RatchetError::NonPositiveTime(s))
    }
}

fn check_pair(xi: f64, x: f64, s: f64) -> Result<()> {
    positive_time(s)?;
    for v in [xi, x] {
        if !(0.0..=1.0).contains(&v) {
            return Err(RatchetError::OutOfDomain(v));
        }
    }
    Ok(())
}
