//! Cell-averaged probability densities on a uniform partition of `[0, 1]`.
//!
//! The spectral mirror of a grid is its discrete cosine (DCT-II) expansion:
//! cell averages `ρ_i` are written as the exact cell averages of a
//! band-limited Neumann series `Σ_{n<N} c_n cos(nπx)`, so cell and spectral
//! views convert into each other without loss.

use std::f64::consts::PI;

use crate::error::{invalid, RatchetError, Result};

/// Total-mass tolerance accepted by [`DensityGrid::new`].
pub const MASS_TOLERANCE: f64 = 1e-10;

/// Negative cell averages above this threshold are treated as round-off.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    cells: Vec<f64>,
}

impl DensityGrid {
    /// Wraps cell averages that already form a probability density.
    pub fn new(cells: Vec<f64>) -> Result<Self> {
        if cells.len() < 2 {
            return Err(RatchetError::GridTooSmall(cells.len(), 2));
        }
        if let Some((i, &v)) = cells.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(invalid("density", format!("cell {i} is not finite ({v})")));
        }
        let grid = Self { cells };
        grid.check_nonnegative()?;
        let mass = grid.mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(RatchetError::Unnormalized(mass));
        }
        Ok(grid)
    }

    /// Rescales nonnegative cell values to unit mass.
    pub fn normalized(mut cells: Vec<f64>) -> Result<Self> {
        if cells.len() < 2 {
            return Err(RatchetError::GridTooSmall(cells.len(), 2));
        }
        if let Some((i, &v)) = cells
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(RatchetError::Negativity { cell: i, value: v });
        }
        let mass: f64 = cells.iter().sum::<f64>() / cells.len() as f64;
        if mass <= 0.0 {
            return Err(RatchetError::Unnormalized(mass));
        }
        cells.iter_mut().for_each(|c| *c /= mass);
        Ok(Self { cells })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    /// Cell averages of `f` (5-point Gauss-Legendre per cell), normalized.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        const NODES: [f64; 5] = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.236_926_885_056_189_1,
            0.478_628_670_499_366_5,
            128.0 / 225.0,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
        ];
        if n < 2 {
            return Err(RatchetError::GridTooSmall(n, 2));
        }
        let h = 1.0 / n as f64;
        let cells = (0..n)
            .map(|i| {
                let mid = (i as f64 + 0.5) * h;
                NODES
                    .iter()
                    .zip(WEIGHTS)
                    .map(|(&t, w)| w * f(mid + 0.5 * h * t))
                    .sum::<f64>()
                    * 0.5
            })
            .collect();
        Self::normalized(cells)
    }

    /// Exact cell averages of `Σ c_n cos(nπx)`; `coeffs[0]` must be the mass.
    pub fn from_cosine_modes(n: usize, coeffs: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(RatchetError::GridTooSmall(n, 2));
        }
        let h = 1.0 / n as f64;
        let cells = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, &c)| c * cell_average_factor(m, h) * (m as f64 * PI * x).cos())
                    .sum()
            })
            .collect();
        Self::new(cells)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<f64> {
        self.cells
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.cells.len() as f64
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.cell_width();
        (0..self.cells.len()).map(move |i| (i as f64 + 0.5) * h)
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() / self.cells.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn l1_distance(&self, other: &DensityGrid) -> Result<f64> {
        if self.len() != other.len() {
            return Err(RatchetError::GridMismatch(self.len(), other.len()));
        }
        Ok(self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.cell_width())
    }

    /// First `m` coefficients of the band-limited cosine series whose cell
    /// averages reproduce this grid. `m` is capped at the grid size.
    pub fn cosine_modes(&self, m: usize) -> Vec<f64> {
        let n = self.len();
        let h = self.cell_width();
        (0..m.min(n))
            .map(|mode| {
                let projection: f64 = self
                    .centers()
                    .zip(&self.cells)
                    .map(|(x, &r)| r * (mode as f64 * PI * x).cos())
                    .sum();
                let scale = if mode == 0 { 1.0 } else { 2.0 };
                scale * projection / n as f64 / cell_average_factor(mode, h)
            })
            .collect()
    }

    /// Discrete Sobolev H² norm: cell L² norm plus squared face differences
    /// and squared reflected second differences.
    pub fn sobolev_h2_norm(&self) -> Result<f64> {
        let n = self.len();
        if n < 8 {
            return Err(RatchetError::GridTooSmall(n, 8));
        }
        let h = self.cell_width();
        let r = &self.cells;
        let l2: f64 = r.iter().map(|v| v * v).sum::<f64>() * h;
        let d1: f64 = r
            .windows(2)
            .map(|w| ((w[1] - w[0]) / h).powi(2))
            .sum::<f64>()
            * h;
        let d2: f64 = (0..n)
            .map(|i| {
                let left = r[i.saturating_sub(1)];
                let right = r[(i + 1).min(n - 1)];
                ((right - 2.0 * r[i] + left) / (h * h)).powi(2)
            })
            .sum::<f64>()
            * h;
        Ok((l2 + d1 + d2).sqrt())
    }

    /// Clears round-off negativity and restores unit mass; larger negative
    /// values are reported as a scheme failure.
    pub(crate) fn repaired(mut cells: Vec<f64>) -> Result<Self> {
        let mut clipped = false;
        for (i, c) in cells.iter_mut().enumerate() {
            if *c < 0.0 {
                if *c < -NEGATIVITY_TOLERANCE {
                    return Err(RatchetError::Negativity { cell: i, value: *c });
                }
                *c = 0.0;
                clipped = true;
            }
        }
        if clipped {
            Self::normalized(cells)
        } else {
            Self::new(cells)
        }
    }

    fn check_nonnegative(&self) -> Result<()> {
        match self
            .cells
            .iter()
            .enumerate()
            .find(|(_, &v)| v < -NEGATIVITY_TOLERANCE)
        {
            Some((cell, &value)) => Err(RatchetError::Negativity { cell, value }),
            None => Ok(()),
        }
    }
}

/// Ratio between the cell average of `cos(mπx)` and its value at the cell centre.
fn cell_average_factor(m: usize, h: f64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    let z = 0.5 * m as f64 * PI * h;
    z.sin() / z
}
