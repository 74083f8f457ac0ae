//! Wasserstein-1 distance between probability measures on `[0, 1]`.
//!
//! In one dimension `W₁(p, q) = ∫₀¹ |F_p − F_q| dx`. Grids have piecewise
//! linear CDFs and combs piecewise constant ones, so on every interval
//! between merged breakpoints the integrand is `|linear|` and is integrated
//! exactly.

use crate::error::{RatchetError, Result};
use crate::fokker_planck::{DensityGrid, MASS_TOLERANCE};
use crate::measures::DiracComb;

/// A probability measure on `[0, 1]` with a piecewise-linear CDF.
pub trait UnitIntervalMeasure {
    /// Points where the CDF may jump or change slope, inside `[0, 1]`.
    fn breakpoints(&self) -> Vec<f64>;

    /// `F(x⁺)`.
    fn cdf_right(&self, x: f64) -> f64;

    /// `F(x⁻)`.
    fn cdf_left(&self, x: f64) -> f64;

    fn total_mass(&self) -> f64;
}

impl UnitIntervalMeasure for DensityGrid {
    fn breakpoints(&self) -> Vec<f64> {
        let n = self.len();
        (0..=n).map(|i| i as f64 / n as f64).collect()
    }

    fn cdf_right(&self, x: f64) -> f64 {
        grid_cdf(self, x)
    }

    fn cdf_left(&self, x: f64) -> f64 {
        grid_cdf(self, x)
    }

    fn total_mass(&self) -> f64 {
        self.mass()
    }
}

fn grid_cdf(rho: &DensityGrid, x: f64) -> f64 {
    let n = rho.len();
    let h = rho.cell_width();
    let pos = (x.clamp(0.0, 1.0) * n as f64).min(n as f64);
    let full = (pos.floor() as usize).min(n);
    let cells = rho.cells();
    let mut acc: f64 = cells[..full].iter().sum::<f64>() * h;
    if full < n {
        acc += cells[full] * (x - full as f64 * h).max(0.0);
    }
    acc
}

impl UnitIntervalMeasure for DiracComb {
    fn breakpoints(&self) -> Vec<f64> {
        self.positions().to_vec()
    }

    fn cdf_right(&self, x: f64) -> f64 {
        self.atoms().filter(|(p, _)| *p <= x).map(|(_, w)| w).sum()
    }

    fn cdf_left(&self, x: f64) -> f64 {
        self.atoms().filter(|(p, _)| *p < x).map(|(_, w)| w).sum()
    }

    fn total_mass(&self) -> f64 {
        self.weights().iter().sum()
    }
}

/// Exact `W₁` between two normalized measures on `[0, 1]`.
pub fn wasserstein1(p: &dyn UnitIntervalMeasure, q: &dyn UnitIntervalMeasure) -> Result<f64> {
    for m in [p, q] {
        let mass = m.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(RatchetError::Unnormalized(mass));
        }
    }
    let mut points = p.breakpoints();
    points.extend(q.breakpoints());
    points.extend([0.0, 1.0]);
    points.retain(|x| (0.0..=1.0).contains(x));
    points.sort_by(f64::total_cmp);
    points.dedup();

    let mut total = 0.0;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let start = p.cdf_right(lo) - q.cdf_right(lo);
        let end = p.cdf_left(hi) - q.cdf_left(hi);
        total += abs_linear_integral(start, end, hi - lo);
    }
    Ok(total)
}

/// `∫ |ℓ|` over an interval of length `len` where `ℓ` is linear from `e0` to `e1`.
fn abs_linear_integral(e0: f64, e1: f64, len: f64) -> f64 {
    if e0 * e1 >= 0.0 {
        0.5 * len * (e0.abs() + e1.abs())
    } else {
        0.5 * len * (e0 * e0 + e1 * e1) / (e0.abs() + e1.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn atom(x: f64) -> DiracComb {
        DiracComb::new(vec![1.0], vec![x]).unwrap()
    }

    #[test]
    fn two_atoms() {
        assert_abs_diff_eq!(wasserstein1(&atom(0.2), &atom(0.7)).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(wasserstein1(&atom(0.3), &atom(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn uniform_to_midpoint_atom() {
        let u = DensityGrid::uniform(10).unwrap();
        assert_abs_diff_eq!(wasserstein1(&u, &atom(0.5)).unwrap(), 0.25, epsilon = 1e-15);
        // Off-grid atom: ∫_0^c x dx + ∫_c^1 (1 − x) dx
        let c: f64 = 0.537;
        let exact = 0.5 * c * c + 0.5 * (1.0 - c) * (1.0 - c);
        assert_abs_diff_eq!(wasserstein1(&u, &atom(c)).unwrap(), exact, epsilon = 1e-15);
    }

    #[test]
    fn grid_against_itself() {
        let g = DensityGrid::from_fn(64, |x| 1.0 + x * x).unwrap();
        assert_eq!(wasserstein1(&g, &g).unwrap(), 0.0);
    }

    #[test]
    fn rejects_unnormalized() {
        let c = DiracComb::from_raw(vec![0.5, 0.2], vec![0.1, 0.6]);
        assert!(matches!(
            wasserstein1(&c, &atom(0.5)),
            Err(RatchetError::Unnormalized(_))
        ));
    }

    #[test]
    fn shifted_grids_move_by_the_shift() {
        // Mass in cell 2 versus cell 5 of a 10-cell grid: W1 = 0.3.
        let mut a = vec![0.0; 10];
        a[2] = 10.0;
        let mut b = vec![0.0; 10];
        b[5] = 10.0;
        let (a, b) = (DensityGrid::new(a).unwrap(), DensityGrid::new(b).unwrap());
        assert_abs_diff_eq!(wasserstein1(&a, &b).unwrap(), 0.3, epsilon = 1e-15);
    }
}
