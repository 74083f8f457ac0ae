//! Exponentially fitted finite-volume discretization of
//! `ρ_t = (σ ρ_x + ψ' ρ)_x` with zero flux through both ends.
//!
//! The face flux between cells `i` and `i + 1` is the Scharfetter-Gummel
//! (Chang-Cooper type) flux
//!
//! ```text
//! J = σ/h · [ B(z) ρ_i − B(−z) ρ_{i+1} ],   z = (ψ_{i+1} − ψ_i) / σ,
//! B(z) = z / (e^z − 1),
//! ```
//!
//! which vanishes identically on `ρ ∝ e^{−ψ/σ}` sampled at cell centres.
//! Boundary fluxes are zero, so the scheme conserves mass exactly, and the
//! implicit Euler matrix is a column-diagonally-dominant M-matrix, so
//! nonnegative data stays nonnegative for any step size.

use crate::error::{invalid, RatchetError, Result};
use crate::fokker_planck::DensityGrid;

/// Bernoulli function `z / (e^z − 1)`.
pub fn bernoulli(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        z / z.exp_m1()
    }
}

#[derive(Debug, Clone)]
pub struct DriftDiffusionOperator {
    sigma: f64,
    /// Rate of transfer from cell `i` into cell `i + 1`, per face.
    forward: Vec<f64>,
    /// Rate of transfer from cell `i + 1` into cell `i`, per face.
    backward: Vec<f64>,
}

impl DriftDiffusionOperator {
    /// `psi` holds the potential at the `N` cell centres.
    pub fn new(sigma: f64, psi: &[f64]) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(invalid("sigma", format!("must be positive, got {sigma}")));
        }
        let n = psi.len();
        if n < 2 {
            return Err(RatchetError::GridTooSmall(n, 2));
        }
        let scale = sigma * (n * n) as f64;
        let (forward, backward) = psi
            .windows(2)
            .map(|w| {
                let z = (w[1] - w[0]) / sigma;
                (scale * bernoulli(z), scale * bernoulli(-z))
            })
            .unzip();
        Ok(Self {
            sigma,
            forward,
            backward,
        })
    }

    /// Pure diffusion on `n` cells.
    pub fn pure_diffusion(sigma: f64, n: usize) -> Result<Self> {
        Self::new(sigma, &vec![0.0; n])
    }

    pub fn cells(&self) -> usize {
        self.forward.len() + 1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `(L ρ)_i`, the semi-discrete right-hand side.
    pub fn apply(&self, rho: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rho.len()];
        for (f, (&fw, &bw)) in self.forward.iter().zip(&self.backward).enumerate() {
            let flux = fw * rho[f] - bw * rho[f + 1];
            out[f] -= flux;
            out[f + 1] += flux;
        }
        out
    }

    /// Implicit Euler stepper `(I − Δt L) ρ^{n+1} = ρ^n` with a prefactored
    /// tridiagonal system.
    pub fn implicit_euler(&self, dt: f64) -> Result<ImplicitEuler> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(RatchetError::NonPositiveTime(dt));
        }
        let n = self.cells();
        let mut diag = vec![1.0; n];
        let mut lower = vec![0.0; n - 1];
        let mut upper = vec![0.0; n - 1];
        for f in 0..n - 1 {
            diag[f] += dt * self.forward[f];
            diag[f + 1] += dt * self.backward[f];
            upper[f] = -dt * self.backward[f];
            lower[f] = -dt * self.forward[f];
        }
        Tridiagonal::factor(lower, diag, upper).map(|system| ImplicitEuler { dt, system })
    }
}

/// LU factors of a tridiagonal matrix (Thomas algorithm without pivoting).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    /// Sub-diagonal multipliers `l_i = a_i / d_{i-1}`.
    multipliers: Vec<f64>,
    /// Pivots of the upper factor.
    pivots: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[i]` is entry `(i+1, i)`, `upper[i]` is entry `(i, i+1)`.
    pub fn factor(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if lower.len() + 1 != n || upper.len() + 1 != n {
            return Err(invalid("tridiagonal", "band lengths do not match"));
        }
        let mut pivots = diag;
        let mut multipliers = lower;
        for i in 1..n {
            if pivots[i - 1] == 0.0 {
                return Err(RatchetError::Singular);
            }
            multipliers[i - 1] /= pivots[i - 1];
            pivots[i] -= multipliers[i - 1] * upper[i - 1];
        }
        if pivots[n - 1] == 0.0 {
            return Err(RatchetError::Singular);
        }
        Ok(Self {
            multipliers,
            pivots,
            upper,
        })
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            rhs[i] -= self.multipliers[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.upper[i] * rhs[i + 1]) / self.pivots[i];
        }
    }
}

#[derive(Debug, Clone)]
pub struct ImplicitEuler {
    dt: f64,
    system: Tridiagonal,
}

impl ImplicitEuler {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_in_place(&self, rho: &mut [f64]) {
        self.system.solve_in_place(rho);
    }

    pub fn run(&self, rho: &DensityGrid, steps: usize) -> Result<DensityGrid> {
        let mut cells = rho.cells().to_vec();
        for _ in 0..steps {
            self.step_in_place(&mut cells);
        }
        DensityGrid::repaired(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bernoulli_limits() {
        assert_eq!(bernoulli(0.0), 1.0);
        assert_abs_diff_eq!(bernoulli(1e-9), 1.0 - 0.5e-9, epsilon = 1e-16);
        assert_abs_diff_eq!(bernoulli(1.0), 1.0 / (1f64.exp() - 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(bernoulli(-800.0), 800.0, epsilon = 1e-9);
        assert_eq!(bernoulli(800.0), 0.0);
        // B(z) e^z = B(-z)
        for z in [-3.0, -0.2, 0.5, 4.0] {
            assert_abs_diff_eq!(bernoulli(z) * f64::exp(z), bernoulli(-z), epsilon = 1e-13);
        }
    }

    #[test]
    fn thomas_solves_small_system() {
        // [[4,1,0],[2,5,1],[0,3,6]] x = [5, 8, 9] has x = [1, 1, 1]
        let t = Tridiagonal::factor(vec![2.0, 3.0], vec![4.0, 5.0, 6.0], vec![1.0, 1.0]).unwrap();
        let mut b = vec![5.0, 8.0, 9.0];
        t.solve_in_place(&mut b);
        for v in b {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
        assert!(Tridiagonal::factor(vec![1.0], vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn equilibrium_is_in_the_kernel() {
        let n = 200;
        let sigma = 0.07;
        let psi: Vec<f64> = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) / n as f64;
                (6.0 * x).sin() + x * x
            })
            .collect();
        let op = DriftDiffusionOperator::new(sigma, &psi).unwrap();
        let eq: Vec<f64> = psi.iter().map(|p| (-p / sigma).exp()).collect();
        let r = op.apply(&eq);
        let scale = eq.iter().cloned().fold(0.0, f64::max) * sigma * (n * n) as f64;
        assert!(r.iter().all(|v| v.abs() <= 1e-12 * scale));
    }

    #[test]
    fn implicit_step_conserves_mass_and_sign() {
        let n = 64;
        let psi: Vec<f64> = (0..n).map(|i| 20.0 * ((i as f64) / n as f64 * 9.0).cos()).collect();
        let op = DriftDiffusionOperator::new(0.01, &psi).unwrap();
        let stepper = op.implicit_euler(0.5).unwrap();
        let mut cells = vec![0.0; n];
        cells[3] = n as f64;
        let rho = DensityGrid::new(cells).unwrap();
        let out = stepper.run(&rho, 50).unwrap();
        assert!(out.cells().iter().all(|&v| v >= 0.0));
        assert_abs_diff_eq!(out.mass(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(DriftDiffusionOperator::new(0.0, &[0.0; 4]).is_err());
        assert!(DriftDiffusionOperator::new(0.1, &[0.0]).is_err());
        let op = DriftDiffusionOperator::pure_diffusion(0.1, 8).unwrap();
        assert!(op.implicit_euler(0.0).is_err());
    }
}
