//! Ratchet-shaped potentials with `k` teeth on the unit interval.
//!
//! Each tooth `[x_i, x_{i+1}]` of width `1/k` descends from the maximum at
//! `x_i` to the minimum at `a_i = a + x_i`, then climbs back to the next
//! maximum. Both ramps are the degree-9 smoothstep, whose derivatives of
//! orders 1 through 4 vanish at either end, so the glued potential is C⁴.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, RatchetError, Result};

/// Degree-9 smoothstep, `S(0) = 0`, `S(1) = 1`, flat to fourth order at both ends.
pub fn smoothstep9(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    // S(t) = 1 - S(1 - t); evaluating the short side keeps full relative
    // precision next to both flat ends.
    if t > 0.5 {
        1.0 - smoothstep9_head(1.0 - t)
    } else {
        smoothstep9_head(t)
    }
}

fn smoothstep9_head(t: f64) -> f64 {
    t.powi(5) * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))))
}

/// Derivative of [`smoothstep9`]: `630 t⁴ (1 - t)⁴`.
pub fn smoothstep9_derivative(t: f64) -> f64 {
    if !(0.0..=1.0).contains(&t) {
        return 0.0;
    }
    let s = t * (1.0 - t);
    630.0 * s * s * s * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialParams", into = "PotentialParams")]
pub struct RatchetPotential {
    teeth: usize,
    offset: f64,
    amplitude: f64,
}

/// Serialized form `{ "k": .., "a": .., "V0": .. }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialParams {
    pub k: usize,
    pub a: f64,
    #[serde(rename = "V0", default = "default_amplitude")]
    pub v0: f64,
}

fn default_amplitude() -> f64 {
    1.0
}

impl Default for PotentialParams {
    fn default() -> Self {
        Self {
            k: 2,
            a: 0.2,
            v0: 1.0,
        }
    }
}

impl TryFrom<PotentialParams> for RatchetPotential {
    type Error = RatchetError;

    fn try_from(p: PotentialParams) -> Result<Self> {
        RatchetPotential::new(p.k, p.a, p.v0)
    }
}

impl From<RatchetPotential> for PotentialParams {
    fn from(p: RatchetPotential) -> Self {
        PotentialParams {
            k: p.teeth,
            a: p.offset,
            v0: p.amplitude,
        }
    }
}

impl RatchetPotential {
    pub fn new(k: usize, a: f64, amplitude: f64) -> Result<Self> {
        if k < 2 {
            return Err(invalid("k", format!("need at least 2 teeth, got {k}")));
        }
        let period = 1.0 / k as f64;
        if !(a > 0.0 && a < period) {
            return Err(invalid(
                "a",
                format!("minimum offset must lie in (0, 1/k) = (0, {period}), got {a}"),
            ));
        }
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(invalid(
                "V0",
                format!("amplitude must be positive, got {amplitude}"),
            ));
        }
        Ok(Self {
            teeth: k,
            offset: a,
            amplitude,
        })
    }

    /// Unit-amplitude potential.
    pub fn with_unit_amplitude(k: usize, a: f64) -> Result<Self> {
        Self::new(k, a, 1.0)
    }

    pub fn k(&self) -> usize {
        self.teeth
    }

    pub fn a(&self) -> f64 {
        self.offset
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn period(&self) -> f64 {
        1.0 / self.teeth as f64
    }

    /// The potential obtained by the reflection `x -> 1 - x`: offset `1/k - a`.
    pub fn mirrored(&self) -> Self {
        Self {
            offset: self.period() - self.offset,
            ..*self
        }
    }

    /// `a = 1/(2k)`: both ramps have equal length and the potential is
    /// reflection symmetric.
    pub fn is_symmetric(&self) -> bool {
        (self.offset - 0.5 * self.period()).abs() <= 1e-14
    }

    /// Maxima `x_i = (i - 1)/k`, `i = 1..=k+1`.
    pub fn well_boundaries(&self) -> Vec<f64> {
        let k = self.teeth as f64;
        (0..=self.teeth).map(|i| i as f64 / k).collect()
    }

    /// Minima `a_i = a + (i - 1)/k`, `i = 1..=k`.
    pub fn minima(&self) -> Vec<f64> {
        let k = self.teeth as f64;
        (0..self.teeth).map(|i| self.offset + i as f64 / k).collect()
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.psi_unchecked(x))
    }

    /// Drift field `b = ψ'`.
    pub fn drift(&self, x: f64) -> Result<f64> {
        check_domain(x)?;
        Ok(self.drift_unchecked(x))
    }

    pub(crate) fn psi_unchecked(&self, x: f64) -> f64 {
        let u = self.local_coordinate(x);
        let a = self.offset;
        if u <= a {
            self.amplitude * smoothstep9((a - u) / a)
        } else {
            self.amplitude * smoothstep9((u - a) / (self.period() - a))
        }
    }

    pub(crate) fn drift_unchecked(&self, x: f64) -> f64 {
        let u = self.local_coordinate(x);
        let a = self.offset;
        if u <= a {
            -self.amplitude * smoothstep9_derivative(u / a) / a
        } else {
            let right = self.period() - a;
            self.amplitude * smoothstep9_derivative((u - a) / right) / right
        }
    }

    /// Position within the containing tooth, in `[0, 1/k]`.
    fn local_coordinate(&self, x: f64) -> f64 {
        let k = self.teeth as f64;
        let tooth = ((x * k).floor().max(0.0) as usize).min(self.teeth - 1);
        (x - tooth as f64 / k).clamp(0.0, self.period())
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(RatchetError::OutOfDomain(x))
    }
}
