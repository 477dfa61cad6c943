//! Smooth one-dimensional templates and the radial profile `Ψ₀`.

use std::f64::consts::{FRAC_PI_2, LN_2};

use serde::{Deserialize, Serialize};

/// `exp(-1/(1-t²))` on `(-1, 1)`, zero outside.
#[inline]
pub fn eta(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// Smooth step: 0 for `t <= 0`, 1 for `t >= 1`, `C^∞` in between.
#[inline]
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Plateau bump: 1 on `[0, 1/3]`, 0 from 1 on, smooth and decreasing between.
#[inline]
pub fn plateau(t: f64) -> f64 {
    1.0 - smooth_step((t.abs() - 1.0 / 3.0) * 1.5)
}

/// Angular template `χ` on `[0, 1]`, normalised to `χ(0) = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularProfile {
    /// `exp(1 - 1/(1-t²))`
    #[default]
    Standard,
    /// `exp(1 - 1/(1-t⁴))`, flatter near the centre.
    Quartic,
}

impl AngularProfile {
    #[inline]
    pub fn eval(self, t: f64) -> f64 {
        let t = t.abs();
        if t >= 1.0 {
            return 0.0;
        }
        let u = match self {
            AngularProfile::Standard => t * t,
            AngularProfile::Quartic => t * t * t * t,
        };
        (1.0 - 1.0 / (1.0 - u)).exp()
    }
}

/// Radial taper `β`: 0 on `[0, 1/4]`, 1 on `[1, ∞)`, with `β² + ρ₀² = 1`
/// for the companion `ρ₀ = cos(π/2·h)`.
#[inline]
pub fn taper(r: f64) -> f64 {
    let h = smooth_step((r - 0.25) / 0.75);
    if h >= 1.0 {
        1.0
    } else {
        (FRAC_PI_2 * h).sin()
    }
}

/// `Ψ₀(r) = η(log₂ r) / √c` with `c = ∫ η(log₂ s)² ds/s`, so that
/// `∫₀^∞ Ψ₀(σr)² dσ/σ = 1` for every `r > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    norm: f64,
}

impl Default for RadialProfile {
    fn default() -> Self {
        build_radial_profile()
    }
}

impl RadialProfile {
    #[inline]
    pub fn psi0(&self, r: f64) -> f64 {
        if !(r > 0.5 && r < 2.0) {
            return 0.0;
        }
        eta(r.log2()) / self.norm
    }

    /// The constant `c` (before the square root).
    pub fn constant(&self) -> f64 {
        self.norm * self.norm
    }
}

pub fn build_radial_profile() -> RadialProfile {
    // ∫ η(log₂ s)² ds/s = ln 2 ∫_{-1}^{1} η(t)² dt. The integrand is flat to
    // all orders at ±1, so the trapezoid rule converges geometrically.
    let n = 4096;
    let h = 2.0 / n as f64;
    let s: f64 = (1..n).map(|i| eta(-1.0 + i as f64 * h).powi(2)).sum();
    let c = LN_2 * h * s;
    RadialProfile { norm: c.sqrt() }
}
