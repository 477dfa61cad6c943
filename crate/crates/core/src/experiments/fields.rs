//! Seeded random test fields with exactly prescribed spectral support.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::aniso::Direction;
use crate::error::{invalid, Result};
use crate::frames::{eta, CapSystem};
use crate::grid::{norm, Space, TorusField, TorusGrid};
use crate::Complex64;

/// How cap pieces are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `Σ_ν ε_ν χ_ν(D) f₀` with independent signs `ε_ν = ±1`.
    RademacherCaps,
    /// Independent complex Gaussian coefficients under the envelope.
    GaussianCaps,
    /// The envelope restricted to the flat top of one cap.
    SingleCap,
    /// `Σ_ν χ_ν(D) f₀ = f₀`.
    FocusingAllOnes,
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rademacher-caps" => Ok(Self::RademacherCaps),
            "gaussian-caps" => Ok(Self::GaussianCaps),
            "single-cap" => Ok(Self::SingleCap),
            "focusing-all-ones" => Ok(Self::FocusingAllOnes),
            _ => Err(crate::Error::Config(format!("unknown field model '{s}'"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::RademacherCaps => "rademacher-caps",
            Self::GaussianCaps => "gaussian-caps",
            Self::SingleCap => "single-cap",
            Self::FocusingAllOnes => "focusing-all-ones",
        })
    }
}

/// Spectral support of a model, with a smooth envelope vanishing on its
/// boundary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SupportShape {
    /// `inner <= |ξ| <= outer`.
    Annulus { inner: f64, outer: f64 },
    /// Light-cone slab in `(ξ₁, ξ₂, τ)`: `inner <= |ξ'| <= outer`,
    /// `|τ - |ξ'|| <= thickness`.
    ConeSlab {
        inner: f64,
        outer: f64,
        thickness: f64,
    },
    /// Parabolic plate `inner <= |ξ| <= outer`, `|ξ̂ - ν| <= chord`.
    Plate {
        direction: Direction,
        inner: f64,
        outer: f64,
        chord: f64,
    },
}

#[inline]
fn bump01(lo: f64, hi: f64, x: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (1.0f64).exp() * eta((x - mid) / half)
}

impl SupportShape {
    pub fn validate(&self, dim: usize) -> Result<()> {
        let ok = match *self {
            SupportShape::Annulus { inner, outer } => inner >= 0.0 && outer > inner,
            SupportShape::ConeSlab {
                inner,
                outer,
                thickness,
            } => dim == 3 && inner >= 0.0 && outer > inner && thickness > 0.0,
            SupportShape::Plate {
                direction,
                inner,
                outer,
                chord,
            } => direction.dim() == dim && inner >= 0.0 && outer > inner && chord > 0.0,
        };
        if !ok {
            return invalid(format!("invalid support {self:?} for dimension {dim}"));
        }
        Ok(())
    }

    /// Smooth envelope, zero outside the closed support.
    pub fn envelope(&self, xi: &[f64]) -> f64 {
        match *self {
            SupportShape::Annulus { inner, outer } => bump01(inner, outer, norm(xi)),
            SupportShape::ConeSlab {
                inner,
                outer,
                thickness,
            } => {
                let r = norm(&xi[..2]);
                let a = bump01(inner, outer, r);
                if a == 0.0 {
                    return 0.0;
                }
                a * bump01(-thickness, thickness, xi[2] - r)
            }
            SupportShape::Plate {
                direction,
                inner,
                outer,
                chord,
            } => {
                let r = norm(xi);
                let a = bump01(inner, outer, r);
                if a == 0.0 {
                    return 0.0;
                }
                let c: f64 = xi
                    .iter()
                    .zip(direction.as_slice())
                    .map(|(x, w)| (x / r - w).powi(2))
                    .sum::<f64>()
                    .sqrt();
                a * bump01(-chord, chord, c)
            }
        }
    }

    /// Largest `|ξ|` in the support.
    pub fn reach(&self) -> f64 {
        match *self {
            SupportShape::Annulus { outer, .. } | SupportShape::Plate { outer, .. } => outer,
            SupportShape::ConeSlab {
                outer, thickness, ..
            } => ((outer + thickness).powi(2) + outer * outer).sqrt(),
        }
    }
}

/// A seeded random field model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomFieldModel {
    pub kind: ModelKind,
    pub seed: u64,
    pub support: SupportShape,
}

impl RandomFieldModel {
    pub fn new(kind: ModelKind, seed: u64, support: SupportShape) -> Self {
        Self { kind, seed, support }
    }

    /// Samples the model on `grid` (frequency space). Cap-based kinds need
    /// `caps`; the planar caps of a cone grid act on `(ξ₁, ξ₂)`.
    pub fn generate(&self, grid: &TorusGrid, caps: Option<&CapSystem>) -> Result<TorusField> {
        self.support.validate(grid.dim())?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let n = grid.len();
        let mut values = vec![Complex64::new(0.0, 0.0); n];
        match self.kind {
            ModelKind::GaussianCaps => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for (i, v) in values.iter_mut().enumerate() {
                    // Draw for every lattice point so the stream does not
                    // depend on the support.
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    let e = self.support.envelope(&grid.freq(i)[..grid.dim()]);
                    if e != 0.0 {
                        *v = Complex64::new(a * s * e, b * s * e);
                    }
                }
            }
            ModelKind::FocusingAllOnes => {
                for (i, v) in values.iter_mut().enumerate() {
                    v.re = self.support.envelope(&grid.freq(i)[..grid.dim()]);
                }
            }
            ModelKind::RademacherCaps => {
                let caps = caps.ok_or_else(|| crate::Error::InvalidParameter("rademacher-caps needs a cap system".into()))?;
                let signs: Vec<f64> = (0..caps.len())
                    .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                    .collect();
                for (i, v) in values.iter_mut().enumerate() {
                    let xi = grid.freq(i);
                    let e = self.support.envelope(&xi[..grid.dim()]);
                    if e == 0.0 {
                        continue;
                    }
                    let s: f64 = caps.weights_at(&xi[..caps.dim()]).iter().map(|&(nu, c)| signs[nu] * c).sum();
                    v.re = e * s;
                }
            }
            ModelKind::SingleCap => {
                let caps = caps.ok_or_else(|| crate::Error::InvalidParameter("single-cap needs a cap system".into()))?;
                let nu = rng.gen_range(0..caps.len());
                let centre = caps.centers()[nu];
                let half = caps.flat_halfwidth();
                for (i, v) in values.iter_mut().enumerate() {
                    let xi = grid.freq(i);
                    let e = self.support.envelope(&xi[..grid.dim()]);
                    if e == 0.0 {
                        continue;
                    }
                    let p = &xi[..caps.dim()];
                    let w = match half {
                        Some(h) => {
                            let th = p[1].atan2(p[0]);
                            let c = centre.as_slice();
                            let d = (th - c[1].atan2(c[0]) + std::f64::consts::PI)
                                .rem_euclid(2.0 * std::f64::consts::PI)
                                - std::f64::consts::PI;
                            bump01(-h, h, d)
                        }
                        None => caps.chi(nu, p),
                    };
                    v.re = e * w;
                }
            }
        }
        TorusField::new(*grid, values, Space::Frequency)
    }
}

/// Complex Gaussian field on `inner <= |ξ| <= outer` with a smooth radial
/// envelope; a convenience wrapper for resolved-band test inputs.
pub fn gaussian_band_field(grid: &TorusGrid, inner: f64, outer: f64, seed: u64) -> Result<TorusField> {
    RandomFieldModel::new(ModelKind::GaussianCaps, seed, SupportShape::Annulus { inner, outer })
        .generate(grid, None)
}
