//! The directional family `φ_ω` and the low-frequency cutoff `ρ`.

use std::f64::consts::PI;

use serde::Serialize;

use super::profile::{taper, AngularProfile};
use crate::aniso::Direction;
use crate::error::{invalid, Error, Result};
use crate::grid::{norm, TorusGrid};

/// Default upper edge of the resolved band as a fraction of `ξ_max`.
pub const DEFAULT_BAND: f64 = 0.45;

const M_FLOOR: f64 = 1e-300;

/// Uniform direction quadrature with angular profile `χ` and taper `β`:
///
/// ```text
/// φ_ω(ξ) = β(|ξ|) χ(|ξ|^{1/2}|ξ̂ - ω|) / (Σ_j w_j χ(|ξ|^{1/2}|ξ̂ - ω_j|)²)^{1/2}
/// ```
///
/// so `Σ_j w_j φ_{ω_j}(ξ)² = β(|ξ|)²` on the quadrature set.
#[derive(Clone, Debug, Serialize)]
pub struct DirectionalFamily {
    dim: usize,
    directions: Vec<Direction>,
    weight: f64,
    angular: AngularProfile,
    xi_max: f64,
    band_top: f64,
}

/// Minimum admissible direction count for a grid with Nyquist bound `xi_max`.
pub fn minimum_count(dim: usize, xi_max: f64) -> usize {
    let c = xi_max.sqrt().ceil() as usize;
    if dim == 2 {
        8 * c
    } else {
        8 * c * c
    }
}

/// Fibonacci lattice on `S²`.
pub fn fibonacci_sphere(count: usize) -> Vec<Direction> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|j| {
            let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * j as f64;
            Direction::new(&[r * phi.cos(), r * phi.sin(), z]).expect("unit vector")
        })
        .collect()
}

/// Family with the default band and angular profile.
pub fn build_directional_family(grid: &TorusGrid, count: usize) -> Result<DirectionalFamily> {
    DirectionalFamily::new(grid, count, DEFAULT_BAND, AngularProfile::Standard)
}

impl DirectionalFamily {
    pub fn new(
        grid: &TorusGrid,
        count: usize,
        band_fraction: f64,
        angular: AngularProfile,
    ) -> Result<Self> {
        let dim = grid.dim();
        let required = minimum_count(dim, grid.xi_max());
        if count < required {
            return Err(Error::InsufficientDirections { count, required });
        }
        if !(band_fraction > 0.0 && band_fraction <= 1.0) {
            return invalid("band fraction must lie in (0, 1]");
        }
        let directions = if dim == 2 {
            (0..count)
                .map(|j| Direction::from_angle(2.0 * PI * j as f64 / count as f64))
                .collect()
        } else {
            fibonacci_sphere(count)
        };
        Ok(Self {
            dim,
            directions,
            weight: 1.0 / count as f64,
            angular,
            xi_max: grid.xi_max(),
            band_top: band_fraction * grid.xi_max(),
        })
    }

    /// Family with the minimum admissible count for `grid`.
    pub fn for_grid(grid: &TorusGrid, band_fraction: f64, angular: AngularProfile) -> Result<Self> {
        Self::new(grid, minimum_count(grid.dim(), grid.xi_max()), band_fraction, angular)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.directions.len()
    }
    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }
    /// Quadrature weight of every direction (`1/J`).
    pub fn weight(&self) -> f64 {
        self.weight
    }
    pub fn angular(&self) -> AngularProfile {
        self.angular
    }
    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }
    /// Upper edge of the resolved band.
    pub fn band_top(&self) -> f64 {
        self.band_top
    }

    /// Whether `ξ` lies in the resolved band or the low-frequency ball.
    #[inline]
    pub fn in_band(&self, xi: &[f64]) -> bool {
        norm(xi) <= self.band_top
    }

    /// Indices of directions with `|ξ̂ - ω_j| < |ξ|^{-1/2}`, paired with
    /// `χ(|ξ|^{1/2}|ξ̂ - ω_j|)`.
    fn angular_terms(&self, xi: &[f64], r: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let s = r.sqrt();
        let eps = 1.0 / s;
        let j_count = self.directions.len();
        if self.dim == 2 && eps < 2.0 {
            let theta = xi[1].atan2(xi[0]);
            let delta = 2.0 * (0.5 * eps).asin();
            let step = 2.0 * PI / j_count as f64;
            let lo = ((theta - delta) / step).floor() as i64;
            let hi = ((theta + delta) / step).ceil() as i64;
            for j in lo..=hi {
                let jj = j.rem_euclid(j_count as i64) as usize;
                let c = chord(&self.directions[jj], xi, r);
                let v = self.angular.eval(s * c);
                if v > 0.0 {
                    out.push((jj, v));
                }
            }
            out.sort_unstable_by_key(|t| t.0);
            out.dedup_by_key(|t| t.0);
        } else {
            for (j, d) in self.directions.iter().enumerate() {
                let v = self.angular.eval(s * chord(d, xi, r));
                if v > 0.0 {
                    out.push((j, v));
                }
            }
        }
    }

    /// All nonzero `φ_{ω_j}(ξ)`, ascending in `j`.
    pub fn phi_row(&self, xi: &[f64]) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.phi_row_into(xi, &mut out);
        out
    }

    pub(crate) fn phi_row_into(&self, xi: &[f64], out: &mut Vec<(usize, f64)>) {
        let r = norm(xi);
        let b = taper(r);
        if b == 0.0 {
            out.clear();
            return;
        }
        self.angular_terms(xi, r, out);
        let m: f64 = out.iter().map(|t| self.weight * t.1 * t.1).sum();
        let scale = b / m.max(M_FLOOR).sqrt();
        for t in out.iter_mut() {
            t.1 *= scale;
        }
    }

    /// `φ_ω(ξ)` for an arbitrary direction `ω`.
    pub fn phi(&self, omega: &Direction, xi: &[f64]) -> f64 {
        let r = norm(xi);
        let b = taper(r);
        if b == 0.0 {
            return 0.0;
        }
        let s = r.sqrt();
        let a = self.angular.eval(s * chord(omega, xi, r));
        if a == 0.0 {
            return 0.0;
        }
        let mut terms = Vec::new();
        self.angular_terms(xi, r, &mut terms);
        let m: f64 = terms.iter().map(|t| self.weight * t.1 * t.1).sum();
        b * a / m.max(M_FLOOR).sqrt()
    }

    /// `Σ_j w_j φ_{ω_j}(ξ)²`.
    pub fn sum_phi_sq(&self, xi: &[f64]) -> f64 {
        self.phi_row(xi).iter().map(|t| self.weight * t.1 * t.1).sum()
    }
}

#[inline]
fn chord(d: &Direction, xi: &[f64], r: f64) -> f64 {
    let w = d.as_slice();
    xi.iter()
        .zip(w)
        .map(|(x, o)| (x / r - o).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `ρ(ξ) = (1 - Σ_j w_j φ_j(ξ)²)^{1/2}`.
///
/// The family makes the sum equal `β(|ξ|)²` exactly, so this evaluates
/// `((1-β)(1+β))^{1/2}`, which is exactly 1 below `|ξ| = 1/4` and exactly 0
/// from `|ξ| = 1` on.
pub fn eval_rho(_fam: &DirectionalFamily, xi: &[f64]) -> f64 {
    rho_radial(norm(xi))
}

#[inline]
pub(crate) fn rho_radial(r: f64) -> f64 {
    let b = taper(r);
    ((1.0 - b) * (1.0 + b)).max(0.0).sqrt()
}
