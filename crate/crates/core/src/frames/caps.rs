//! Maximal `R^{-1/2}`-separated direction sets `V_R` and their degree-zero
//! homogeneous partitions of unity `χ_ν`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::family::fibonacci_sphere;
use super::profile::plateau;
use crate::aniso::Direction;
use crate::error::{invalid, Result};
use crate::grid::{norm, Symbol, SupportHint};
use crate::Complex64;

#[derive(Clone, Debug)]
enum Layout {
    /// Uniform angles `2πν/J`; bumps of half-width `0.75·2π/J`.
    Planar { step: f64 },
    /// Scattered centres, bumps of chord radius `1.5 R^{-1/2}`, bucketed
    /// on a cubic hash for lookup.
    Spherical {
        reach: f64,
        cell: f64,
        buckets: HashMap<(i32, i32, i32), Vec<usize>>,
    },
}

/// Cap system `(V_R, χ_ν)`.
#[derive(Clone, Debug)]
pub struct CapSystem {
    dim: usize,
    r: f64,
    centers: Vec<Direction>,
    separation: f64,
    layout: Layout,
}

#[derive(Serialize)]
struct CapSummary {
    dim: usize,
    r: f64,
    caps: usize,
    separation: f64,
}

impl Serialize for CapSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CapSummary {
            dim: self.dim,
            r: self.r,
            caps: self.centers.len(),
            separation: self.separation,
        }
        .serialize(s)
    }
}

/// Number of uniformly spaced planar caps: the largest `J` whose adjacent
/// chord `2 sin(π/J)` is still at least `R^{-1/2}`.
pub fn planar_cap_count(r: f64) -> usize {
    let eps = r.powf(-0.5);
    let mut j = (PI / (0.5 * eps).asin()).floor() as usize;
    while j > 1 && 2.0 * (PI / j as f64).sin() < eps {
        j -= 1;
    }
    while 2.0 * (PI / (j + 1) as f64).sin() >= eps {
        j += 1;
    }
    j
}

fn key(v: &[f64], cell: f64) -> (i32, i32, i32) {
    (
        (v[0] / cell).floor() as i32,
        (v[1] / cell).floor() as i32,
        (v[2] / cell).floor() as i32,
    )
}

fn neighbours<'a>(
    buckets: &'a HashMap<(i32, i32, i32), Vec<usize>>,
    k: (i32, i32, i32),
    span: i32,
) -> impl Iterator<Item = usize> + 'a {
    let mut keys = Vec::new();
    for a in -span..=span {
        for b in -span..=span {
            for c in -span..=span {
                keys.push((k.0 + a, k.1 + b, k.2 + c));
            }
        }
    }
    keys.into_iter()
        .filter_map(move |kk| buckets.get(&kk))
        .flat_map(|v| v.iter().copied())
}

fn greedy_sphere(eps: f64) -> Vec<Direction> {
    let cell = eps;
    let mut buckets: HashMap<(i32, i32, i32), Vec<usize>> = HashMap::new();
    let mut centers: Vec<Direction> = Vec::new();
    let base = (4.0 * PI / (eps * eps)).ceil() as usize;
    // Thin a Fibonacci set, then complete it over a denser candidate set.
    for count in [base, 16 * base] {
        for c in fibonacci_sphere(count) {
            let k = key(c.as_slice(), cell);
            let clear = neighbours(&buckets, k, 1).all(|i| centers[i].chord(&c) >= eps);
            if clear {
                buckets.entry(k).or_default().push(centers.len());
                centers.push(c);
            }
        }
    }
    centers
}

pub fn build_caps(r: f64, dim: usize) -> Result<CapSystem> {
    if !(r.is_finite() && r >= 2.0) {
        return invalid(format!("cap scale must be at least 2, got {r}"));
    }
    let eps = r.powf(-0.5);
    let (centers, layout) = match dim {
        2 => {
            let j = planar_cap_count(r);
            let step = 2.0 * PI / j as f64;
            let centers = (0..j).map(|v| Direction::from_angle(step * v as f64)).collect();
            (centers, Layout::Planar { step })
        }
        3 => {
            let centers = greedy_sphere(eps);
            let reach = 1.5 * eps;
            let cell = reach;
            let mut buckets: HashMap<(i32, i32, i32), Vec<usize>> = HashMap::new();
            for (i, c) in centers.iter().enumerate() {
                buckets.entry(key(c.as_slice(), cell)).or_default().push(i);
            }
            (centers, Layout::Spherical { reach, cell, buckets })
        }
        _ => return invalid("cap systems exist in dimension 2 or 3"),
    };
    let separation = min_separation(&centers, &layout, dim);
    Ok(CapSystem {
        dim,
        r,
        centers,
        separation,
        layout,
    })
}

fn min_separation(centers: &[Direction], layout: &Layout, dim: usize) -> f64 {
    if centers.len() < 2 {
        return f64::INFINITY;
    }
    match layout {
        Layout::Planar { step } => 2.0 * (0.5 * step).sin(),
        Layout::Spherical { .. } => {
            debug_assert_eq!(dim, 3);
            let mut best = f64::INFINITY;
            for i in 0..centers.len() {
                for j in 0..i {
                    best = best.min(centers[i].chord(&centers[j]));
                }
            }
            best
        }
    }
}

impl CapSystem {
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn scale(&self) -> f64 {
        self.r
    }
    pub fn len(&self) -> usize {
        self.centers.len()
    }
    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
    pub fn centers(&self) -> &[Direction] {
        &self.centers
    }
    /// Minimum pairwise chord `|ν - ν'|`.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// Angular half-width on which a planar cap's `χ_ν` is identically 1.
    pub fn flat_halfwidth(&self) -> Option<f64> {
        match self.layout {
            Layout::Planar { step } => Some(0.25 * step),
            Layout::Spherical { .. } => None,
        }
    }

    /// Nonzero `χ_ν(ξ)`, ascending in `ν`. At `ξ = 0` all caps share equally.
    pub fn weights_at(&self, xi: &[f64]) -> Vec<(usize, f64)> {
        let r = norm(&xi[..self.dim]);
        if r == 0.0 {
            let w = 1.0 / self.len() as f64;
            return (0..self.len()).map(|i| (i, w)).collect();
        }
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(4);
        match &self.layout {
            Layout::Planar { step } => {
                let theta = xi[1].atan2(xi[0]).rem_euclid(2.0 * PI);
                let h = 0.75 * step;
                let j = self.len() as i64;
                let c = (theta / step).round() as i64;
                for v in c - 1..=c + 1 {
                    let delta = theta - step * v as f64;
                    let b = plateau(delta / h);
                    if b > 0.0 {
                        out.push((v.rem_euclid(j) as usize, b));
                    }
                }
            }
            Layout::Spherical {
                reach,
                cell,
                buckets,
            } => {
                let u = [xi[0] / r, xi[1] / r, xi[2] / r];
                let d = Direction::new(&u).expect("nonzero");
                for i in neighbours(buckets, key(&u, *cell), 1) {
                    let b = plateau(self.centers[i].chord(&d) / reach);
                    if b > 0.0 {
                        out.push((i, b));
                    }
                }
            }
        }
        out.sort_unstable_by_key(|t| t.0);
        out.dedup_by_key(|t| t.0);
        let total: f64 = out.iter().map(|t| t.1).sum();
        for t in out.iter_mut() {
            t.1 /= total;
        }
        out
    }

    /// `χ_ν(ξ)`.
    pub fn chi(&self, nu: usize, xi: &[f64]) -> f64 {
        self.weights_at(xi)
            .into_iter()
            .find(|t| t.0 == nu)
            .map_or(0.0, |t| t.1)
    }

    /// `χ_ν` as a multiplier symbol.
    pub fn symbol(self: &Arc<Self>, nu: usize) -> Result<Symbol> {
        if nu >= self.len() {
            return invalid("cap index out of range");
        }
        let caps = Arc::clone(self);
        let chord = match self.layout {
            Layout::Planar { step } => 2.0 * (0.375 * step).sin(),
            Layout::Spherical { reach, .. } => reach,
        };
        Ok(Symbol::real(move |xi| caps.chi(nu, xi))
            .with_origin_value(Complex64::new(1.0 / self.len() as f64, 0.0))
            .with_support(SupportHint::Cone {
                axis: self.centers[nu].as_array(),
                chord,
                inner: 0.0,
                outer: f64::INFINITY,
            }))
    }
}
