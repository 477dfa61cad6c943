//! Parabolic dilations `A_{ω,σ}`, the norm `|·|_ω` they are homogeneous
//! for, anisotropic balls and the centred maximal function `M_ω`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::{Space, TorusField};

/// A unit vector in `R^2` or `R^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    v: [f64; 3],
    dim: usize,
}

impl Direction {
    /// Normalises `v`; fails on zero or non-finite input.
    pub fn new(v: &[f64]) -> Result<Self> {
        if !(v.len() == 2 || v.len() == 3) {
            return invalid("direction must have 2 or 3 components");
        }
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(r.is_finite() && r > 0.0) {
            return invalid("direction must be a nonzero finite vector");
        }
        let mut out = [0.0; 3];
        for (o, x) in out.iter_mut().zip(v) {
            *o = x / r;
        }
        Ok(Self { v: out, dim: v.len() })
    }

    /// `(cos θ, sin θ)`.
    pub fn from_angle(theta: f64) -> Self {
        Self {
            v: [theta.cos(), theta.sin(), 0.0],
            dim: 2,
        }
    }

    /// Standard basis vector `e_i` in dimension `dim`.
    pub fn axis(dim: usize, i: usize) -> Result<Self> {
        if i >= dim {
            return invalid("axis index out of range");
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self::new(&v)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.v[..self.dim]
    }
    pub fn as_array(&self) -> [f64; 3] {
        self.v
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.v.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Euclidean distance `|ω - ν|` between two unit vectors.
    pub fn chord(&self, other: &Direction) -> f64 {
        self.v
            .iter()
            .zip(&other.v)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// `|ω·x|` and `|Π⊥_ω x|`.
#[inline]
pub(crate) fn split(dir: &Direction, x: &[f64]) -> (f64, f64) {
    let a = dir.dot(x);
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let b2 = (r2 - a * a).max(0.0);
    (a.abs(), b2.sqrt())
}

/// `A_{ω,σ} x = σ²(ω·x)ω + σ(x - (ω·x)ω)`.
pub fn dilate(dir: &Direction, sigma: f64, x: &[f64]) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return invalid(format!("dilation factor must be positive, got {sigma}"));
    }
    if x.len() != dir.dim {
        return invalid("point and direction dimensions differ");
    }
    let a = dir.dot(x);
    Ok(x.iter()
        .zip(dir.as_slice())
        .map(|(xi, wi)| sigma * sigma * a * wi + sigma * (xi - a * wi))
        .collect())
}

/// Closed form of `|x|_ω` from `σ⁴ = a² + σ²b²`.
#[inline]
pub(crate) fn norm_from_split(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let b2 = b * b;
    (0.5 * (b2 + (b2 * b2 + 4.0 * a * a).sqrt())).sqrt()
}

/// `|x|_ω`: the unique `σ > 0` with `|A_{ω,1/σ} x| = 1`, zero at the origin.
pub fn aniso_norm(dir: &Direction, x: &[f64]) -> f64 {
    let (a, b) = split(dir, x);
    norm_from_split(a, b)
}

/// Bisection for `|A_{ω,1/σ}x| = 1` on `[1e-8, 1e8]`.
pub fn aniso_norm_oracle(dir: &Direction, x: &[f64]) -> Result<f64> {
    let (a, b) = split(dir, x);
    if a == 0.0 && b == 0.0 {
        return invalid("oracle needs a nonzero point");
    }
    // |A_{ω,1/σ}x|² = a²/σ⁴ + b²/σ², strictly decreasing in σ.
    let g = |s: f64| (a * a / (s * s * s * s) + b * b / (s * s)).sqrt() - 1.0;
    let (mut lo, mut hi) = (1e-8, 1e8);
    if !(g(lo) > 0.0 && g(hi) < 0.0) {
        return Err(Error::Bracket(format!("no sign change on [1e-8, 1e8] for a={a}, b={b}")));
    }
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The norm `|·|_ω` as a value type.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnisoMetric {
    pub direction: Direction,
}

impl AnisoMetric {
    pub fn new(direction: Direction) -> Self {
        Self { direction }
    }
    pub fn norm(&self, x: &[f64]) -> f64 {
        aniso_norm(&self.direction, x)
    }
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.norm(&d)
    }
}

/// Volume of the Euclidean unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    match n {
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => invalid("dimension must be 2 or 3"),
    }
}

/// `|B^ω_τ| = τ^{n+1} |B_1|`.
pub fn ball_volume(tau: f64, n: usize) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0) {
        return invalid("ball radius must be positive");
    }
    Ok(tau.powi(n as i32 + 1) * unit_ball_volume(n)?)
}

/// Offsets (in cells) inside the largest ball, sorted by anisotropic
/// distance, with the cumulative count for each radius.
struct BallTable {
    offsets: Vec<isize>,
    counts: Vec<usize>,
}

fn ball_table(f: &TorusField, dir: &Direction, radii: &[f64]) -> Result<BallTable> {
    let g = f.grid();
    if dir.dim() != g.dim() {
        return invalid("direction and grid dimensions differ");
    }
    if radii.is_empty() {
        return invalid("maximal function needs at least one radius");
    }
    if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return invalid("radii must be positive");
    }
    let tmax = radii.iter().cloned().fold(0.0, f64::max);
    let h = g.spacing();
    let m = g.points() as i64;
    // |x|_ω < τ forces |x| < τ + τ².
    let reach = (((tmax + tmax * tmax) / h).ceil() as i64).min(m / 2);
    let span: Vec<i64> = (-reach..=reach).filter(|d| *d >= -m / 2 && *d < m / 2).collect();
    let mut cells: Vec<(f64, isize)> = Vec::new();
    let n = g.dim();
    let mut d = [0i64; 3];
    let total = span.len().pow(n as u32);
    for t in 0..total {
        let mut rest = t;
        for a in (0..n).rev() {
            d[a] = span[rest % span.len()];
            rest /= span.len();
        }
        let x: Vec<f64> = d[..n].iter().map(|&v| v as f64 * h).collect();
        let r = aniso_norm(dir, &x);
        if r < tmax {
            let flat = d[..n].iter().fold(0i64, |acc, &v| acc * m + v);
            cells.push((r, flat as isize));
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let norms: Vec<f64> = cells.iter().map(|c| c.0).collect();
    let counts = radii.iter().map(|&tau| norms.partition_point(|&r| r < tau)).collect();
    Ok(BallTable {
        offsets: cells.iter().map(|c| c.1).collect(),
        counts,
    })
}

fn maximal_at_index(abs: &[f64], g: &crate::grid::TorusGrid, table: &BallTable, idx: usize) -> f64 {
    let m = g.points() as i64;
    let n = g.dim();
    let base = g.unflatten(idx);
    let mut order: Vec<usize> = (0..table.counts.len()).collect();
    order.sort_by_key(|&i| table.counts[i]);
    let mut sum = 0.0;
    let mut taken = 0usize;
    let mut best: f64 = 0.0;
    for &ri in &order {
        let c = table.counts[ri];
        while taken < c {
            let mut off = table.offsets[taken] as i64;
            let mut target = 0i64;
            let mut mul = 1i64;
            // Decode the signed offset digit by digit from the last axis.
            let mut digits = [0i64; 3];
            for a in (0..n).rev() {
                let mut dgt = off.rem_euclid(m);
                if dgt >= m / 2 {
                    dgt -= m;
                }
                digits[a] = dgt;
                off = (off - dgt) / m;
            }
            for a in (0..n).rev() {
                target += (base[a] as i64 + digits[a]).rem_euclid(m) * mul;
                mul *= m;
            }
            sum += abs[target as usize];
            taken += 1;
        }
        if c > 0 {
            best = best.max(sum / c as f64);
        }
    }
    best
}

fn abs_values(f: &TorusField) -> Vec<f64> {
    let phys;
    let f = if f.space() == Space::Physical {
        f
    } else {
        phys = f.to_physical();
        &phys
    };
    f.values().iter().map(|v| v.norm()).collect()
}

/// `M_ω f(x) = max_τ` average of `|f|` over cells `y` with `|x - y|_ω < τ`.
pub fn maximal_aniso(f: &TorusField, dir: &Direction, radii: &[f64]) -> Result<TorusField> {
    let table = ball_table(f, dir, radii)?;
    let g = *f.grid();
    let abs = abs_values(f);
    let values = (0..g.len())
        .into_par_iter()
        .map(|i| crate::Complex64::new(maximal_at_index(&abs, &g, &table, i), 0.0))
        .collect();
    TorusField::new(g, values, Space::Physical)
}

/// [`maximal_aniso`] evaluated only at the given flat indices.
pub fn maximal_aniso_at(
    f: &TorusField,
    dir: &Direction,
    radii: &[f64],
    points: &[usize],
) -> Result<Vec<f64>> {
    let table = ball_table(f, dir, radii)?;
    let g = *f.grid();
    if points.iter().any(|&i| i >= g.len()) {
        return invalid("sample index outside the grid");
    }
    let abs = abs_values(f);
    Ok(points
        .par_iter()
        .map(|&i| maximal_at_index(&abs, &g, &table, i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::Complex64;

    #[test]
    fn dilation_examples() {
        let e1 = Direction::axis(2, 0).unwrap();
        assert_eq!(dilate(&e1, 2.0, &[1.0, 1.0]).unwrap(), vec![4.0, 2.0]);
        assert_eq!(dilate(&e1, 1.0, &[0.3, -2.0]).unwrap(), vec![0.3, -2.0]);
        assert!(dilate(&e1, 0.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn norm_examples() {
        let e1 = Direction::axis(2, 0).unwrap();
        assert!((aniso_norm(&e1, &[4.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!((aniso_norm(&e1, &[0.0, 3.0]) - 3.0).abs() < 1e-15);
        assert_eq!(aniso_norm(&e1, &[0.0, 0.0]), 0.0);
        assert!((aniso_norm_oracle(&e1, &[4.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
        assert!((aniso_norm_oracle(&e1, &[0.0, 3.0]).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_normal_component_branch_is_continuous() {
        let e1 = Direction::axis(2, 0).unwrap();
        for a in [1e-9, 1e-6, 1e-4, 1e-3] {
            let x = [a, 1.0];
            let r = aniso_norm(&e1, &x);
            let o = aniso_norm_oracle(&e1, &x).unwrap();
            assert!((r - o).abs() < 1e-11, "{a}: {r} vs {o}");
        }
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(1.0, 2).unwrap() - PI).abs() < 1e-15);
        assert!((ball_volume(2.0, 2).unwrap() - 8.0 * PI).abs() < 1e-12);
        assert!((ball_volume(2.0, 3).unwrap() - 16.0 * 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_of_constant() {
        let g = TorusGrid::new(2, 16, 4.0).unwrap();
        let f = TorusField::from_fn(g, |_| Complex64::new(-2.5, 0.0));
        let e = Direction::from_angle(0.4);
        let m = maximal_aniso(&f, &e, &[0.1, 0.5, 1.0]).unwrap();
        assert!(m.values().iter().all(|v| (v.re - 2.5).abs() < 1e-12));
        assert!(maximal_aniso(&f, &e, &[]).is_err());
    }
}
