//! Decoupling norms, square functions and critical exponents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aniso::{aniso_norm, Direction};
use crate::error::{invalid, Error, Result};
use crate::frames::{rho_radial, CapSystem, DirectionalFamily, RadialProfile, DEFAULT_BAND};
use crate::grid::{bracket, check_exponent, norm, TorusField};
use crate::transform::{check_band, lp_of_squares, lq_over_directions, sparse_to_physical, ScaleGrid};
use crate::Complex64;

pub use crate::transform::{lqp_norm, lqp_norms};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative spectral mass tolerated outside a declared support.
pub const SUPPORT_TOLERANCE: f64 = 1e-8;

/// Exponents `(p, q, s)` of `𝓗^{p,q;s}_dec`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub q: f64,
    pub s: f64,
}

impl NormSpec {
    pub fn new(p: f64, q: f64, s: f64) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(q)?;
        if !s.is_finite() {
            return invalid("smoothness must be finite");
        }
        Ok(Self { p, q, s })
    }

    /// Hölder conjugate exponents with opposite smoothness.
    pub fn dual(&self) -> Self {
        Self {
            p: self.p / (self.p - 1.0),
            q: self.q / (self.q - 1.0),
            s: -self.s,
        }
    }
}

/// Per-direction pieces of the continuous norm, for several `p` at once.
///
/// `dirs[j][i] = ‖⟨D⟩^s φ_{ω_j}(D) f‖_{p_i}` and `low[i] = ‖ρ(D) f‖_{p_i}`.
#[derive(Clone, Debug)]
pub struct DecProfile {
    pub ps: Vec<f64>,
    pub s: f64,
    pub weight: f64,
    pub low: Vec<f64>,
    pub dirs: Vec<Vec<f64>>,
}

impl DecProfile {
    fn index(&self, p: f64) -> Result<usize> {
        self.ps
            .iter()
            .position(|&x| x == p)
            .ok_or_else(|| Error::InvalidParameter(format!("exponent {p} was not evaluated")))
    }

    /// `‖ρ(D)f‖_p + (Σ_j w_j ‖⟨D⟩^s φ_j(D)f‖_p^q)^{1/q}`.
    pub fn value(&self, p: f64, q: f64) -> Result<f64> {
        check_exponent(q)?;
        let i = self.index(p)?;
        Ok(self.low[i] + self.directional(i, q))
    }

    /// The directional part alone.
    pub fn directional_part(&self, p: f64, q: f64) -> Result<f64> {
        check_exponent(q)?;
        let i = self.index(p)?;
        Ok(self.directional(i, q))
    }

    fn directional(&self, i: usize, q: f64) -> f64 {
        let col: Vec<f64> = self.dirs.iter().map(|r| r[i]).collect();
        lq_over_directions(&col, self.weight, q)
    }
}

/// Evaluates every `‖⟨D⟩^s φ_j(D) f‖_p` and `‖ρ(D)f‖_p` for `p ∈ ps`.
pub fn dec_profile(f: &TorusField, fam: &DirectionalFamily, s: f64, ps: &[f64]) -> Result<DecProfile> {
    for &p in ps {
        check_exponent(p)?;
    }
    let g = *f.grid();
    if g.dim() != fam.dim() || (g.xi_max() - fam.xi_max()).abs() > 1e-12 * g.xi_max() {
        return Err(Error::GridMismatch("family was built for another lattice".into()));
    }
    let spec = f.to_frequency();
    check_band(&spec, fam.band_top())?;
    let c = spec.values();
    let nj = fam.len();
    let mut lists: Vec<(Vec<u32>, Vec<Complex64>)> = vec![(Vec::new(), Vec::new()); nj];
    let mut low_idx = Vec::new();
    let mut low_val = Vec::new();
    let mut row = Vec::new();
    for (i, v) in c.iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        let xi = g.freq(i);
        let xi = &xi[..g.dim()];
        let r = norm(xi);
        let rho = rho_radial(r);
        if rho != 0.0 {
            low_idx.push(i as u32);
            low_val.push(v * rho);
        }
        fam.phi_row_into(xi, &mut row);
        if row.is_empty() {
            continue;
        }
        let sv = if s == 0.0 { *v } else { v * bracket(xi).powf(s) };
        for &(j, phi) in &row {
            lists[j].0.push(i as u32);
            lists[j].1.push(sv * phi);
        }
    }
    let cell = g.cell_volume();
    let lp_sparse = |idx: &[u32], vals: &[Complex64]| -> Vec<f64> {
        if idx.is_empty() {
            return vec![0.0; ps.len()];
        }
        let mut buf = vec![ZERO; g.len()];
        sparse_to_physical(&g, idx, vals, &mut buf);
        let sq: Vec<f64> = buf.iter().map(|x| x.norm_sqr()).collect();
        lp_of_squares(&sq, ps, cell)
    };
    let low = lp_sparse(&low_idx, &low_val);
    let dirs = lists.par_iter().map(|(i, v)| lp_sparse(i, v)).collect();
    Ok(DecProfile {
        ps: ps.to_vec(),
        s,
        weight: fam.weight(),
        low,
        dirs,
    })
}

/// `‖ρ(D)f‖_p + (Σ_j w_j ‖⟨D⟩^s φ_{ω_j}(D)f‖_p^q)^{1/q}`.
pub fn dec_norm_continuous(f: &TorusField, spec: NormSpec, fam: &DirectionalFamily) -> Result<f64> {
    dec_profile(f, fam, spec.s, &[spec.p])?.value(spec.p, spec.q)
}

/// `‖χ_ν(D) f‖_p` for every cap `ν` and `p ∈ ps`, indexed `[ν][p]`.
///
/// Planar caps act on the first two frequency coordinates, so they also
/// serve as angular sectors on a three-dimensional cone grid.
pub fn cap_lp_norms(f: &TorusField, caps: &CapSystem, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    for &p in ps {
        check_exponent(p)?;
    }
    let g = *f.grid();
    if caps.dim() > g.dim() {
        return invalid("cap system has higher dimension than the grid");
    }
    let spec = f.to_frequency();
    let mut lists: Vec<(Vec<u32>, Vec<Complex64>)> = vec![(Vec::new(), Vec::new()); caps.len()];
    for (i, v) in spec.values().iter().enumerate() {
        if *v == ZERO {
            continue;
        }
        let xi = g.freq(i);
        for (nu, w) in caps.weights_at(&xi[..caps.dim()]) {
            lists[nu].0.push(i as u32);
            lists[nu].1.push(v * w);
        }
    }
    let cell = g.cell_volume();
    Ok(lists
        .par_iter()
        .map(|(idx, vals)| {
            if idx.is_empty() {
                return vec![0.0; ps.len()];
            }
            let mut buf = vec![ZERO; g.len()];
            sparse_to_physical(&g, idx, vals, &mut buf);
            let sq: Vec<f64> = buf.iter().map(|x| x.norm_sqr()).collect();
            lp_of_squares(&sq, ps, cell)
        })
        .collect())
}

/// `(Σ_ν a_ν^q)^{1/q}` without overflow.
pub fn lq_sum(values: &[f64], q: f64) -> f64 {
    lq_over_directions(values, 1.0, q)
}

/// Exponent of `R` in the discrete norm: `s + (n-1)/2·(1/2 - 1/q)`.
pub fn discrete_weight_exponent(spec: NormSpec, n: usize) -> f64 {
    spec.s + 0.5 * (n as f64 - 1.0) * (0.5 - 1.0 / spec.q)
}

/// `R^{s+(n-1)/2(1/2-1/q)} (Σ_ν ‖χ_ν(D)f‖_p^q)^{1/q}` for `f̂` in
/// `R/2 <= |ξ| <= 2R`.
pub fn dec_norm_discrete(f: &TorusField, spec: NormSpec, caps: &CapSystem, r: f64) -> Result<f64> {
    if !(r.is_finite() && r > 0.0) {
        return invalid("annulus scale must be positive");
    }
    if caps.dim() != f.grid().dim() {
        return Err(Error::GridMismatch("cap and grid dimensions differ".into()));
    }
    let frac = f.energy_fraction_outside(|xi| {
        let t = norm(xi);
        t >= 0.5 * r * (1.0 - 1e-12) && t <= 2.0 * r * (1.0 + 1e-12)
    });
    if frac > SUPPORT_TOLERANCE {
        return Err(Error::SupportViolation { fraction: frac });
    }
    let per = cap_lp_norms(f, caps, &[spec.p])?;
    let col: Vec<f64> = per.iter().map(|v| v[0]).collect();
    let n = f.grid().dim();
    Ok(r.powf(discrete_weight_exponent(spec, n)) * lq_sum(&col, spec.q))
}

/// Which square function to evaluate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SquareFunction {
    /// `Ψ₀(σ|ξ|)²`
    Isotropic,
    /// `Ψ₀(σ|ξ|_ω)²`
    Parabolic(Direction),
}

/// `‖(Σ_k v_k |m_k(D) f|²)^{1/2}‖_p` for each `p`, with `m_k` the squared
/// profile at scale `σ_k`; the scale grid covers the support of `f̂`.
pub fn sqfn_norms(
    f: &TorusField,
    kind: SquareFunction,
    prof: RadialProfile,
    per_octave: usize,
    ps: &[f64],
) -> Result<Vec<f64>> {
    for &p in ps {
        check_exponent(p)?;
    }
    let g = *f.grid();
    let spec = f.to_frequency();
    check_band(&spec, DEFAULT_BAND * g.xi_max())?;
    let radius = |xi: &[f64]| match kind {
        SquareFunction::Isotropic => norm(xi),
        SquareFunction::Parabolic(w) => aniso_norm(&w, xi),
    };
    if let SquareFunction::Parabolic(w) = kind {
        if w.dim() != g.dim() {
            return invalid("direction and grid dimensions differ");
        }
    }
    let support: Vec<(u32, f64, Complex64)> = spec
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != ZERO)
        .filter_map(|(i, v)| {
            let r = radius(&g.freq(i)[..g.dim()]);
            (r > 0.0).then_some((i as u32, r, *v))
        })
        .collect();
    if support.is_empty() {
        return Ok(vec![0.0; ps.len()]);
    }
    let rmin = support.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    let rmax = support.iter().map(|t| t.1).fold(0.0, f64::max);
    let scales = ScaleGrid::covering(per_octave, rmin, rmax)?;
    let v = scales.weight();
    let parts: Vec<Vec<f64>> = scales
        .sigmas()
        .par_iter()
        .map(|&sigma| {
            let mut idx = Vec::new();
            let mut vals = Vec::new();
            for &(i, r, c) in &support {
                let a = prof.psi0(sigma * r);
                if a != 0.0 {
                    idx.push(i);
                    vals.push(c * (a * a));
                }
            }
            let mut sq = vec![0.0; g.len()];
            if !idx.is_empty() {
                let mut buf = vec![ZERO; g.len()];
                sparse_to_physical(&g, &idx, &vals, &mut buf);
                for (s, x) in sq.iter_mut().zip(&buf) {
                    *s = v * x.norm_sqr();
                }
            }
            sq
        })
        .collect();
    let mut acc = vec![0.0; g.len()];
    for part in parts {
        for (a, b) in acc.iter_mut().zip(part) {
            *a += b;
        }
    }
    Ok(lp_of_squares(&acc, ps, g.cell_volume()))
}

/// Default scale density of the square functions.
pub const SQFN_PER_OCTAVE: usize = 16;

/// Parabolic square function `‖(Σ_k v_k |Ψ₀(σ_k|D|_ω)² f|²)^{1/2}‖_p`.
pub fn parabolic_sqfn_norm(f: &TorusField, omega: Direction, p: f64) -> Result<f64> {
    Ok(sqfn_norms(
        f,
        SquareFunction::Parabolic(omega),
        RadialProfile::default(),
        SQFN_PER_OCTAVE,
        &[p],
    )?[0])
}

/// Isotropic square function `‖(Σ_k v_k |Ψ₀(σ_k|D|)² f|²)^{1/2}‖_p`.
pub fn isotropic_sqfn_norm(f: &TorusField, p: f64) -> Result<f64> {
    Ok(sqfn_norms(
        f,
        SquareFunction::Isotropic,
        RadialProfile::default(),
        SQFN_PER_OCTAVE,
        &[p],
    )?[0])
}

fn check_dim(n: usize) -> Result<f64> {
    if n < 2 {
        return invalid("dimension must be at least 2");
    }
    Ok(n as f64)
}

/// `s(p) = (n-1)/2 · |1/2 - 1/p|`.
pub fn exponent_s(p: f64, n: usize) -> Result<f64> {
    check_exponent(p)?;
    let n = check_dim(n)?;
    Ok(0.5 * (n - 1.0) * (0.5 - 1.0 / p).abs())
}

/// Decoupling exponent `d(p, q)` for `p, q >= 2`: `(n-1)/2·(1/2 - 1/q)`,
/// plus `(n-1)/4 - (n+1)/(2p)` once `p >= 2(n+1)/(n-1)`.
pub fn exponent_d(p: f64, q: f64, n: usize) -> Result<f64> {
    check_exponent(p)?;
    check_exponent(q)?;
    let nf = check_dim(n)?;
    if p < 2.0 || q < 2.0 {
        return invalid("the decoupling exponent is defined for p, q >= 2");
    }
    let tail = 0.5 * (nf - 1.0) * (0.5 - 1.0 / q);
    if p >= 2.0 * (nf + 1.0) / (nf - 1.0) {
        Ok(tail + (nf - 1.0) / 4.0 - (nf + 1.0) / (2.0 * p))
    } else {
        Ok(tail)
    }
}

/// `α(p)`: `(n-1)/4 - (n+1)/(2p)` for `p >= 2(n+1)/(n-1)`,
/// `(n-1)/(2p) - 1` for `p <= 2(n+1)/(n+3)`, and 0 in between.
///
/// The lower branch wins at `p = 2(n+1)/(n+3)`.
pub fn exponent_alpha(p: f64, n: usize) -> Result<f64> {
    check_exponent(p)?;
    let nf = check_dim(n)?;
    let upper = 2.0 * (nf + 1.0) / (nf - 1.0);
    let lower = 2.0 * (nf + 1.0) / (nf + 3.0);
    if p >= upper {
        Ok((nf - 1.0) / 4.0 - (nf + 1.0) / (2.0 * p))
    } else if p <= lower * (1.0 + 1e-12) {
        Ok((nf - 1.0) / (2.0 * p) - 1.0)
    } else {
        Ok(0.0)
    }
}

/// `σ(p) = 2 s(p) - 1/p` for `p >= 2n/(n-1)`, else 0.
pub fn exponent_sigma(p: f64, n: usize) -> Result<f64> {
    check_exponent(p)?;
    let nf = check_dim(n)?;
    if p >= 2.0 * nf / (nf - 1.0) {
        Ok(2.0 * exponent_s(p, n)? - 1.0 / p)
    } else {
        Ok(0.0)
    }
}

/// `(n+1)/2 · (1/p₁ - 1/p₂)`.
pub fn fractional_exponent(p1: f64, p2: f64, n: usize) -> Result<f64> {
    check_exponent(p1)?;
    check_exponent(p2)?;
    let nf = check_dim(n)?;
    Ok(0.5 * (nf + 1.0) * (1.0 / p1 - 1.0 / p2))
}

/// Grid helper: whether `f̂` vanishes (to tolerance) outside `R/2 <= |ξ| <= 2R`.
pub fn in_dyadic_annulus(f: &TorusField, r: f64) -> bool {
    f.energy_fraction_outside(|xi| {
        let t = norm(xi);
        t >= 0.5 * r && t <= 2.0 * r
    }) <= SUPPORT_TOLERANCE
}
