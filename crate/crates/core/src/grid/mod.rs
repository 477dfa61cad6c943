//! Periodic grids, sampled fields and Fourier multipliers.
//!
//! Frequencies are `ξ = 2πk/L` with `k ∈ [-M/2, M/2)^n`. Coefficients use
//! the unitary normalisation
//!
//! ```text
//! c_k = L^{n/2} M^{-n} Σ_j f_j e^{-2πi j·k/M},   f(x) = L^{-n/2} Σ_k c_k e^{iξ_k·(x - origin)}
//! ```
//!
//! so that `Σ|c_k|² = Σ|f_j|² (L/M)^n`.

pub(crate) mod fft;
mod io;
mod resample;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub use io::{read_field, read_field_from, write_field, write_field_csv, write_field_to};
pub use resample::{oversample, resample_compose};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// A periodic grid `[origin, origin + L)^n` with `M` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points: usize,
    side: f64,
    origin: [f64; 3],
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize, side: f64) -> Result<Self> {
        if !(dim == 2 || dim == 3) {
            return invalid(format!("dimension must be 2 or 3, got {dim}"));
        }
        if points < 2 || !points.is_power_of_two() {
            return invalid(format!("points per axis must be a power of two >= 2, got {points}"));
        }
        if !(side.is_finite() && side > 0.0) {
            return invalid(format!("side length must be positive, got {side}"));
        }
        if points.checked_pow(dim as u32).map_or(true, |n| n > u32::MAX as usize) {
            return invalid("grid too large");
        }
        Ok(Self {
            dim,
            points,
            side,
            origin: [0.0; 3],
        })
    }

    /// Same grid with its lower corner moved to `origin`.
    pub fn with_origin(mut self, origin: &[f64]) -> Result<Self> {
        if origin.len() != self.dim || origin.iter().any(|v| !v.is_finite()) {
            return invalid("origin must be a finite point of the grid dimension");
        }
        self.origin = [0.0; 3];
        self.origin[..self.dim].copy_from_slice(origin);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn side(&self) -> f64 {
        self.side
    }
    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.dim]
    }
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    pub fn spacing(&self) -> f64 {
        self.side / self.points as f64
    }
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }
    /// Lattice step `2π/L` in frequency.
    pub fn freq_step(&self) -> f64 {
        2.0 * PI / self.side
    }
    /// Nyquist bound `πM/L`.
    pub fn xi_max(&self) -> f64 {
        PI * self.points as f64 / self.side
    }

    /// Same dimension and resolution (origins may differ).
    pub fn same_lattice(&self, other: &TorusGrid) -> bool {
        self.dim == other.dim && self.points == other.points && self.side == other.side
    }

    /// Per-axis array indices of a flat index (row-major, last axis fastest).
    #[inline]
    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let m = self.points;
        let mut out = [0usize; 3];
        let mut rest = idx;
        for a in (0..self.dim).rev() {
            out[a] = rest % m;
            rest /= m;
        }
        out
    }

    #[inline]
    pub fn flatten(&self, ix: &[usize]) -> usize {
        ix.iter().take(self.dim).fold(0, |acc, &i| acc * self.points + i)
    }

    /// Signed wavenumber of an array index along one axis.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Array index of a signed wavenumber in `[-M/2, M/2)`.
    #[inline]
    pub fn index_of_wavenumber(&self, k: i64) -> Option<usize> {
        let m = self.points as i64;
        if k < -m / 2 || k >= m / 2 {
            None
        } else {
            Some(k.rem_euclid(m) as usize)
        }
    }

    /// Frequency `ξ` at a flat index; unused trailing components are zero.
    #[inline]
    pub fn freq(&self, idx: usize) -> [f64; 3] {
        let ix = self.unflatten(idx);
        let step = self.freq_step();
        let mut xi = [0.0; 3];
        for a in 0..self.dim {
            xi[a] = step * self.wavenumber(ix[a]) as f64;
        }
        xi
    }

    /// Physical sample point at a flat index.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ix = self.unflatten(idx);
        let h = self.spacing();
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.origin[a] + h * ix[a] as f64;
        }
        x
    }
}

/// Which representation a field's values are in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    Physical,
    Frequency,
}

/// Complex samples on a [`TorusGrid`], either in physical or frequency space.
#[derive(Clone, Debug)]
pub struct TorusField {
    grid: TorusGrid,
    values: Vec<Complex64>,
    space: Space,
}

impl TorusField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>, space: Space) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values, space })
    }

    pub fn zeros(grid: TorusGrid, space: Space) -> Self {
        Self {
            grid,
            values: vec![ZERO; grid.len()],
            space,
        }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)[..grid.dim]))
            .collect();
        Self {
            grid,
            values,
            space: Space::Physical,
        }
    }

    /// Builds frequency coefficients from a function of `ξ`.
    pub fn from_spectrum<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.freq(i)[..grid.dim]))
            .collect();
        Self {
            grid,
            values,
            space: Space::Frequency,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn space(&self) -> Space {
        self.space
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }


    /// Unitary forward transform; a no-op for fields already in frequency space.
    pub fn into_frequency(mut self) -> Self {
        if self.space == Space::Frequency {
            return self;
        }
        let g = self.grid;
        fft::fft_nd(&mut self.values, g.dim, g.points, false, None);
        let scale = g.side.powf(g.dim as f64 / 2.0) / g.len() as f64;
        self.values.iter_mut().for_each(|v| *v *= scale);
        self.space = Space::Frequency;
        self
    }

    /// Inverse of [`TorusField::into_frequency`].
    pub fn into_physical(mut self) -> Self {
        if self.space == Space::Physical {
            return self;
        }
        let g = self.grid;
        fft::fft_nd(&mut self.values, g.dim, g.points, true, None);
        let scale = g.side.powf(-(g.dim as f64) / 2.0);
        self.values.iter_mut().for_each(|v| *v *= scale);
        self.space = Space::Physical;
        self
    }

    pub fn to_frequency(&self) -> Self {
        self.clone().into_frequency()
    }
    pub fn to_physical(&self) -> Self {
        self.clone().into_physical()
    }

    /// L² norm, valid in either space by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        match self.space {
            Space::Physical => (s * self.grid.cell_volume()).sqrt(),
            Space::Frequency => s.sqrt(),
        }
    }

    /// `⟨f, g⟩ = ∫ f conj(g)`, evaluated in whichever space both share.
    pub fn inner(&self, other: &TorusField) -> Result<Complex64> {
        if !self.grid.same_lattice(&other.grid) {
            return Err(Error::GridMismatch("inner product of fields on different grids".into()));
        }
        let (a, b);
        let (x, y) = if self.space == other.space {
            (self, other)
        } else {
            a = self.to_frequency();
            b = other.to_frequency();
            (&a, &b)
        };
        let s: Complex64 = x.values.iter().zip(&y.values).map(|(u, v)| u * v.conj()).sum();
        Ok(match x.space {
            Space::Physical => s * self.grid.cell_volume(),
            Space::Frequency => s,
        })
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= c);
        self
    }

    /// `self + c·other`, both in the same space on the same lattice.
    pub fn add_scaled(mut self, other: &TorusField, c: Complex64) -> Result<Self> {
        if !self.grid.same_lattice(&other.grid) || self.space != other.space {
            return Err(Error::GridMismatch("adding fields on different grids or spaces".into()));
        }
        for (u, v) in self.values.iter_mut().zip(&other.values) {
            *u += c * v;
        }
        Ok(self)
    }

    /// Relative spectral energy at lattice points where `keep(ξ)` is false.
    pub fn energy_fraction_outside<F>(&self, keep: F) -> f64
    where
        F: Fn(&[f64]) -> bool + Sync,
    {
        let spec;
        let f = if self.space == Space::Frequency {
            self
        } else {
            spec = self.to_frequency();
            &spec
        };
        let g = f.grid;
        let (total, outside) = f
            .values
            .par_iter()
            .enumerate()
            .map(|(i, v)| {
                let e = v.norm_sqr();
                if keep(&g.freq(i)[..g.dim]) {
                    (e, 0.0)
                } else {
                    (e, e)
                }
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}

/// Where a symbol may be nonzero; lattice points outside are set to zero
/// without evaluating the symbol.
#[derive(Clone, Debug, PartialEq)]
pub enum SupportHint {
    /// `|ξ| <= radius`
    Ball { radius: f64 },
    /// `inner <= |ξ| <= outer`
    Annulus { inner: f64, outer: f64 },
    /// `|ξ/|ξ| - axis| <= chord`, optionally intersected with an annulus.
    Cone {
        axis: [f64; 3],
        chord: f64,
        inner: f64,
        outer: f64,
    },
}

impl SupportHint {
    pub fn contains(&self, xi: &[f64]) -> bool {
        let r = norm(xi);
        let tol = 1e-12;
        match *self {
            SupportHint::Ball { radius } => r <= radius * (1.0 + tol),
            SupportHint::Annulus { inner, outer } => {
                r >= inner * (1.0 - tol) && r <= outer * (1.0 + tol)
            }
            SupportHint::Cone {
                axis,
                chord,
                inner,
                outer,
            } => {
                if r == 0.0 || r < inner * (1.0 - tol) || r > outer * (1.0 + tol) {
                    return false;
                }
                let d2: f64 = xi
                    .iter()
                    .zip(axis.iter())
                    .map(|(x, a)| (x / r - a).powi(2))
                    .sum();
                d2.sqrt() <= chord * (1.0 + tol)
            }
        }
    }
}

pub type SymbolFn = dyn Fn(&[f64]) -> Option<Complex64> + Send + Sync;

/// A Fourier multiplier `m(ξ)`.
///
/// The evaluator may return `None` where the symbol is undefined; a value
/// declared for `ξ = 0` takes precedence over the evaluator there.
#[derive(Clone)]
pub struct Symbol {
    eval: Arc<SymbolFn>,
    at_origin: Option<Complex64>,
    support: Option<SupportHint>,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("at_origin", &self.at_origin)
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl Symbol {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> Option<Complex64> + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(f),
            at_origin: None,
            support: None,
        }
    }

    /// Real-valued symbol defined everywhere.
    pub fn real<F>(f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(move |xi| Some(Complex64::new(f(xi), 0.0)))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(move |_| Some(c))
    }

    pub fn with_origin_value(mut self, v: Complex64) -> Self {
        self.at_origin = Some(v);
        self
    }

    pub fn with_support(mut self, hint: SupportHint) -> Self {
        self.support = Some(hint);
        self
    }

    pub fn support(&self) -> Option<&SupportHint> {
        self.support.as_ref()
    }

    /// Value at `ξ`, honouring the declared origin value and support hint.
    pub fn evaluate(&self, xi: &[f64]) -> Option<Complex64> {
        if xi.iter().all(|&v| v == 0.0) {
            if let Some(v) = self.at_origin {
                return Some(v);
            }
        }
        if let Some(h) = &self.support {
            if !h.contains(xi) {
                return Some(ZERO);
            }
        }
        (self.eval)(xi)
    }

    /// `⟨ξ⟩^s = (1 + |ξ|²)^{s/2}`.
    pub fn bracket_power(s: f64) -> Self {
        Self::real(move |xi| bracket(xi).powf(s))
    }

    /// Half-wave propagator `e^{it|ξ|}`.
    pub fn half_wave(t: f64) -> Self {
        Self::new(move |xi| Some(Complex64::from_polar(1.0, t * norm(xi))))
    }

    /// Indicator of the closed annulus `inner <= |ξ| <= outer`.
    pub fn annulus_indicator(inner: f64, outer: f64) -> Self {
        Self::constant(Complex64::new(1.0, 0.0)).with_support(SupportHint::Annulus { inner, outer })
    }
}

#[inline]
pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `⟨ξ⟩ = (1 + |ξ|²)^{1/2}`.
#[inline]
pub fn bracket(xi: &[f64]) -> f64 {
    (1.0 + xi.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Applies `m(D)`; the result is in the same space as `f`.
pub fn apply_multiplier(f: &TorusField, m: &Symbol) -> Result<TorusField> {
    let space = f.space;
    let mut spec = f.to_frequency();
    let g = spec.grid;
    let undefined = spec
        .values
        .par_iter_mut()
        .enumerate()
        .map(|(i, v)| {
            let xi = g.freq(i);
            match m.evaluate(&xi[..g.dim]) {
                Some(mv) => {
                    *v *= mv;
                    None
                }
                None => Some(i),
            }
        })
        .reduce(|| None, |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        });
    if let Some(i) = undefined {
        return Err(Error::UndefinedSymbol(g.freq(i)[..g.dim].to_vec()));
    }
    Ok(match space {
        Space::Physical => spec.into_physical(),
        Space::Frequency => spec,
    })
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return invalid(format!("exponent must lie in (1, inf), got {p}"));
    }
    Ok(())
}

/// `(Σ|f(x)|^p cellvol)^{1/p}`.
pub fn lp_norm(f: &TorusField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    let phys;
    let f = if f.space == Space::Physical {
        f
    } else {
        phys = f.to_physical();
        &phys
    };
    Ok(lp_of_values(&f.values, p, f.grid.cell_volume()))
}

pub(crate) fn lp_of_values(values: &[Complex64], p: f64, cellvol: f64) -> f64 {
    let max = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = values.iter().map(|v| (v.norm() / max).powf(p)).sum();
    max * (s * cellvol).powf(1.0 / p)
}

/// `‖⟨D⟩^s f‖_p`.
pub fn sobolev_norm(f: &TorusField, s: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if s == 0.0 {
        return lp_norm(f, p);
    }
    lp_norm(&apply_multiplier(f, &Symbol::bracket_power(s))?, p)
}
