//! The wave packet transform `W`, its left inverse `V`, the phase-space
//! pairing and the projection `WV`.
//!
//! A [`PhaseSpaceField`] is stored by its spatial Fourier coefficients:
//! the slice `(ω_j, σ_k)` of `Wf` is `(r ψ_{ω_j,σ_k})(D) f`, whose spectrum
//! lives on the support of `ψ_{ω_j,σ_k}`. Each slice keeps only those
//! coefficients, aligned with the index lists precomputed by the
//! [`RenormalizedFrame`]. Spatial values are produced on demand by pruned
//! inverse FFTs.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::frames::{rho_radial, DirectionalFamily, RadialProfile};
use crate::grid::{check_exponent, fft, norm, Space, TorusField, TorusGrid};
use crate::Complex64;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Spectral mass allowed outside the resolved band before inputs are rejected.
pub const BAND_TOLERANCE: f64 = 1e-8;

/// Scales per octave used unless configured otherwise.
pub const DEFAULT_PER_OCTAVE: usize = 16;

/// Geometric scale grid with uniform weights in `dσ/σ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleGrid {
    sigmas: Vec<f64>,
    per_octave: usize,
}

impl ScaleGrid {
    /// Scales `σ_k = 8·2^{-k/K}`, `k = 1, 2, ...`, down to the first scale
    /// with `σ_k · band_top <= 1/2`, which is every scale at which some
    /// packet meets the band.
    pub fn packets(per_octave: usize, band_top: f64) -> Result<Self> {
        if per_octave == 0 {
            return invalid("scales per octave must be positive");
        }
        if !(band_top.is_finite() && band_top > 0.0) {
            return invalid("band edge must be positive");
        }
        let k = per_octave as f64;
        let mut sigmas = Vec::new();
        let mut i = 1;
        loop {
            let s = 8.0 * (-(i as f64) / k).exp2();
            sigmas.push(s);
            if s * band_top <= 0.5 {
                break;
            }
            i += 1;
        }
        Ok(Self { sigmas, per_octave })
    }

    /// Scales `2^{-k/K}` covering every `σ` with `σr ∈ (1/2, 2)` for some
    /// `r ∈ [rmin, rmax]`.
    pub fn covering(per_octave: usize, rmin: f64, rmax: f64) -> Result<Self> {
        if per_octave == 0 || !(rmin > 0.0 && rmax >= rmin && rmax.is_finite()) {
            return invalid("invalid scale range");
        }
        let k = per_octave as f64;
        let lo = (k * (2.0 * rmax).log2()).floor() as i64 - 1;
        let hi = (k * (0.5 * rmin).log2()).ceil() as i64 + 1;
        let sigmas = (hi..=lo).map(|i| (-(i as f64) / k).exp2()).collect();
        Ok(Self { sigmas, per_octave })
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }
    pub fn len(&self) -> usize {
        self.sigmas.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }
    pub fn per_octave(&self) -> usize {
        self.per_octave
    }
    /// `ln 2 / K`.
    pub fn weight(&self) -> f64 {
        std::f64::consts::LN_2 / self.per_octave as f64
    }

    /// Indices `k` with `Ψ₀(σ_k r) != 0`.
    pub(crate) fn active(&self, prof: &RadialProfile, r: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
        if r <= 0.0 {
            return;
        }
        // σ is decreasing in k; Ψ₀(σr) != 0 needs σ ∈ (1/(2r), 2/r).
        let lo = self.sigmas.partition_point(|&s| s >= 2.0 / r);
        for (k, &s) in self.sigmas.iter().enumerate().skip(lo) {
            if s <= 0.5 / r {
                break;
            }
            let v = prof.psi0(s * r);
            if v != 0.0 {
                out.push((k, v));
            }
        }
    }
}

/// Sparse real multiplier: values at listed flat lattice indices.
#[derive(Clone, Debug, Default)]
pub(crate) struct SparseSymbol {
    pub idx: Vec<u32>,
    pub val: Vec<f64>,
}

/// Family, profile and scale grid on a fixed lattice, together with the
/// renormaliser `r(ξ)` that makes
/// `Σ_{j,k} w_j v_k (rψ_{ω_j,σ_k})(ξ)² + (rρ)(ξ)² = 1` on the resolved band.
#[derive(Debug)]
pub struct RenormalizedFrame {
    grid: TorusGrid,
    family: Arc<DirectionalFamily>,
    profile: RadialProfile,
    scales: ScaleGrid,
    slices: Vec<SparseSymbol>,
    low: SparseSymbol,
    renorm_range: (f64, f64),
    raw_range: (f64, f64),
}

#[derive(Serialize)]
pub struct FrameSummary {
    pub directions: usize,
    pub per_octave: usize,
    pub scales: usize,
    pub band_top: f64,
    pub xi_max: f64,
    pub angular: crate::frames::AngularProfile,
}

impl RenormalizedFrame {
    pub fn new(
        grid: TorusGrid,
        family: Arc<DirectionalFamily>,
        profile: RadialProfile,
        per_octave: usize,
    ) -> Result<Self> {
        Self::build(grid, family, profile, per_octave, None)
    }

    /// Frame whose renormaliser is scaled by `1 + eps` on every other
    /// lattice point; breaks the reproducing identity on purpose.
    pub fn with_perturbed_renorm(
        grid: TorusGrid,
        family: Arc<DirectionalFamily>,
        profile: RadialProfile,
        per_octave: usize,
        eps: f64,
    ) -> Result<Self> {
        Self::build(grid, family, profile, per_octave, Some(eps))
    }

    fn build(
        grid: TorusGrid,
        family: Arc<DirectionalFamily>,
        profile: RadialProfile,
        per_octave: usize,
        perturb: Option<f64>,
    ) -> Result<Self> {
        if family.dim() != grid.dim() {
            return Err(Error::GridMismatch("family and grid dimensions differ".into()));
        }
        if (family.xi_max() - grid.xi_max()).abs() > 1e-12 * grid.xi_max() {
            return Err(Error::GridMismatch("family was built for another lattice".into()));
        }
        let band_top = family.band_top();
        let scales = ScaleGrid::packets(per_octave, band_top)?;
        let nj = family.len();
        let ns = scales.len();
        let w = family.weight();
        let v = scales.weight();

        struct Local {
            slices: Vec<SparseSymbol>,
            low: SparseSymbol,
            rmin: f64,
            rmax: f64,
            smin: f64,
            smax: f64,
        }
        let chunk = 4096;
        let n = grid.len();
        let parts: Vec<Local> = (0..n.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut loc = Local {
                    slices: vec![SparseSymbol::default(); nj * ns],
                    low: SparseSymbol::default(),
                    rmin: f64::INFINITY,
                    rmax: 0.0,
                    smin: f64::INFINITY,
                    smax: 0.0,
                };
                let mut row = Vec::new();
                let mut act = Vec::new();
                for i in c * chunk..((c + 1) * chunk).min(n) {
                    let xi = grid.freq(i);
                    let xi = &xi[..grid.dim()];
                    let r = norm(xi);
                    if r > band_top {
                        continue;
                    }
                    family.phi_row_into(xi, &mut row);
                    scales.active(&profile, r, &mut act);
                    let rho = rho_radial(r);
                    let sphi: f64 = row.iter().map(|t| w * t.1 * t.1).sum();
                    let spsi: f64 = act.iter().map(|t| v * t.1 * t.1).sum();
                    let s = sphi * spsi + rho * rho;
                    let mut ren = 1.0 / s.sqrt();
                    if let Some(eps) = perturb {
                        if i % 2 == 1 {
                            ren *= 1.0 + eps;
                        }
                    }
                    loc.rmin = loc.rmin.min(ren);
                    loc.rmax = loc.rmax.max(ren);
                    if r >= 1.0 {
                        loc.smin = loc.smin.min(s);
                        loc.smax = loc.smax.max(s);
                    }
                    if rho != 0.0 {
                        loc.low.idx.push(i as u32);
                        loc.low.val.push(ren * rho);
                    }
                    for &(j, phi) in &row {
                        for &(k, psi) in &act {
                            let sl = &mut loc.slices[j * ns + k];
                            sl.idx.push(i as u32);
                            sl.val.push(ren * phi * psi);
                        }
                    }
                }
                loc
            })
            .collect();

        let mut slices = vec![SparseSymbol::default(); nj * ns];
        let mut low = SparseSymbol::default();
        let (mut rmin, mut rmax, mut smin, mut smax) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
        for part in parts {
            for (dst, src) in slices.iter_mut().zip(part.slices) {
                dst.idx.extend(src.idx);
                dst.val.extend(src.val);
            }
            low.idx.extend(part.low.idx);
            low.val.extend(part.low.val);
            rmin = rmin.min(part.rmin);
            rmax = rmax.max(part.rmax);
            smin = smin.min(part.smin);
            smax = smax.max(part.smax);
        }
        Ok(Self {
            grid,
            family,
            profile,
            scales,
            slices,
            low,
            renorm_range: (rmin, rmax),
            raw_range: (smin, smax),
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }
    pub fn family(&self) -> &Arc<DirectionalFamily> {
        &self.family
    }
    pub fn profile(&self) -> RadialProfile {
        self.profile
    }
    pub fn scales(&self) -> &ScaleGrid {
        &self.scales
    }
    pub fn band_top(&self) -> f64 {
        self.family.band_top()
    }
    /// Smallest and largest `r(ξ)` over the resolved band.
    pub fn renorm_range(&self) -> (f64, f64) {
        self.renorm_range
    }
    /// Range of the unnormalised `Σ w v ψ² + ρ²` over band points with `|ξ| >= 1`.
    pub fn raw_sum_range(&self) -> (f64, f64) {
        self.raw_range
    }

    pub fn summary(&self) -> FrameSummary {
        FrameSummary {
            directions: self.family.len(),
            per_octave: self.scales.per_octave(),
            scales: self.scales.len(),
            band_top: self.band_top(),
            xi_max: self.grid.xi_max(),
            angular: self.family.angular(),
        }
    }

    /// Number of stored coefficients across all slices.
    pub fn stored_len(&self) -> usize {
        self.slices.iter().map(|s| s.idx.len()).sum::<usize>() + self.low.idx.len()
    }

    /// `max |Σ w v (rψ)² + (rρ)² - 1|` over resolved-band lattice points.
    pub fn calderon_defect(&self) -> f64 {
        let mut acc = vec![0.0f64; self.grid.len()];
        let wv = self.family.weight() * self.scales.weight();
        for s in &self.slices {
            for (&i, &x) in s.idx.iter().zip(&s.val) {
                acc[i as usize] += wv * x * x;
            }
        }
        for (&i, &x) in self.low.idx.iter().zip(&self.low.val) {
            acc[i as usize] += x * x;
        }
        let top = self.band_top();
        (0..self.grid.len())
            .filter(|&i| norm(&self.grid.freq(i)[..self.grid.dim()]) <= top)
            .map(|i| (acc[i] - 1.0).abs())
            .fold(0.0, f64::max)
    }

    fn check_grid(&self, g: &TorusGrid) -> Result<()> {
        if !self.grid.same_lattice(g) {
            return Err(Error::GridMismatch("field and frame live on different lattices".into()));
        }
        Ok(())
    }
}

/// `F(x, ω_j, σ_k)` plus the low-frequency slice, stored spectrally.
#[derive(Clone, Debug)]
pub struct PhaseSpaceField {
    frame: Arc<RenormalizedFrame>,
    slices: Vec<Vec<Complex64>>,
    low: Vec<Complex64>,
}

/// Rejects fields with relative spectral energy above [`BAND_TOLERANCE`]
/// outside `|ξ| <= top`.
pub(crate) fn check_band(f: &TorusField, top: f64) -> Result<()> {
    let frac = f.energy_fraction_outside(|xi| norm(xi) <= top);
    if frac > BAND_TOLERANCE {
        return Err(Error::BandViolation { fraction: frac });
    }
    Ok(())
}

/// `Wf`: slices `(rψ_{ω_j,σ_k})(D)f` and low slice `(rρ)(D)f`.
pub fn analyze(f: &TorusField, frame: &Arc<RenormalizedFrame>) -> Result<PhaseSpaceField> {
    frame.check_grid(f.grid())?;
    let spec = f.to_frequency();
    check_band(&spec, frame.band_top())?;
    let c = spec.values();
    let apply = |s: &SparseSymbol| -> Vec<Complex64> {
        s.idx.iter().zip(&s.val).map(|(&i, &m)| c[i as usize] * m).collect()
    };
    let slices = frame.slices.par_iter().map(apply).collect();
    let low = apply(&frame.low);
    Ok(PhaseSpaceField {
        frame: Arc::clone(frame),
        slices,
        low,
    })
}

/// `VF = Σ_{j,k} w_j v_k (rψ_{ω_j,σ_k})(D)F_{j,k} + (rρ)(D)F_low`.
pub fn synthesize(field: &PhaseSpaceField, frame: &Arc<RenormalizedFrame>) -> Result<TorusField> {
    if !Arc::ptr_eq(&field.frame, frame) {
        return Err(Error::GridMismatch("phase-space field belongs to another frame".into()));
    }
    let g = frame.grid;
    let mut out = vec![ZERO; g.len()];
    let wv = frame.family.weight() * frame.scales.weight();
    for (s, vals) in frame.slices.iter().zip(&field.slices) {
        for ((&i, &m), x) in s.idx.iter().zip(&s.val).zip(vals) {
            out[i as usize] += x * (wv * m);
        }
    }
    for ((&i, &m), x) in frame.low.idx.iter().zip(&frame.low.val).zip(&field.low) {
        out[i as usize] += x * m;
    }
    TorusField::new(g, out, Space::Frequency).map(TorusField::into_physical)
}

/// `∫ F conj(G) dx dω dσ/σ`, with the low slice at unit weight.
pub fn pair(f: &PhaseSpaceField, g: &PhaseSpaceField) -> Result<Complex64> {
    if !Arc::ptr_eq(&f.frame, &g.frame) {
        return Err(Error::GridMismatch("pairing fields from different frames".into()));
    }
    let wv = f.frame.family.weight() * f.frame.scales.weight();
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
    };
    let s: Complex64 = f
        .slices
        .iter()
        .zip(&g.slices)
        .map(|(a, b)| dot(a, b))
        .sum();
    Ok(s * wv + dot(&f.low, &g.low))
}

/// `W V F`.
pub fn project(field: &PhaseSpaceField, frame: &Arc<RenormalizedFrame>) -> Result<PhaseSpaceField> {
    analyze(&synthesize(field, frame)?, frame)
}

impl PhaseSpaceField {
    pub fn zeros(frame: &Arc<RenormalizedFrame>) -> Self {
        Self {
            frame: Arc::clone(frame),
            slices: frame.slices.iter().map(|s| vec![ZERO; s.idx.len()]).collect(),
            low: vec![ZERO; frame.low.idx.len()],
        }
    }

    /// Field whose slices hold arbitrary spectra on the frame's supports,
    /// filled by `gen(slice, position)`; the low slice uses `slice = None`.
    pub fn from_fn<F>(frame: &Arc<RenormalizedFrame>, mut gen: F) -> Self
    where
        F: FnMut(Option<(usize, usize)>, usize) -> Complex64,
    {
        let ns = frame.scales.len();
        let slices = frame
            .slices
            .iter()
            .enumerate()
            .map(|(t, s)| (0..s.idx.len()).map(|p| gen(Some((t / ns, t % ns)), p)).collect())
            .collect();
        let low = (0..frame.low.idx.len()).map(|p| gen(None, p)).collect();
        Self {
            frame: Arc::clone(frame),
            slices,
            low,
        }
    }

    pub fn frame(&self) -> &Arc<RenormalizedFrame> {
        &self.frame
    }

    /// `F - G`.
    pub fn sub(&self, other: &PhaseSpaceField) -> Result<PhaseSpaceField> {
        if !Arc::ptr_eq(&self.frame, &other.frame) {
            return Err(Error::GridMismatch("subtracting fields from different frames".into()));
        }
        let d = |a: &Vec<Complex64>, b: &Vec<Complex64>| a.iter().zip(b).map(|(x, y)| x - y).collect();
        Ok(Self {
            frame: Arc::clone(&self.frame),
            slices: self.slices.iter().zip(&other.slices).map(|(a, b)| d(a, b)).collect(),
            low: d(&self.low, &other.low),
        })
    }

    pub fn scale(&self, c: Complex64) -> PhaseSpaceField {
        Self {
            frame: Arc::clone(&self.frame),
            slices: self.slices.iter().map(|s| s.iter().map(|x| x * c).collect()).collect(),
            low: self.low.iter().map(|x| x * c).collect(),
        }
    }

    /// Energy `w_j v_k ‖F_{j,k}‖²` of every slice, indexed `[j][k]`, and of
    /// the low slice.
    pub fn slice_energies(&self) -> (Vec<Vec<f64>>, f64) {
        let ns = self.frame.scales.len();
        let wv = self.frame.family.weight() * self.frame.scales.weight();
        let mut out = vec![vec![0.0; ns]; self.frame.family.len()];
        for (t, s) in self.slices.iter().enumerate() {
            out[t / ns][t % ns] = wv * s.iter().map(|x| x.norm_sqr()).sum::<f64>();
        }
        (out, self.low.iter().map(|x| x.norm_sqr()).sum())
    }

    /// Spatial samples of slice `(j, k)`.
    pub fn slice_physical(&self, j: usize, k: usize) -> Result<TorusField> {
        let fr = &self.frame;
        if j >= fr.family.len() || k >= fr.scales.len() {
            return invalid("slice index out of range");
        }
        let t = j * fr.scales.len() + k;
        let mut buf = vec![ZERO; fr.grid.len()];
        sparse_to_physical(&fr.grid, &fr.slices[t].idx, &self.slices[t], &mut buf);
        TorusField::new(fr.grid, buf, Space::Physical)
    }

    /// Writes the field with its `(ω, σ)` header: `dim, M: u32`, `L: f64`,
    /// `J, S: u32`, directions, scales, then for the low slice and each
    /// slice in `(j, k)` order a `u32` count followed by
    /// `(index: u32, re: f64, im: f64)` triples. Little endian.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let fr = &self.frame;
        let g = &fr.grid;
        w.write_all(&(g.dim() as u32).to_le_bytes())?;
        w.write_all(&(g.points() as u32).to_le_bytes())?;
        w.write_all(&g.side().to_le_bytes())?;
        w.write_all(&(fr.family.len() as u32).to_le_bytes())?;
        w.write_all(&(fr.scales.len() as u32).to_le_bytes())?;
        for d in fr.family.directions() {
            for x in d.as_slice() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        for s in fr.scales.sigmas() {
            w.write_all(&s.to_le_bytes())?;
        }
        let mut put = |s: &SparseSymbol, vals: &[Complex64]| -> Result<()> {
            w.write_all(&(vals.len() as u32).to_le_bytes())?;
            for (i, x) in s.idx.iter().zip(vals) {
                w.write_all(&i.to_le_bytes())?;
                w.write_all(&x.re.to_le_bytes())?;
                w.write_all(&x.im.to_le_bytes())?;
            }
            Ok(())
        };
        put(&fr.low, &self.low)?;
        for (s, v) in fr.slices.iter().zip(&self.slices) {
            put(s, v)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a field written by [`PhaseSpaceField::write_to`]; the header
    /// and every index list must match `frame`.
    pub fn read_from<R: Read>(mut r: R, frame: &Arc<RenormalizedFrame>) -> Result<Self> {
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        let mut u32_ = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut b4)?;
            Ok(u32::from_le_bytes(b4))
        };
        let bad = |m: &str| Error::Format(format!("phase-space header mismatch: {m}"));
        let g = frame.grid;
        if u32_(&mut r)? as usize != g.dim() || u32_(&mut r)? as usize != g.points() {
            return Err(bad("grid"));
        }
        r.read_exact(&mut b8)?;
        if f64::from_le_bytes(b8) != g.side() {
            return Err(bad("side"));
        }
        if u32_(&mut r)? as usize != frame.family.len() || u32_(&mut r)? as usize != frame.scales.len() {
            return Err(bad("slice counts"));
        }
        let mut f64_ = |r: &mut R| -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        for d in frame.family.directions() {
            for x in d.as_slice() {
                if f64_(&mut r)? != *x {
                    return Err(bad("directions"));
                }
            }
        }
        for s in frame.scales.sigmas() {
            if f64_(&mut r)? != *s {
                return Err(bad("scales"));
            }
        }
        let get = |r: &mut R, s: &SparseSymbol| -> Result<Vec<Complex64>> {
            let mut b4 = [0u8; 4];
            let mut b8 = [0u8; 8];
            r.read_exact(&mut b4)?;
            let n = u32::from_le_bytes(b4) as usize;
            if n != s.idx.len() {
                return Err(bad("slice length"));
            }
            let mut out = Vec::with_capacity(n);
            for &i in &s.idx {
                r.read_exact(&mut b4)?;
                if u32::from_le_bytes(b4) != i {
                    return Err(bad("slice index"));
                }
                r.read_exact(&mut b8)?;
                let re = f64::from_le_bytes(b8);
                r.read_exact(&mut b8)?;
                out.push(Complex64::new(re, f64::from_le_bytes(b8)));
            }
            Ok(out)
        };
        let low = get(&mut r, &frame.low)?;
        let slices = frame
            .slices
            .iter()
            .map(|s| get(&mut r, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frame: Arc::clone(frame),
            slices,
            low,
        })
    }
}

/// Inverse unitary FFT of a sparse spectrum into `buf` (overwritten).
pub(crate) fn sparse_to_physical(g: &TorusGrid, idx: &[u32], vals: &[Complex64], buf: &mut [Complex64]) {
    buf.fill(ZERO);
    if idx.is_empty() {
        return;
    }
    let scale = g.side().powf(-(g.dim() as f64) / 2.0);
    for (&i, v) in idx.iter().zip(vals) {
        buf[i as usize] = v * scale;
    }
    fft::fft_nd(buf, g.dim(), g.points(), true, Some(idx));
}

/// `Σ_x a(x)^{p/2} cellvol` raised to `1/p`, for each `p`, with `a >= 0`.
pub(crate) fn lp_of_squares(acc: &[f64], ps: &[f64], cellvol: f64) -> Vec<f64> {
    let max = acc.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return vec![0.0; ps.len()];
    }
    ps.iter()
        .map(|&p| {
            let e = 0.5 * p;
            let s: f64 = acc.iter().map(|a| (a / max).powf(e)).sum();
            max.sqrt() * (s * cellvol).powf(1.0 / p)
        })
        .collect()
}

/// Aggregates per-direction values as `(Σ_j w ‖·‖^q)^{1/q}`.
pub(crate) fn lq_over_directions(per_dir: &[f64], w: f64, q: f64) -> f64 {
    let max = per_dir.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = per_dir.iter().map(|v| w * (v / max).powf(q)).sum();
    max * s.powf(1.0 / q)
}

/// `‖(Σ_k v_k|F_{j,k}|² + |F_low|²)^{1/2}‖_{L^p_x}` for each direction and
/// each exponent in `ps`; indexed `[j][p]`.
pub fn direction_lp_norms(field: &PhaseSpaceField, ps: &[f64]) -> Result<Vec<Vec<f64>>> {
    for &p in ps {
        check_exponent(p)?;
    }
    let fr = &field.frame;
    let g = fr.grid;
    let ns = fr.scales.len();
    let v = fr.scales.weight();
    let mut low = vec![ZERO; g.len()];
    sparse_to_physical(&g, &fr.low.idx, &field.low, &mut low);
    let low_sq: Vec<f64> = low.iter().map(|x| x.norm_sqr()).collect();
    drop(low);
    Ok((0..fr.family.len())
        .into_par_iter()
        .map(|j| {
            let mut acc = low_sq.clone();
            let mut buf = vec![ZERO; g.len()];
            for k in 0..ns {
                let t = j * ns + k;
                let s = &fr.slices[t];
                let vals = &field.slices[t];
                if vals.iter().all(|x| *x == ZERO) {
                    continue;
                }
                sparse_to_physical(&g, &s.idx, vals, &mut buf);
                for (a, x) in acc.iter_mut().zip(&buf) {
                    *a += v * x.norm_sqr();
                }
            }
            lp_of_squares(&acc, ps, g.cell_volume())
        })
        .collect())
}

/// `L^q_ω L^p_x L²_σ` norm for each `(p, q)`.
pub fn lqp_norms(field: &PhaseSpaceField, pq: &[(f64, f64)]) -> Result<Vec<f64>> {
    for &(_, q) in pq {
        check_exponent(q)?;
    }
    let mut ps: Vec<f64> = Vec::new();
    for &(p, _) in pq {
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    let per = direction_lp_norms(field, &ps)?;
    let w = field.frame.family.weight();
    Ok(pq
        .iter()
        .map(|&(p, q)| {
            let pi = ps.iter().position(|&x| x == p).expect("collected");
            let col: Vec<f64> = per.iter().map(|row| row[pi]).collect();
            lq_over_directions(&col, w, q)
        })
        .collect())
}

pub fn lqp_norm(field: &PhaseSpaceField, p: f64, q: f64) -> Result<f64> {
    Ok(lqp_norms(field, &[(p, q)])?[0])
}
