//! Batteries for the frame, norm and equivalence properties, and the
//! self-test that runs all of them at small sizes.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::decoupling::{run_decoupling_cone, ConeConfig};
use super::fields::{gaussian_band_field, ModelKind, RandomFieldModel, SupportShape};
use super::propagation::band_grid;
use super::report::{fit_loglog, Check, ExperimentReport};
use crate::aniso::{aniso_norm, aniso_norm_oracle, split, Direction};
use crate::error::{invalid, Result};
use crate::frames::{build_caps, AngularProfile, DirectionalFamily, RadialProfile, DEFAULT_BAND};
use crate::grid::{apply_multiplier, Symbol, TorusField, TorusGrid};
use crate::norms::{
    cap_lp_norms, dec_profile, discrete_weight_exponent, exponent_alpha, exponent_d, exponent_s,
    exponent_sigma, lq_sum, sqfn_norms, NormSpec, SquareFunction, SQFN_PER_OCTAVE,
};
use crate::transform::{analyze, lqp_norms, pair, synthesize, RenormalizedFrame, DEFAULT_PER_OCTAVE};
use crate::Complex64;

fn frame_on(grid: TorusGrid, perturb: Option<f64>) -> Result<Arc<RenormalizedFrame>> {
    let fam = Arc::new(DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard)?);
    let prof = RadialProfile::default();
    Ok(Arc::new(match perturb {
        None => RenormalizedFrame::new(grid, fam, prof, DEFAULT_PER_OCTAVE)?,
        Some(eps) => RenormalizedFrame::with_perturbed_renorm(grid, fam, prof, DEFAULT_PER_OCTAVE, eps)?,
    }))
}

/// Worst-case frame identities over a battery of resolved-band fields.
#[derive(Clone, Debug, Serialize)]
pub struct FrameExactness {
    pub calderon_defect: f64,
    /// `max |‖Wf‖₂/‖f‖₂ - 1|`
    pub plancherel: f64,
    /// `max ‖VWf - f‖₂/‖f‖₂`
    pub reconstruction: f64,
}

pub fn frame_exactness(
    points: usize,
    side: f64,
    fields: usize,
    seed: u64,
    perturb: Option<f64>,
) -> Result<FrameExactness> {
    let grid = TorusGrid::new(2, points, side)?;
    let frame = frame_on(grid, perturb)?;
    let mut out = FrameExactness {
        calderon_defect: frame.calderon_defect(),
        plancherel: 0.0,
        reconstruction: 0.0,
    };
    for i in 0..fields {
        let f = gaussian_band_field(&grid, 0.0, frame.band_top(), seed ^ i as u64)?;
        let w = analyze(&f, &frame)?;
        let nf = f.l2_norm();
        let nw = pair(&w, &w)?.re.sqrt();
        out.plancherel = out.plancherel.max((nw / nf - 1.0).abs());
        let back = synthesize(&w, &frame)?;
        let err = back.into_physical().add_scaled(&f.to_physical(), Complex64::new(-1.0, 0.0))?.l2_norm() / nf;
        out.reconstruction = out.reconstruction.max(err);
    }
    Ok(out)
}

/// `min` and `max` over the battery of `‖Wf‖_{L^q L^p L²} / ‖f‖_{p,q;0}`.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichResult {
    pub pairs: Vec<(f64, f64)>,
    pub min_ratio: Vec<f64>,
    pub max_ratio: Vec<f64>,
}

pub fn norm_sandwich(
    points: usize,
    side: f64,
    pairs: &[(f64, f64)],
    fields: usize,
    seed: u64,
) -> Result<SandwichResult> {
    let grid = TorusGrid::new(2, points, side)?;
    let frame = frame_on(grid, None)?;
    let ps = distinct(pairs.iter().map(|t| t.0));
    let mut out = SandwichResult {
        pairs: pairs.to_vec(),
        min_ratio: vec![f64::INFINITY; pairs.len()],
        max_ratio: vec![0.0; pairs.len()],
    };
    for i in 0..fields {
        let f = gaussian_band_field(&grid, 0.0, frame.band_top(), seed ^ i as u64)?;
        let w = analyze(&f, &frame)?;
        let lqp = lqp_norms(&w, pairs)?;
        let prof = dec_profile(&f, frame.family(), 0.0, &ps)?;
        for (k, &(p, q)) in pairs.iter().enumerate() {
            let r = lqp[k] / prof.value(p, q)?;
            out.min_ratio[k] = out.min_ratio[k].min(r);
            out.max_ratio[k] = out.max_ratio[k].max(r);
        }
    }
    Ok(out)
}

fn distinct(it: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = Vec::new();
    for x in it {
        if !v.contains(&x) {
            v.push(x);
        }
    }
    v
}

/// `dec_norm_discrete / dec_norm_continuous` per `R`, pair and trial, on
/// Gaussian fields in `R/2 <= |ξ| <= 2R` with `s = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceTable {
    pub r_list: Vec<f64>,
    pub pairs: Vec<(f64, f64)>,
    /// `[R][pair][trial]`
    pub ratios: Vec<Vec<Vec<f64>>>,
}

impl EquivalenceTable {
    /// Mean over trials, `[pair][R]`.
    pub fn means(&self) -> Vec<Vec<f64>> {
        (0..self.pairs.len())
            .map(|k| {
                self.ratios
                    .iter()
                    .map(|row| row[k].iter().sum::<f64>() / row[k].len() as f64)
                    .collect()
            })
            .collect()
    }
}

pub fn discrete_equivalence(
    points: usize,
    r_list: &[f64],
    pairs: &[(f64, f64)],
    trials: usize,
    seed: u64,
) -> Result<EquivalenceTable> {
    let ps = distinct(pairs.iter().map(|t| t.0));
    let mut ratios = Vec::new();
    for &r in r_list {
        let grid = band_grid(2, points, 2.0 * r)?;
        let fam = DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard)?;
        let caps = build_caps(r, 2)?;
        let mut row = vec![Vec::new(); pairs.len()];
        for t in 0..trials {
            let f = gaussian_band_field(&grid, 0.5 * r, 2.0 * r, seed ^ t as u64)?;
            let cont = dec_profile(&f, &fam, 0.0, &ps)?;
            let pieces = cap_lp_norms(&f, &caps, &ps)?;
            for (k, &(p, q)) in pairs.iter().enumerate() {
                let pi = ps.iter().position(|&x| x == p).expect("collected");
                let col: Vec<f64> = pieces.iter().map(|v| v[pi]).collect();
                let w = discrete_weight_exponent(NormSpec::new(p, q, 0.0)?, 2);
                let disc = r.powf(w) * lq_sum(&col, q);
                row[k].push(disc / cont.value(p, q)?);
            }
        }
        ratios.push(row);
    }
    Ok(EquivalenceTable {
        r_list: r_list.to_vec(),
        pairs: pairs.to_vec(),
        ratios,
    })
}

/// Parabolic over isotropic square function, `[R][p]`, for the plate
/// `R/2 <= |ξ| <= 2R`, `|ξ̂ - e₁| <= R^{-1/2}`.
pub fn equivpar(points: usize, r_list: &[f64], ps: &[f64], seed: u64) -> Result<Vec<Vec<f64>>> {
    let omega = Direction::from_angle(0.0);
    let prof = RadialProfile::default();
    r_list
        .iter()
        .map(|&r| {
            let grid = band_grid(2, points, 2.0 * r)?;
            let f = RandomFieldModel::new(
                ModelKind::GaussianCaps,
                seed,
                SupportShape::Plate {
                    direction: omega,
                    inner: 0.5 * r,
                    outer: 2.0 * r,
                    chord: r.powf(-0.5),
                },
            )
            .generate(&grid, None)?;
            let par = sqfn_norms(&f, SquareFunction::Parabolic(omega), prof, SQFN_PER_OCTAVE, ps)?;
            let iso = sqfn_norms(&f, SquareFunction::Isotropic, prof, SQFN_PER_OCTAVE, ps)?;
            Ok(par.iter().zip(&iso).map(|(a, b)| a / b).collect())
        })
        .collect()
}

/// Largest `|⟨Wf, Wg⟩| / (‖f‖_{p,q;s} ‖g‖_{p',q';-s})` per pair over
/// correlated pairs `g = f + h`.
pub fn duality_constants(
    points: usize,
    side: f64,
    pairs: &[(f64, f64)],
    s: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let grid = TorusGrid::new(2, points, side)?;
    let frame = frame_on(grid, None)?;
    let fam = frame.family();
    let ps = distinct(pairs.iter().map(|t| t.0));
    let duals: Vec<(f64, f64)> = pairs.iter().map(|&(p, q)| (p / (p - 1.0), q / (q - 1.0))).collect();
    let pd = distinct(duals.iter().map(|t| t.0));
    let mut worst = vec![0.0f64; pairs.len()];
    for i in 0..count {
        let f = gaussian_band_field(&grid, 0.0, frame.band_top(), seed ^ (2 * i) as u64)?;
        let h = gaussian_band_field(&grid, 0.0, frame.band_top(), seed ^ (2 * i + 1) as u64)?;
        let g = f.clone().add_scaled(&h, Complex64::new(0.5, 0.0))?;
        let pg = pair(&analyze(&f, &frame)?, &analyze(&g, &frame)?)?.norm();
        let nf = dec_profile(&f, fam, s, &ps)?;
        let ng = dec_profile(&g, fam, -s, &pd)?;
        for (k, (&(p, q), &(pp, qq))) in pairs.iter().zip(&duals).enumerate() {
            worst[k] = worst[k].max(pg / (nf.value(p, q)? * ng.value(pp, qq)?));
        }
    }
    Ok(worst)
}

/// Smallest `‖f‖_{p,q;s} / ‖f‖_{p,v;r}` over the battery and every
/// ordered choice with `q >= v`, `s >= r` from the given lists, other than
/// `(q, s) = (v, r)`.
pub fn monotonicity_margin(
    points: usize,
    side: f64,
    p: f64,
    qs: &[f64],
    ss: &[f64],
    fields: usize,
    seed: u64,
) -> Result<f64> {
    let grid = TorusGrid::new(2, points, side)?;
    let fam = DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard)?;
    let mut worst = f64::INFINITY;
    for i in 0..fields {
        let f = gaussian_band_field(&grid, 0.0, fam.band_top(), seed ^ i as u64)?;
        let profiles = ss
            .iter()
            .map(|&s| dec_profile(&f, &fam, s, &[p]))
            .collect::<Result<Vec<_>>>()?;
        for (a, &s) in ss.iter().enumerate() {
            for (b, &r) in ss.iter().enumerate() {
                if s < r {
                    continue;
                }
                for &q in qs {
                    for &v in qs {
                        if q < v || (q == v && a == b) {
                            continue;
                        }
                        let big = profiles[a].value(p, q)?;
                        let small = profiles[b].value(p, v)?;
                        worst = worst.min(big / small);
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// `(label, computed, expected)` for the closed-form exponents.
pub fn exponent_table() -> Result<Vec<(&'static str, f64, f64)>> {
    Ok(vec![
        ("s(6), n=2", exponent_s(6.0, 2)?, 1.0 / 6.0),
        ("d(6,6), n=2", exponent_d(6.0, 6.0, 2)?, 1.0 / 6.0),
        ("d(4,2), n=2", exponent_d(4.0, 2.0, 2)?, 0.0),
        ("alpha(10), n=2", exponent_alpha(10.0, 2)?, 0.1),
        ("alpha(6/5), n=2", exponent_alpha(6.0 / 5.0, 2)?, -7.0 / 12.0),
        ("sigma(6), n=2", exponent_sigma(6.0, 2)?, 1.0 / 6.0),
    ])
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestConfig {
    pub seed: u64,
    /// Scales the renormaliser by `1 + fault` on every other lattice point.
    pub fault: Option<f64>,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        Self { seed: 1, fault: None }
    }
}

/// Every module's invariants at small sizes (grids up to 128², cone 64³).
pub fn run_selftest(cfg: &SelftestConfig) -> Result<ExperimentReport> {
    if let Some(e) = cfg.fault {
        if !(e.is_finite() && e != 0.0) {
            return invalid("fault size must be finite and nonzero");
        }
    }
    let mut rep = ExperimentReport::new("selftest", cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // grid
    let g = TorusGrid::new(2, 64, 8.0)?;
    let f = TorusField::from_fn(g, |x| {
        Complex64::new((3.0 * x[0]).sin() * (-(x[1] - 4.0).powi(2)).exp(), x[0].cos())
    });
    let back = f.to_frequency().into_physical();
    let rt = back.add_scaled(&f, Complex64::new(-1.0, 0.0))?.l2_norm() / f.l2_norm();
    rep.push_check(Check::at_most("grid/round-trip", rt, 1e-12));
    let spec_norm = f.to_frequency().l2_norm();
    rep.push_check(Check::at_most("grid/parseval", (spec_norm / f.l2_norm() - 1.0).abs(), 1e-12));
    let wave = apply_multiplier(&f, &Symbol::half_wave(0.7))?;
    rep.push_check(Check::at_most(
        "grid/unimodular-multiplier",
        (wave.l2_norm() / f.l2_norm() - 1.0).abs(),
        1e-12,
    ));

    // aniso
    let mut worst: f64 = 0.0;
    let mut sandwich: f64 = 0.0;
    for _ in 0..1000 {
        let th: f64 = rng.gen_range(0.0..2.0 * PI);
        let d = Direction::from_angle(th);
        let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let a = aniso_norm(&d, &x);
        let o = aniso_norm_oracle(&d, &x)?;
        worst = worst.max((a - o).abs() / a.max(1.0));
        let (n, t) = split(&d, &x);
        let mid = n.sqrt() + t;
        sandwich = sandwich.max(a - mid).max(mid - 2.0 * a);
    }
    rep.push_check(Check::at_most("aniso/oracle", worst, 1e-10));
    rep.push_check(Check::at_most("aniso/sandwich", sandwich, 1e-10));

    // frames
    let prof = RadialProfile::default();
    let calderon: f64 = (1..=2048)
        .map(|i| {
            let t = -2.0 + 4.0 * i as f64 / 2048.0;
            prof.psi0(t.exp2()).powi(2) * 4.0 / 2048.0 * std::f64::consts::LN_2
        })
        .sum();
    rep.push_check(Check::at_most("frames/calderon-profile", (calderon - 1.0).abs(), 1e-10));
    let fam = DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard)?;
    let mut rs: f64 = 0.0;
    for k in 0..200 {
        let t = 0.0317 * k as f64;
        let r = 1.0 + 0.05 * k as f64;
        rs = rs.max((fam.sum_phi_sq(&[r * t.cos(), r * t.sin()]) - 1.0).abs());
    }
    rep.push_check(Check::at_most("frames/reproducing-sum", rs, 1e-12));
    let caps = build_caps(64.0, 2)?;
    let mut pu: f64 = 0.0;
    for k in 0..1000 {
        let t = 0.00629 * k as f64;
        let s: f64 = caps.weights_at(&[t.cos(), t.sin()]).iter().map(|w| w.1).sum();
        pu = pu.max((s - 1.0).abs());
    }
    rep.push_check(Check::at_most("frames/cap-partition", pu, 1e-12));

    // transform
    let fe = frame_exactness(128, 16.0, 3, cfg.seed, cfg.fault)?;
    rep.row("frame", 128.0, None, "calderon-defect", fe.calderon_defect);
    rep.push_check(Check::at_most("transform/calderon", fe.calderon_defect, 1e-13));
    rep.push_check(Check::at_most("transform/plancherel", fe.plancherel, 1e-10));
    rep.push_check(Check::at_most("transform/reconstruction", fe.reconstruction, 1e-10));

    // norms
    for (label, got, want) in exponent_table()? {
        rep.push_check(Check::at_most(format!("norms/{label}"), (got - want).abs(), 1e-15));
    }
    let pairs = [(2.0, 2.0), (4.0, 2.0), (6.0, 2.0), (4.0, 4.0)];
    let sw = norm_sandwich(64, 8.0, &pairs, 2, cfg.seed)?;
    for (k, &(p, q)) in pairs.iter().enumerate() {
        rep.row("sandwich", p, None, &format!("min-ratio-q{q}"), sw.min_ratio[k]);
        rep.push_check(Check::within(
            format!("norms/sandwich-p{p}-q{q}"),
            sw.min_ratio[k].min(sw.max_ratio[k]),
            0.5 / 1.05,
            1.05,
        ));
        rep.push_check(Check::at_most(format!("norms/sandwich-upper-p{p}-q{q}"), sw.max_ratio[k], 1.05));
    }
    let mono = monotonicity_margin(64, 8.0, 4.0, &[2.0, 4.0], &[0.0, 0.5], 2, cfg.seed)?;
    rep.push_check(Check::at_least("norms/monotonicity", mono, 1.0 - 1e-10));
    let dual = duality_constants(64, 8.0, &[(4.0, 2.0)], 0.0, 3, cfg.seed)?;
    rep.row("duality", 4.0, None, "constant", dual[0]);
    rep.push_check(Check::at_most("norms/duality", dual[0], 4.0));

    // experiments
    let fit = fit_loglog(&[1.0, 2.0, 4.0, 8.0], &[2.0, 4.0, 8.0, 16.0])?;
    rep.push_check(Check::at_most("experiments/fit", (fit.slope - 1.0).abs(), 1e-12));
    let cone = run_decoupling_cone(&ConeConfig {
        p: 2.0,
        q: 2.0,
        r_list: vec![4.0, 6.0, 8.0, 12.0],
        trials: 10,
        seed: cfg.seed,
        points: 64,
        inner: 6.0,
        outer: 20.0,
        thickness: 1.5,
        ..ConeConfig::default()
    })?;
    let run = &cone.runs[0];
    for (r, g) in run.values.iter().zip(&run.measured) {
        rep.row("cone-l2", *r, None, "mean-ratio", *g);
    }
    let lo = run.measured.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = run.measured.iter().cloned().fold(0.0, f64::max);
    rep.push_check(Check::within("experiments/cone-l2-ratio", lo, 1.0 - 1e-12, 2f64.sqrt()));
    rep.push_check(Check::within("experiments/cone-l2-ratio-max", hi, 1.0 - 1e-12, 2f64.sqrt()));
    Ok(rep)
}
