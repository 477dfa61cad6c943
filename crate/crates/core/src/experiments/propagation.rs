//! Half-wave propagation: invariance of the norms and local smoothing.

use std::f64::consts::PI;

use serde::Serialize;

use super::fields::gaussian_band_field;
use super::report::{mean, Check, ExperimentReport, ScalingRun, SlopeBound};
use crate::error::{invalid, Result};
use crate::frames::{AngularProfile, DirectionalFamily, DEFAULT_BAND};
use crate::grid::{apply_multiplier, sobolev_norm, Symbol, TorusGrid};
use crate::norms::{dec_norm_continuous, dec_profile, exponent_alpha, NormSpec};

/// Grid with `M` points per axis whose resolved band ends at `top`.
pub(crate) fn band_grid(dim: usize, points: usize, top: f64) -> Result<TorusGrid> {
    TorusGrid::new(dim, points, DEFAULT_BAND * PI * points as f64 / top)
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfwaveConfig {
    /// `(p, q)` pairs evaluated on the same battery.
    pub pairs: Vec<(f64, f64)>,
    pub s: f64,
    pub t_list: Vec<f64>,
    pub fields: usize,
    pub points: usize,
    pub side: f64,
    /// Inner radius of the random fields; the outer radius is the band edge.
    pub inner: f64,
    pub seed: u64,
    pub ratio_cap: f64,
}

impl Default for HalfwaveConfig {
    fn default() -> Self {
        Self {
            pairs: vec![(2.0, 2.0), (4.0, 2.0), (6.0, 2.0)],
            s: 0.0,
            t_list: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            fields: 20,
            points: 512,
            side: 32.0,
            inner: 2.0,
            seed: 1,
            ratio_cap: 30.0,
        }
    }
}

/// Per `(p, q)` and `t`: the largest `‖e^{it|D|}f‖_dec / ‖f‖_dec` over the
/// battery, fitted against `1 + t`.
pub fn run_halfwave(cfg: &HalfwaveConfig) -> Result<ExperimentReport> {
    if cfg.pairs.is_empty() || cfg.fields == 0 {
        return invalid("half-wave run needs at least one (p, q) pair and one field");
    }
    if cfg.t_list.iter().any(|t| !(0.0..=4.0).contains(t)) {
        return invalid("times must lie in [0, 4]");
    }
    for &(p, q) in &cfg.pairs {
        NormSpec::new(p, q, cfg.s)?;
    }
    let grid = TorusGrid::new(2, cfg.points, cfg.side)?;
    let fam = DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard)?;
    let mut ps: Vec<f64> = Vec::new();
    for &(p, _) in &cfg.pairs {
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    let mut report = ExperimentReport::new("halfwave", cfg)?;
    // ratios[pair][t] = max over fields
    let mut worst = vec![vec![0.0f64; cfg.t_list.len()]; cfg.pairs.len()];
    for i in 0..cfg.fields {
        let f = gaussian_band_field(&grid, cfg.inner, fam.band_top(), cfg.seed ^ i as u64)?;
        let base = dec_profile(&f, &fam, cfg.s, &ps)?;
        for (ti, &t) in cfg.t_list.iter().enumerate() {
            let moved = if t == 0.0 {
                base.clone()
            } else {
                let ft = apply_multiplier(&f, &Symbol::half_wave(t))?;
                dec_profile(&ft, &fam, cfg.s, &ps)?
            };
            for (pi, &(p, q)) in cfg.pairs.iter().enumerate() {
                let ratio = moved.value(p, q)? / base.value(p, q)?;
                report.row(&pair_id(p, q), t, Some(i), "ratio", ratio);
                worst[pi][ti] = worst[pi][ti].max(ratio);
            }
        }
    }
    for (pi, &(p, q)) in cfg.pairs.iter().enumerate() {
        let id = pair_id(p, q);
        for (ti, &t) in cfg.t_list.iter().enumerate() {
            report.row(&id, t, None, "max-ratio", worst[pi][ti]);
            if t == 0.0 {
                report.push_check(Check::within(format!("{id}/t=0"), worst[pi][ti], 1.0, 1.0));
            }
        }
        let max = worst[pi].iter().cloned().fold(0.0, f64::max);
        if p == 2.0 && q == 2.0 {
            let dev = worst[pi].iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
            report.push_check(Check::at_most(format!("{id}/unitarity"), dev, 1e-10));
        } else {
            report.push_check(Check::at_most(format!("{id}/max-ratio"), max, cfg.ratio_cap));
        }
        if cfg.t_list.len() >= super::report::MIN_FIT_SAMPLES {
            let x: Vec<f64> = cfg.t_list.iter().map(|t| 1.0 + t).collect();
            report.push_run(ScalingRun::new(id, "1+t", x, worst[pi].clone(), SlopeBound::None)?);
        }
    }
    Ok(report)
}

fn pair_id(p: f64, q: f64) -> String {
    format!("halfwave-p{p}-q{q}")
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalSmoothingConfig {
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub r_list: Vec<f64>,
    pub t_samples: usize,
    pub trials: usize,
    pub points: usize,
    pub seed: u64,
    pub slope_limit: f64,
}

impl Default for LocalSmoothingConfig {
    fn default() -> Self {
        Self {
            p: 6.0,
            q: 2.0,
            s: 0.0,
            r_list: vec![32.0, 64.0, 128.0, 256.0],
            t_samples: 16,
            trials: 3,
            points: 512,
            seed: 1,
            slope_limit: 0.1,
        }
    }
}

/// `(∫₀¹ ‖e^{it|D|}f‖_{W^{s,p}}^p dt)^{1/p} / ‖f‖_{p,q;s+α(p)}` for Gaussian
/// fields on `R/2 <= |ξ| <= 2R`, time integral by the left-endpoint rule.
pub fn run_local_smoothing(cfg: &LocalSmoothingConfig) -> Result<ExperimentReport> {
    if cfg.t_samples < 16 {
        return invalid("local smoothing needs at least 16 time samples");
    }
    if cfg.trials == 0 {
        return invalid("at least one trial is needed");
    }
    let n = 2;
    let alpha = exponent_alpha(cfg.p, n)?;
    let spec = NormSpec::new(cfg.p, cfg.q, cfg.s + alpha)?;
    let mut report = ExperimentReport::new("localsmooth", cfg)?;
    let id = format!("localsmooth-p{}-q{}", cfg.p, cfg.q);
    let mut means = Vec::new();
    for &r in &cfg.r_list {
        if !(r.is_finite() && r >= 1.0) {
            return invalid("every R must be at least 1");
        }
        let grid = band_grid(n, cfg.points, 2.0 * r)?;
        let fam = DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard)?;
        let mut ratios = Vec::new();
        for trial in 0..cfg.trials {
            let f = gaussian_band_field(&grid, 0.5 * r, 2.0 * r, cfg.seed ^ trial as u64)?;
            let mut acc = 0.0;
            for i in 0..cfg.t_samples {
                let t = i as f64 / cfg.t_samples as f64;
                let ft = apply_multiplier(&f, &Symbol::half_wave(t))?;
                acc += sobolev_norm(&ft, cfg.s, cfg.p)?.powf(cfg.p);
            }
            let lhs = (acc / cfg.t_samples as f64).powf(1.0 / cfg.p);
            let rhs = dec_norm_continuous(&f, spec, &fam)?;
            report.row(&id, r, Some(trial), "lhs", lhs);
            report.row(&id, r, Some(trial), "dec-norm", rhs);
            report.row(&id, r, Some(trial), "ratio", lhs / rhs);
            ratios.push(lhs / rhs);
        }
        let m = mean(&ratios);
        report.row(&id, r, None, "mean-ratio", m);
        means.push(m);
    }
    report.push_run(ScalingRun::new(
        id,
        "R",
        cfg.r_list.clone(),
        means,
        SlopeBound::AtMost {
            limit: cfg.slope_limit,
        },
    )?);
    Ok(report)
}
