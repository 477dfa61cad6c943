//! Decoupling ratios for thin annuli and light-cone slabs.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::fields::{ModelKind, RandomFieldModel, SupportShape};
use super::report::{mean, ExperimentReport, ScalingRun, SlopeBound};
use crate::error::{invalid, Result};
use crate::frames::{build_caps, CapSystem};
use crate::grid::{lp_norm, TorusGrid};
use crate::norms::{cap_lp_norms, exponent_d, lq_sum};

/// Sphere decoupling: annuli `R - κ <= |ξ| <= R + κ` on a torus of side
/// `2π·index_scale`, so the annulus sits at lattice radius `index_scale·R`.
#[derive(Clone, Debug, Serialize)]
pub struct SphereConfig {
    pub p: f64,
    pub q: f64,
    pub r_list: Vec<f64>,
    pub trials: usize,
    pub model: ModelKind,
    pub seed: u64,
    pub kappa: f64,
    pub index_scale: f64,
    pub slope_slack: f64,
}

impl Default for SphereConfig {
    fn default() -> Self {
        Self {
            p: 6.0,
            q: 2.0,
            r_list: vec![32.0, 64.0, 128.0, 256.0, 512.0],
            trials: 10,
            model: ModelKind::RademacherCaps,
            seed: 1,
            kappa: 4.0,
            index_scale: 0.8,
            slope_slack: 0.15,
        }
    }
}

/// Cone decoupling on an `(ξ₁, ξ₂, τ)` grid with unit lattice spacing.
///
/// The slab `inner <= |ξ'| <= outer`, `|τ - |ξ'|| <= thickness` is fixed
/// in lattice units and only the planar cap partition of `ξ'` refines with
/// `R`.
#[derive(Clone, Debug, Serialize)]
pub struct ConeConfig {
    pub p: f64,
    pub q: f64,
    pub r_list: Vec<f64>,
    pub trials: usize,
    pub model: ModelKind,
    pub seed: u64,
    pub points: usize,
    pub inner: f64,
    pub outer: f64,
    pub thickness: f64,
    pub slope_slack: f64,
}

impl Default for ConeConfig {
    fn default() -> Self {
        Self {
            p: 6.0,
            q: 2.0,
            r_list: vec![16.0, 24.0, 32.0, 48.0, 64.0],
            trials: 10,
            model: ModelKind::RademacherCaps,
            seed: 1,
            points: 128,
            inner: 10.0,
            outer: 40.0,
            thickness: 1.5,
            slope_slack: 0.2,
        }
    }
}

/// `‖f‖_p / (Σ_ν ‖χ_ν(D) f‖_p^q)^{1/q}` for one sample of `model`.
fn decoupling_ratio(
    grid: &TorusGrid,
    caps: &CapSystem,
    model: &RandomFieldModel,
    p: f64,
    q: f64,
) -> Result<f64> {
    let f = model.generate(grid, Some(caps))?;
    let whole = lp_norm(&f, p)?;
    let pieces: Vec<f64> = cap_lp_norms(&f, caps, &[p])?.into_iter().map(|v| v[0]).collect();
    Ok(whole / lq_sum(&pieces, q))
}

fn check_common(p: f64, q: f64, trials: usize, r_list: &[f64]) -> Result<()> {
    if p < 2.0 || q < 2.0 || !p.is_finite() || !q.is_finite() {
        return invalid("decoupling runs need 2 <= p, q < inf");
    }
    if trials < 10 {
        return invalid("decoupling runs need at least 10 trials");
    }
    if r_list.iter().any(|r| !(r.is_finite() && *r >= 2.0)) {
        return invalid("every R must be at least 2");
    }
    Ok(())
}

fn bound_for(p: f64, q: f64, d: f64, slack: f64) -> SlopeBound {
    if p == 2.0 && q == 2.0 {
        SlopeBound::Within {
            target: 0.0,
            tolerance: 0.05,
        }
    } else {
        SlopeBound::AtMost { limit: d + slack }
    }
}

fn sweep<G>(report: &mut ExperimentReport, run_id: &str, r_list: &[f64], trials: usize, one: G) -> Result<Vec<f64>>
where
    G: Fn(f64, usize) -> Result<f64> + Sync,
{
    let mut means = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let ratios = (0..trials)
            .into_par_iter()
            .map(|t| one(r, t))
            .collect::<Result<Vec<f64>>>()?;
        for (t, g) in ratios.iter().enumerate() {
            report.row(run_id, r, Some(t), "ratio", *g);
        }
        let m = mean(&ratios);
        report.row(run_id, r, None, "mean-ratio", m);
        means.push(m);
    }
    Ok(means)
}

fn sphere_points(r: f64, cfg: &SphereConfig) -> usize {
    let need = 2.0 * cfg.index_scale * (r + cfg.kappa) * 1.1;
    (need.ceil() as usize).next_power_of_two().max(64)
}

pub fn run_decoupling_sphere(cfg: &SphereConfig) -> Result<ExperimentReport> {
    check_common(cfg.p, cfg.q, cfg.trials, &cfg.r_list)?;
    if !(cfg.kappa > 0.0 && cfg.index_scale > 0.0) {
        return invalid("kappa and index scale must be positive");
    }
    if cfg.r_list.iter().any(|&r| r < 2.0 * cfg.kappa) {
        return invalid("every R must be at least 2 kappa");
    }
    let d = exponent_d(cfg.p, cfg.q, 2)?;
    let mut report = ExperimentReport::new("decouple-sphere", cfg)?;
    let run_id = format!("sphere-p{}-q{}", cfg.p, cfg.q);
    let means = sweep(&mut report, &run_id, &cfg.r_list, cfg.trials, |r, t| {
        let grid = TorusGrid::new(2, sphere_points(r, cfg), 2.0 * PI * cfg.index_scale)?;
        let caps = build_caps(r, 2)?;
        let model = RandomFieldModel::new(
            cfg.model,
            cfg.seed ^ t as u64,
            SupportShape::Annulus {
                inner: r - cfg.kappa,
                outer: r + cfg.kappa,
            },
        );
        decoupling_ratio(&grid, &caps, &model, cfg.p, cfg.q)
    })?;
    report.push_run(ScalingRun::new(
        run_id,
        "R",
        cfg.r_list.clone(),
        means,
        bound_for(cfg.p, cfg.q, d, cfg.slope_slack),
    )?);
    Ok(report)
}

pub fn run_decoupling_cone(cfg: &ConeConfig) -> Result<ExperimentReport> {
    check_common(cfg.p, cfg.q, cfg.trials, &cfg.r_list)?;
    let grid = TorusGrid::new(3, cfg.points, 2.0 * PI)?;
    let support = SupportShape::ConeSlab {
        inner: cfg.inner,
        outer: cfg.outer,
        thickness: cfg.thickness,
    };
    support.validate(3)?;
    if support.reach() >= grid.xi_max() {
        return invalid("cone slab does not fit in the lattice");
    }
    let d = exponent_d(cfg.p, cfg.q, 2)?;
    let mut report = ExperimentReport::new("decouple-cone", cfg)?;
    let run_id = format!("cone-p{}-q{}", cfg.p, cfg.q);
    let means = sweep(&mut report, &run_id, &cfg.r_list, cfg.trials, |r, t| {
        let caps = build_caps(r, 2)?;
        let model = RandomFieldModel::new(cfg.model, cfg.seed ^ t as u64, support);
        decoupling_ratio(&grid, &caps, &model, cfg.p, cfg.q)
    })?;
    report.push_run(ScalingRun::new(
        run_id,
        "R",
        cfg.r_list.clone(),
        means,
        bound_for(cfg.p, cfg.q, d, cfg.slope_slack),
    )?);
    Ok(report)
}
