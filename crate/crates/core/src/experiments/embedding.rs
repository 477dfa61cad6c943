//! Sobolev embedding of radially localized fields.

use std::f64::consts::PI;

use serde::Serialize;

use super::fields::{gaussian_band_field, ModelKind, RandomFieldModel, SupportShape};
use super::report::{mean, ExperimentReport, ScalingRun, SlopeBound};
use crate::aniso::Direction;
use crate::error::{invalid, Result};
use crate::frames::{AngularProfile, DirectionalFamily, DEFAULT_BAND};
use crate::grid::{lp_norm, sobolev_norm, TorusGrid};
use crate::norms::{dec_norm_continuous, exponent_alpha, exponent_s, NormSpec};

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingConfig {
    pub p: f64,
    pub q: f64,
    pub r_list: Vec<f64>,
    pub trials: usize,
    /// Half-width of the annulus `R - κ <= |ξ| <= R + κ`.
    pub kappa: f64,
    /// Lattice spacing in frequency.
    pub spacing: f64,
    pub seed: u64,
    pub slope_limit: f64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            p: 10.0,
            q: 2.0,
            r_list: vec![16.0, 32.0, 64.0, 128.0],
            trials: 3,
            kappa: 1.0,
            spacing: 0.5,
            seed: 1,
            slope_limit: 0.1,
        }
    }
}

fn scan_grid(r: f64, cfg: &EmbeddingConfig) -> Result<TorusGrid> {
    let side = 2.0 * PI / cfg.spacing;
    let xi_max = (r + cfg.kappa) / DEFAULT_BAND;
    let points = ((xi_max * side / PI).ceil() as usize).next_power_of_two().max(64);
    TorusGrid::new(2, points, side)
}

/// Per `R`, on Gaussian fields in the annulus of half-width `κ`:
///
/// * `alpha-ratio`: `‖f‖_{W^{-α(p),p}} / ‖f‖_{p,q;0}`, slope at most the limit;
/// * `s-ratio`: the same with `-α(p)` replaced by `-s(p) + 0.2`, reported;
/// * `plate`: `‖f‖_{p,q;0} / (R^{(n-1)/2(1/2-1/q)} ‖f‖_p)` for fields in one
///   cap of the annulus, slope `0 ± 0.05`.
pub fn run_embedding_scan(cfg: &EmbeddingConfig) -> Result<ExperimentReport> {
    if cfg.trials == 0 || !(cfg.kappa > 0.0 && cfg.spacing > 0.0) {
        return invalid("embedding scan needs trials, kappa and spacing to be positive");
    }
    let n = 2;
    let spec = NormSpec::new(cfg.p, cfg.q, 0.0)?;
    let alpha = exponent_alpha(cfg.p, n)?;
    let sp = exponent_s(cfg.p, n)?;
    let plate_weight = 0.5 * (n as f64 - 1.0) * (0.5 - 1.0 / cfg.q);
    let mut report = ExperimentReport::new("embed-scan", cfg)?;
    let (mut a_means, mut s_means, mut plate) = (Vec::new(), Vec::new(), Vec::new());
    for &r in &cfg.r_list {
        if r <= 2.0 * cfg.kappa {
            return invalid("every R must exceed 2 kappa");
        }
        let grid = scan_grid(r, cfg)?;
        let fam = DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard)?;
        let (mut a, mut s) = (Vec::new(), Vec::new());
        for trial in 0..cfg.trials {
            let f = gaussian_band_field(&grid, r - cfg.kappa, r + cfg.kappa, cfg.seed ^ trial as u64)?;
            let dec = dec_norm_continuous(&f, spec, &fam)?;
            let ra = sobolev_norm(&f, -alpha, cfg.p)? / dec;
            let rs = sobolev_norm(&f, -sp + 0.2, cfg.p)? / dec;
            report.row("alpha-ratio", r, Some(trial), "ratio", ra);
            report.row("s-ratio", r, Some(trial), "ratio", rs);
            a.push(ra);
            s.push(rs);
        }
        a_means.push(mean(&a));
        s_means.push(mean(&s));
        report.row("alpha-ratio", r, None, "mean-ratio", mean(&a));
        report.row("s-ratio", r, None, "mean-ratio", mean(&s));

        let model = RandomFieldModel::new(
            ModelKind::FocusingAllOnes,
            cfg.seed,
            SupportShape::Plate {
                direction: Direction::from_angle(0.0),
                inner: r - cfg.kappa,
                outer: r + cfg.kappa,
                chord: 2.0 / r.sqrt(),
            },
        );
        let f = model.generate(&grid, None)?;
        let v = dec_norm_continuous(&f, spec, &fam)? / (r.powf(plate_weight) * lp_norm(&f, cfg.p)?);
        report.row("plate", r, None, "ratio", v);
        plate.push(v);
    }
    let x = cfg.r_list.clone();
    report.push_run(ScalingRun::new(
        "alpha-ratio",
        "R",
        x.clone(),
        a_means,
        SlopeBound::AtMost {
            limit: cfg.slope_limit,
        },
    )?);
    report.push_run(ScalingRun::new("s-ratio", "R", x.clone(), s_means, SlopeBound::None)?);
    report.push_run(ScalingRun::new(
        "plate",
        "R",
        x,
        plate,
        SlopeBound::Within {
            target: 0.0,
            tolerance: 0.05,
        },
    )?);
    Ok(report)
}
