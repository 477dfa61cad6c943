//! A change of variables that is unbounded on the decoupling spaces for
//! `p != q`.
//!
//! `u` is a sum of `N` packets at `y_j = (1, j/N)`, all pointing along
//! `ω₀ = (1, 0)`. The operator `T u(x) = k(x) u(ψ(x))` with
//! `ψ(x₁, x₂) = (x₂/(1+x₁²), x₁)` moves packet `j` to `(j/N, 1 + j²/N²)`
//! and turns it towards `(-2j/N, 1)/(1 + j²/N²)`, so the packets of `Tu`
//! point in `N` different directions.

use serde::Serialize;

use super::report::{Check, ExperimentReport, ScalingRun, SlopeBound};
use crate::error::{invalid, Result};
use crate::frames::{build_caps, smooth_step, AngularProfile, CapSystem, DirectionalFamily};
use crate::grid::{norm, resample_compose, Space, TorusField, TorusGrid};
use crate::norms::dec_profile;
use crate::Complex64;

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleConfig {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub n_list: Vec<usize>,
    pub points: usize,
    pub side: f64,
    pub band_fraction: f64,
    /// Echoed only; the construction is deterministic.
    pub seed: u64,
    pub slope_tolerance: f64,
    pub separation: f64,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        Self {
            p: 6.0,
            q: 2.0,
            r: 512.0,
            n_list: vec![2, 4, 8, 16],
            points: 2048,
            side: 1.6,
            band_fraction: 0.55,
            seed: 7,
            slope_tolerance: 0.1,
            separation: 0.2,
        }
    }
}

/// Radial cutoff: supported on `[1/2, 4]`, identically 1 on `[1, 2]`.
pub fn radial_cutoff(t: f64) -> f64 {
    smooth_step(2.0 * t - 1.0) * (1.0 - smooth_step(0.5 * (t - 2.0)))
}

/// `ψ(x₁, x₂) = (x₂/(1+x₁²), x₁)`.
pub fn psi_map(x: [f64; 2]) -> [f64; 2] {
    [x[1] / (1.0 + x[0] * x[0]), x[0]]
}

/// Smooth cutoff around the image curve `x₂ = 1 + x₁²`, `x₁ ∈ [0, 1]`.
fn tube_cutoff(x: [f64; 2]) -> f64 {
    let along = smooth_step((x[0] + 0.15) / 0.1) * (1.0 - smooth_step((x[0] - 1.05) / 0.1));
    if along == 0.0 {
        return 0.0;
    }
    let d = (psi_map(x)[0] - 1.0).abs();
    along * (1.0 - smooth_step((d - 0.02) / 0.03))
}

/// Packet centres `y_{j,N} = (1, j/N)`.
pub fn packet_centres(n: usize) -> Vec<[f64; 2]> {
    (1..=n).map(|j| [1.0, j as f64 / n as f64]).collect()
}

/// Smallest number of caps holding `fraction` of the spectral energy.
pub fn caps_for_energy(f: &TorusField, caps: &CapSystem, fraction: f64) -> usize {
    let spec = f.to_frequency();
    let g = *spec.grid();
    let mut e = vec![0.0; caps.len()];
    for (i, v) in spec.values().iter().enumerate() {
        let a = v.norm_sqr();
        if a == 0.0 {
            continue;
        }
        for (nu, w) in caps.weights_at(&g.freq(i)[..2]) {
            e[nu] += a * w * w;
        }
    }
    let total: f64 = e.iter().sum();
    e.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    for (k, v) in e.iter().enumerate() {
        acc += v;
        if acc >= fraction * total {
            return k + 1;
        }
    }
    e.len()
}

struct Setup {
    source: TorusGrid,
    target: TorusGrid,
    family: DirectionalFamily,
    packet: Vec<(usize, Complex64)>,
    cutoff: TorusField,
}

fn setup(cfg: &CounterexampleConfig) -> Result<Setup> {
    let h = 0.5 * cfg.side;
    let source = TorusGrid::new(2, cfg.points, cfg.side)?.with_origin(&[1.0 - h, 0.5 - h])?;
    let target = TorusGrid::new(2, cfg.points, cfg.side)?.with_origin(&[0.5 - h, 1.7 - h])?;
    let family = DirectionalFamily::for_grid(&source, cfg.band_fraction, AngularProfile::Standard)?;
    if 4.0 * cfg.r > family.band_top() {
        return invalid(format!(
            "R = {} is not resolved: 4R exceeds the band edge {:.1}",
            cfg.r,
            family.band_top()
        ));
    }
    let omega0 = family.directions()[0];
    let mut packet = Vec::new();
    for i in 0..source.len() {
        let xi = source.freq(i);
        let xi = &xi[..2];
        if xi[0] <= 0.0 {
            continue;
        }
        let c = radial_cutoff(norm(xi) / cfg.r);
        if c == 0.0 {
            continue;
        }
        let v = c * family.phi(&omega0, xi);
        if v != 0.0 {
            packet.push((i, Complex64::new(v, 0.0)));
        }
    }
    let cutoff = TorusField::from_fn(target, |x| Complex64::new(tube_cutoff([x[0], x[1]]), 0.0));
    Ok(Setup {
        source,
        target,
        family,
        packet,
        cutoff,
    })
}

/// `u = Σ_j u₀(· - y_j)` with `û₀ = φ_{ω₀}·χ(|ξ|/R)`, in frequency space.
fn packet_sum(s: &Setup, n: usize) -> Result<TorusField> {
    let g = s.source;
    let o = g.origin();
    let centres = packet_centres(n);
    let mut values = vec![Complex64::new(0.0, 0.0); g.len()];
    for &(i, c) in &s.packet {
        let xi = g.freq(i);
        let phase: Complex64 = centres
            .iter()
            .map(|y| Complex64::from_polar(1.0, -(xi[0] * (y[0] - o[0]) + xi[1] * (y[1] - o[1]))))
            .sum();
        values[i] = c * phase;
    }
    TorusField::new(g, values, Space::Frequency)
}

/// Runs the construction for `(p, q)` and for the swapped pair `(q, p)`,
/// both from the same directional slices.
pub fn run_counterexample(cfg: &CounterexampleConfig) -> Result<ExperimentReport> {
    if cfg.p == cfg.q {
        return invalid("the counterexample needs p != q");
    }
    if cfg.n_list.iter().any(|&n| n == 0 || n as f64 > cfg.r.powf(0.45)) {
        return invalid(format!("every N must satisfy 1 <= N <= R^0.45 = {:.2}", cfg.r.powf(0.45)));
    }
    let s = setup(cfg)?;
    let caps = build_caps(cfg.r, 2)?;
    let ps = [cfg.p, cfg.q];
    let (hi, lo) = if cfg.p > cfg.q { (cfg.p, cfg.q) } else { (cfg.q, cfg.p) };
    let mut report = ExperimentReport::new("counterexample", cfg)?;
    let mut norms = [[Vec::new(), Vec::new()], [Vec::new(), Vec::new()]];
    let mut spread = (0usize, 0usize);
    for &n in &cfg.n_list {
        let u = packet_sum(&s, n)?;
        let tu = resample_compose(&u, psi_map, &s.cutoff)?.into_frequency();
        let (inner, outer) = (0.25 * cfg.r, 4.0 * cfg.r);
        let mut tu = tu;
        for (i, v) in tu.values_mut().iter_mut().enumerate() {
            let r = norm(&s.target.freq(i)[..2]);
            if r < inner || r > outer {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        let pu = dec_profile(&u, &s.family, 0.0, &ps)?;
        let pt = dec_profile(&tu, &s.family, 0.0, &ps)?;
        let x = n as f64;
        for (k, &(a, b)) in [(hi, lo), (lo, hi)].iter().enumerate() {
            let nu = pu.value(a, b)?;
            let nt = pt.value(a, b)?;
            let id = format!("p{a}-q{b}");
            report.row(&format!("u-{id}"), x, None, "norm", nu);
            report.row(&format!("Tu-{id}"), x, None, "norm", nt);
            norms[k][0].push(nu);
            norms[k][1].push(nt);
        }
        let cu = caps_for_energy(&u, &caps, 0.9);
        let ct = caps_for_energy(&tu, &caps, 0.9);
        report.row("caps-u", x, None, "caps-for-90pct", cu as f64);
        report.row("caps-Tu", x, None, "caps-for-90pct", ct as f64);
        spread = (cu, ct);
    }
    let x: Vec<f64> = cfg.n_list.iter().map(|&n| n as f64).collect();
    let tol = cfg.slope_tolerance;
    let [[u_hi, t_hi], [u_lo, t_lo]] = norms;
    let run_u = ScalingRun::new(
        format!("u-p{hi}-q{lo}"),
        "N",
        x.clone(),
        u_hi,
        SlopeBound::Within {
            target: 1.0 / hi,
            tolerance: tol,
        },
    )?;
    let run_t = ScalingRun::new(
        format!("Tu-p{hi}-q{lo}"),
        "N",
        x.clone(),
        t_hi,
        SlopeBound::AtLeast {
            limit: 1.0 / lo - tol,
        },
    )?;
    let run_u2 = ScalingRun::new(format!("u-p{lo}-q{hi}"), "N", x.clone(), u_lo, SlopeBound::None)?;
    let run_t2 = ScalingRun::new(format!("Tu-p{lo}-q{hi}"), "N", x, t_lo, SlopeBound::None)?;
    report.push_check(Check::at_least(
        "separation",
        run_t.slope() - run_u.slope(),
        cfg.separation,
    ));
    report.push_check(Check::at_least(
        "swapped-separation",
        run_u2.slope() - run_t2.slope(),
        cfg.separation,
    ));
    let n_max = *cfg.n_list.iter().max().expect("nonempty");
    report.push_check(Check::at_least("caps-Tu", spread.1 as f64, 0.5 * n_max as f64));
    report.push_check(Check::at_most("caps-u", spread.0 as f64, 4.0));
    for run in [run_u, run_t, run_u2, run_t2] {
        report.push_run(run);
    }
    Ok(report)
}
