//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use decnorm::aniso::{aniso_norm, aniso_norm_oracle, ball_volume, Direction};
use decnorm::experiments::checks::{
    discrete_equivalence, duality_constants, equivpar, exponent_table, frame_exactness, monotonicity_margin,
    norm_sandwich,
};
use decnorm::experiments::report::{drift, ScalingRun, Verdict};
use decnorm::experiments::{
    run_counterexample, run_decoupling_cone, run_decoupling_sphere, run_halfwave, run_local_smoothing, ConeConfig,
    CounterexampleConfig, HalfwaveConfig, LocalSmoothingConfig, SphereConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// 1
const CALDERON_TOL: f64 = 1e-13;
const PLANCHEREL_TOL: f64 = 1e-10;
const RECONSTRUCTION_TOL: f64 = 1e-10;
const FRAME_FIELDS: usize = 20;
const FRAME_POINTS: usize = 256;
// 2
const ANISO_SAMPLES: usize = 10_000;
const ANISO_TOL: f64 = 1e-10;
// 3
const EXPONENT_TOL: f64 = 1e-15;
// 4
const SANDWICH_SLACK: f64 = 0.05;
const SANDWICH_FIELDS: usize = 20;
const SANDWICH_PAIRS: [(f64, f64); 4] = [(2.0, 2.0), (4.0, 2.0), (6.0, 2.0), (4.0, 4.0)];
// 5
const EQUIV_RANGE: (f64, f64) = (1.0 / 8.0, 8.0);
const EQUIV_DRIFT: f64 = 4.0;
const EQUIV_R: [f64; 5] = [16.0, 32.0, 64.0, 128.0, 256.0];
const EQUIV_PAIRS: [(f64, f64); 5] = [(2.0, 2.0), (4.0, 2.0), (6.0, 2.0), (4.0, 4.0), (6.0, 6.0)];
// 6
const SPHERE_SLOPE_MAX: f64 = 0.15;
const SPHERE_L2_TOL: f64 = 0.05;
// 7
const CONE_SLOPE_MAX: f64 = 0.2;
// 8
const HALFWAVE_UNITARITY: f64 = 1e-10;
const HALFWAVE_RATIO_CAP: f64 = 30.0;
// 9
const LOCAL_SLOPE_MAX: f64 = 0.1;
// 10
const COUNTER_U_SLOPE: f64 = 1.0 / 6.0;
const COUNTER_U_TOL: f64 = 0.1;
const COUNTER_TU_MIN: f64 = 0.4;
const COUNTER_SEPARATION: f64 = 0.2;
// 11
const EQUIVPAR_RANGE: (f64, f64) = (0.25, 4.0);
const EQUIVPAR_DRIFT: f64 = 2.0;
// 12
const DUALITY_MAX: f64 = 4.0;
const DUALITY_PAIRS: [(f64, f64); 3] = [(4.0, 2.0), (6.0, 2.0), (4.0, 4.0)];
const DUALITY_COUNT: usize = 50;
const MONOTONICITY_TOL: f64 = 1e-10;

const SEED: u64 = 20240601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn frame_exactness_criterion() -> Outcome {
    let r = frame_exactness(FRAME_POINTS, 32.0, FRAME_FIELDS, SEED, None).unwrap();
    outcome(
        r.calderon_defect <= CALDERON_TOL && r.plancherel <= PLANCHEREL_TOL && r.reconstruction <= RECONSTRUCTION_TOL,
        format!(
            "calderon {:.2e}, plancherel {:.2e}, reconstruction {:.2e}",
            r.calderon_defect, r.plancherel, r.reconstruction
        ),
    )
}

/// Area of `{|x|_ω <= τ}` in the plane by quadrature: for transverse
/// coordinate `b = τ sin θ` the normal extent is `2τ√(τ² - b²)`.
fn aniso_area_quadrature(tau: f64) -> f64 {
    let k = 4096;
    let h = PI / k as f64;
    (0..=k)
        .map(|i| {
            let th = -0.5 * PI + i as f64 * h;
            let w = if i == 0 || i == k { 0.5 } else { 1.0 };
            w * 2.0 * tau.powi(3) * th.cos().powi(2)
        })
        .sum::<f64>()
        * h
}

/// Volume in 3D: `∫_{|b|<=τ} 2τ√(τ²-|b|²) db`, radial Simpson in `r = τ sin θ`.
fn aniso_volume_quadrature_3d(tau: f64) -> f64 {
    let k = 4096;
    let h = 0.5 * PI / k as f64;
    let g = |th: f64| 2.0 * tau * (tau * th.cos()) * 2.0 * PI * (tau * th.sin()) * (tau * th.cos());
    let mut acc = g(0.0) + g(0.5 * PI);
    for i in 1..k {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    acc * h / 3.0
}

fn aniso_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut oracle, mut sandwich, mut unit) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..ANISO_SAMPLES {
        let d = Direction::from_angle(rng.gen_range(0.0..2.0 * PI));
        let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
        let x = [scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0)];
        let a = aniso_norm(&d, &x);
        oracle = oracle.max((a - aniso_norm_oracle(&d, &x).unwrap()).abs() / a.max(1.0));
        let normal = d.dot(&x);
        let tangential = (x[0] * x[0] + x[1] * x[1] - normal * normal).max(0.0).sqrt();
        let mid = normal.abs().sqrt() + tangential;
        sandwich = sandwich.max((a - mid) / a).max((mid - 2.0 * a) / a);
        let e = (x[0] * x[0] + x[1] * x[1]).sqrt();
        // |x| <= |x|_ω iff |x| <= 1, away from the boundary |x| = 1
        if (e - 1.0).abs() > ANISO_TOL && ((e <= a) != (e <= 1.0)) {
            unit += 1;
        }
    }
    let mut volume: f64 = 0.0;
    for tau in [0.5, 1.0, 2.0, 3.0] {
        volume = volume.max((ball_volume(tau, 2).unwrap() / aniso_area_quadrature(tau) - 1.0).abs());
        volume = volume.max((ball_volume(tau, 3).unwrap() / aniso_volume_quadrature_3d(tau) - 1.0).abs());
    }
    outcome(
        oracle <= ANISO_TOL && sandwich <= ANISO_TOL && unit == 0 && volume <= ANISO_TOL,
        format!("oracle {oracle:.2e}, sandwich {sandwich:.2e}, unit-ball mismatches {unit}, volume {volume:.2e}"),
    )
}

fn exponent_criterion() -> Outcome {
    let table = exponent_table().unwrap();
    let worst = table.iter().map(|t| (t.1 - t.2).abs()).fold(0.0, f64::max);
    outcome(worst <= EXPONENT_TOL, format!("{} values, max error {worst:.1e}", table.len()))
}

fn sandwich_criterion() -> Outcome {
    let r = norm_sandwich(FRAME_POINTS, 32.0, &SANDWICH_PAIRS, SANDWICH_FIELDS, SEED).unwrap();
    let lo = 0.5 / (1.0 + SANDWICH_SLACK);
    let hi = 1.0 + SANDWICH_SLACK;
    let ok = r.min_ratio.iter().all(|&m| m >= lo) && r.max_ratio.iter().all(|&m| m <= hi);
    let detail = SANDWICH_PAIRS
        .iter()
        .enumerate()
        .map(|(k, (p, q))| format!("({p},{q}) [{:.3}, {:.3}]", r.min_ratio[k], r.max_ratio[k]))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(ok, detail)
}

fn equivalence_criterion() -> Outcome {
    let t = discrete_equivalence(512, &EQUIV_R, &EQUIV_PAIRS, 2, SEED).unwrap();
    let all = t.ratios.iter().flatten().flatten();
    let (lo, hi) = all.fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    let drifts: Vec<f64> = t.means().iter().map(|m| drift(m)).collect();
    let worst = drifts.iter().cloned().fold(0.0, f64::max);
    outcome(
        lo >= EQUIV_RANGE.0 && hi <= EQUIV_RANGE.1 && worst <= EQUIV_DRIFT,
        format!("ratios in [{lo:.3}, {hi:.3}], worst drift {worst:.3}"),
    )
}

fn slope_ok(run: &ScalingRun) -> bool {
    run.verdict == Verdict::Pass
}

fn sphere_criterion() -> Outcome {
    let main = run_decoupling_sphere(&SphereConfig {
        slope_slack: SPHERE_SLOPE_MAX,
        ..SphereConfig::default()
    })
    .unwrap();
    let l2 = run_decoupling_sphere(&SphereConfig {
        p: 2.0,
        q: 2.0,
        ..SphereConfig::default()
    })
    .unwrap();
    let (a, b) = (&main.runs[0], &l2.runs[0]);
    let ok = a.fit.slope <= SPHERE_SLOPE_MAX && slope_ok(a) && b.fit.slope.abs() <= SPHERE_L2_TOL && slope_ok(b);
    outcome(
        ok,
        format!(
            "(6,2) slope {:.4} residual {:.3}; (2,2) slope {:.4} residual {:.3}",
            a.fit.slope, a.fit.residual, b.fit.slope, b.fit.residual
        ),
    )
}

fn cone_criterion() -> Outcome {
    let rep = run_decoupling_cone(&ConeConfig {
        slope_slack: CONE_SLOPE_MAX,
        ..ConeConfig::default()
    })
    .unwrap();
    let run = &rep.runs[0];
    outcome(
        run.fit.slope <= CONE_SLOPE_MAX && slope_ok(run),
        format!("slope {:.4} residual {:.3} over R = {:?}", run.fit.slope, run.fit.residual, run.values),
    )
}

fn halfwave_criterion() -> Outcome {
    let rep = run_halfwave(&HalfwaveConfig {
        ratio_cap: HALFWAVE_RATIO_CAP,
        ..HalfwaveConfig::default()
    })
    .unwrap();
    let unit = rep.check("halfwave-p2-q2/unitarity").unwrap();
    let zero_ok = ["halfwave-p2-q2", "halfwave-p4-q2", "halfwave-p6-q2"]
        .iter()
        .all(|id| rep.check(&format!("{id}/t=0")).map(|c| c.value == 1.0).unwrap_or(false));
    let m4 = rep.check("halfwave-p4-q2/max-ratio").unwrap();
    let m6 = rep.check("halfwave-p6-q2/max-ratio").unwrap();
    outcome(
        zero_ok && unit.value <= HALFWAVE_UNITARITY && m4.value <= HALFWAVE_RATIO_CAP && m6.value <= HALFWAVE_RATIO_CAP,
        format!(
            "t=0 exact {zero_ok}, L2 deviation {:.2e}, max ratio (4,2) {:.3}, (6,2) {:.3}",
            unit.value, m4.value, m6.value
        ),
    )
}

fn local_smoothing_criterion() -> Outcome {
    let rep = run_local_smoothing(&LocalSmoothingConfig {
        slope_limit: LOCAL_SLOPE_MAX,
        ..LocalSmoothingConfig::default()
    })
    .unwrap();
    let run = &rep.runs[0];
    outcome(
        run.fit.slope <= LOCAL_SLOPE_MAX && slope_ok(run),
        format!("slope {:.4} residual {:.3}", run.fit.slope, run.fit.residual),
    )
}

fn counterexample_criterion() -> Outcome {
    let rep = run_counterexample(&CounterexampleConfig {
        separation: COUNTER_SEPARATION,
        ..CounterexampleConfig::default()
    })
    .unwrap();
    let su = rep.run("u-p6-q2").unwrap().fit.slope;
    let st = rep.run("Tu-p6-q2").unwrap().fit.slope;
    let su2 = rep.run("u-p2-q6").unwrap().fit.slope;
    let st2 = rep.run("Tu-p2-q6").unwrap().fit.slope;
    let ok = (su - COUNTER_U_SLOPE).abs() <= COUNTER_U_TOL
        && st >= COUNTER_TU_MIN
        && st - su >= COUNTER_SEPARATION
        && su2 >= st2 + COUNTER_SEPARATION;
    outcome(
        ok,
        format!("(6,2): u {su:.4}, Tu {st:.4}; (2,6): u {su2:.4}, Tu {st2:.4}"),
    )
}

fn equivpar_criterion() -> Outcome {
    let rs = [16.0, 64.0, 256.0];
    let ps = [2.0, 4.0];
    let table = equivpar(512, &rs, &ps, SEED).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (k, p) in ps.iter().enumerate() {
        let col: Vec<f64> = table.iter().map(|row| row[k]).collect();
        let d = drift(&col);
        ok &= col.iter().all(|&v| v >= EQUIVPAR_RANGE.0 && v <= EQUIVPAR_RANGE.1) && d <= EQUIVPAR_DRIFT;
        detail.push(format!("p={p}: {:?} drift {d:.3}", col.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()));
    }
    outcome(ok, detail.join("; "))
}

fn duality_monotonicity_criterion() -> Outcome {
    let c = duality_constants(128, 16.0, &DUALITY_PAIRS, 0.5, DUALITY_COUNT, SEED).unwrap();
    let worst = c.iter().cloned().fold(0.0, f64::max);
    let mono = monotonicity_margin(128, 16.0, 4.0, &[2.0, 4.0, 6.0], &[0.0, 0.5], 5, SEED).unwrap();
    outcome(
        worst <= DUALITY_MAX && mono >= 1.0 - MONOTONICITY_TOL,
        format!("duality constants {c:.3?}, monotonicity margin {mono:.6}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("frame exactness", frame_exactness_criterion),
        ("anisotropic geometry", aniso_criterion),
        ("exponents", exponent_criterion),
        ("norm-transform sandwich", sandwich_criterion),
        ("discrete/continuous equivalence", equivalence_criterion),
        ("sphere decoupling", sphere_criterion),
        ("cone decoupling", cone_criterion),
        ("half-wave invariance", halfwave_criterion),
        ("local smoothing", local_smoothing_criterion),
        ("counterexample", counterexample_criterion),
        ("parabolic square function", equivpar_criterion),
        ("duality and monotonicity", duality_monotonicity_criterion),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        let (mark, detail) = match result {
            Ok(o) if o.passed => ("PASS", o.detail),
            Ok(o) => ("FAIL", o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                ("FAIL", format!("panicked: {msg}"))
            }
        };
        if mark == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {mark} {name} ({secs:.1}s): {detail}", i + 1);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

