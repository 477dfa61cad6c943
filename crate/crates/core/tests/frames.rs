use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use decnorm::aniso::{aniso_norm, Direction};
use decnorm::experiments::gaussian_band_field;
use decnorm::frames::{
    build_caps, eval_rho, packet_symbol, parabolic_profile_symbol, planar_cap_count, AngularProfile,
    DirectionalFamily, RadialProfile, DEFAULT_BAND,
};
use decnorm::grid::{TorusField, TorusGrid};
use decnorm::norms::{dec_norm_continuous, NormSpec};
use decnorm::transform::{RenormalizedFrame, DEFAULT_PER_OCTAVE};
use proptest::prelude::*;

fn family(points: usize, side: f64, angular: AngularProfile) -> Arc<DirectionalFamily> {
    let g = TorusGrid::new(2, points, side).unwrap();
    Arc::new(DirectionalFamily::for_grid(&g, DEFAULT_BAND, angular).unwrap())
}

/// `∫ Ψ₀(σ r)² dσ/σ` on a log grid of 1024 nodes.
fn calderon_integral(prof: &RadialProfile, r: f64) -> f64 {
    let n = 1024;
    let (lo, hi) = ((0.25 / r).log2(), (4.0 / r).log2());
    let h = (hi - lo) / n as f64;
    (0..=n)
        .map(|i| prof.psi0(r * (lo + i as f64 * h).exp2()).powi(2))
        .sum::<f64>()
        * h
        * LN_2
}

#[test]
fn radial_profile_examples() {
    let prof = RadialProfile::default();
    assert_eq!(prof.psi0(0.4), 0.0);
    assert_eq!(prof.psi0(2.1), 0.0);
    for r in [0.1, 1.0, 10.0] {
        assert!((calderon_integral(&prof, r) - 1.0).abs() <= 1e-10);
    }
    assert!((calderon_integral(&prof, 0.1) - calderon_integral(&prof, 10.0)).abs() <= 1e-10);
}

#[test]
fn family_low_frequency_and_growth() {
    let fam = family(512, 8.0, AngularProfile::Standard);
    let e = Direction::from_angle(0.7);
    for th in [0.0, 1.0, 2.5] {
        assert_eq!(fam.phi(&e, &[0.2 * f64::cos(th), 0.2 * f64::sin(th)]), 0.0);
    }
    assert!((fam.sum_phi_sq(&[3.0, 4.0]) - 1.0).abs() <= 1e-12);
    let peak = |r: f64| {
        (0..4000)
            .map(|k| {
                let t = 0.7 + 0.4 * (k as f64 / 4000.0 - 0.5) / r.sqrt();
                fam.phi(&e, &[r * t.cos(), r * t.sin()])
            })
            .fold(0.0, f64::max)
    };
    let ratio = peak(64.0) / peak(16.0);
    assert!((ratio / 4f64.powf(0.25) - 1.0).abs() <= 0.1, "{ratio}");
}

#[test]
fn rho_examples() {
    let fam = family(64, 8.0, AngularProfile::Standard);
    for r in [0.0, 0.1, 0.25] {
        assert_eq!(eval_rho(&fam, &[r, 0.0]), 1.0);
    }
    for r in [1.0, 1.5, 20.0] {
        assert_eq!(eval_rho(&fam, &[0.0, r]), 0.0);
    }
    for k in 1..40 {
        let r = 0.25 + 0.75 * k as f64 / 40.0;
        let v = eval_rho(&fam, &[r * 0.6, r * 0.8]);
        assert!((0.0..=1.0).contains(&v));
    }
}

#[test]
fn packet_support() {
    let fam = family(512, 8.0, AngularProfile::Standard);
    let prof = RadialProfile::default();
    let omega = Direction::from_angle(0.2);
    for sigma in [1.0 / 64.0, 1.0 / 16.0, 0.25] {
        let sym = packet_symbol(&fam, prof, omega, sigma).unwrap();
        let mut seen = 0;
        for i in 0..200 {
            for j in 0..200 {
                let r = 0.3 / sigma + 2.0 / sigma * i as f64 / 200.0;
                let t = 0.2 + PI * (j as f64 / 200.0 - 0.5);
                let xi = [r * t.cos(), r * t.sin()];
                let v = sym.evaluate(&xi).unwrap().re;
                if v == 0.0 {
                    continue;
                }
                seen += 1;
                let chord = ((t.cos() - omega.as_slice()[0]).powi(2) + (t.sin() - omega.as_slice()[1]).powi(2)).sqrt();
                assert!(r >= 0.5 / sigma - 1e-9 && r <= 2.0 / sigma + 1e-9);
                assert!(chord <= 2.0 * sigma.sqrt() + 1e-12);
                let an = aniso_norm(&omega, &xi);
                assert!(an <= 2.0 * r.sqrt() + 1e-9 && 2.0 * r.sqrt() <= 4.0 / sigma.sqrt() + 1e-9);
            }
        }
        assert!(seen > 0);
    }
    // σ >= 8 leaves nothing on the lattice
    let g = TorusGrid::new(2, 64, 8.0).unwrap();
    let sym = packet_symbol(&fam, prof, omega, 8.0).unwrap();
    assert!((0..g.len()).all(|i| sym.evaluate(&g.freq(i)[..2]).unwrap().re == 0.0));
}

#[test]
fn parabolic_profile_examples() {
    let prof = RadialProfile::default();
    let e1 = Direction::axis(2, 0).unwrap();
    let sym = parabolic_profile_symbol(prof, e1, 0.5).unwrap();
    assert!((sym.evaluate(&[4.0, 0.0]).unwrap().re - prof.psi0(1.0)).abs() <= 1e-15);
    let omega = Direction::from_angle(1.1);
    let xi = [3.0, -7.0];
    let r = aniso_norm(&omega, &xi);
    let n = 1024;
    let (lo, hi) = ((0.25 / r).log2(), (4.0 / r).log2());
    let h = (hi - lo) / n as f64;
    let integral: f64 = (0..=n)
        .map(|i| {
            let s = (lo + i as f64 * h).exp2();
            parabolic_profile_symbol(prof, omega, s).unwrap().evaluate(&xi).unwrap().re.powi(2)
        })
        .sum::<f64>()
        * h
        * LN_2;
    assert!((integral - 1.0).abs() <= 1e-10);
    for s in [0.01, 0.1, 1.0] {
        let v = parabolic_profile_symbol(prof, omega, s).unwrap().evaluate(&xi).unwrap().re;
        if v != 0.0 {
            assert!(s * r >= 0.5 && s * r <= 2.0);
        }
    }
}

#[test]
fn raw_frame_sum_is_near_one_before_renormalisation() {
    let g = TorusGrid::new(2, 256, 16.0).unwrap();
    let fam = Arc::new(DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard).unwrap());
    let frame = RenormalizedFrame::new(g, fam, RadialProfile::default(), DEFAULT_PER_OCTAVE).unwrap();
    let (lo, hi) = frame.raw_sum_range();
    assert!(lo >= 0.5 && hi <= 1.5, "{lo} {hi}");
}

#[test]
fn cap_count_at_1024() {
    // The largest J with 2 sin(π/J) >= R^{-1/2}.
    let j = planar_cap_count(1024.0);
    assert_eq!(j, 201);
    assert!(2.0 * (PI / j as f64).sin() >= 1.0 / 32.0);
    assert!(2.0 * (PI / (j + 1) as f64).sin() < 1.0 / 32.0);
    assert_eq!(build_caps(1024.0, 2).unwrap().len(), 201);
}

proptest! {
    #[test]
    fn caps_partition_unity_with_small_overlap(r in 4.0f64..2048.0, th in 0.0f64..2.0 * PI, rad in 0.01f64..1e4) {
        let caps = build_caps(r, 2).unwrap();
        let xi = [rad * th.cos(), rad * th.sin()];
        let w = caps.weights_at(&xi);
        prop_assert!(w.len() <= 3);
        let s: f64 = w.iter().map(|t| t.1).sum();
        prop_assert!((s - 1.0).abs() <= 1e-12);
        for lambda in [0.5, 2.0, 7.0] {
            let v = caps.weights_at(&[lambda * xi[0], lambda * xi[1]]);
            prop_assert_eq!(v.len(), w.len());
            for (a, b) in v.iter().zip(&w) {
                prop_assert!(a.0 == b.0 && (a.1 - b.1).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn spherical_caps_partition_unity(r in 4.0f64..256.0, a in -1.0f64..1.0, ph in 0.0f64..2.0 * PI) {
        let caps = build_caps(r, 3).unwrap();
        let s = (1.0 - a * a).sqrt();
        let xi = [s * ph.cos(), s * ph.sin(), a];
        let total: f64 = caps.weights_at(&xi).iter().map(|t| t.1).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn norms_barely_depend_on_the_angular_profile() {
    let g = TorusGrid::new(2, 256, 32.0).unwrap();
    let a = DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard).unwrap();
    let b = DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Quartic).unwrap();
    for seed in 0..4 {
        let f = gaussian_band_field(&g, 1.0, a.band_top(), seed).unwrap();
        for (p, q, s) in [(2.0, 2.0, 0.0), (4.0, 2.0, 0.0), (6.0, 2.0, 0.5), (4.0, 4.0, -0.5)] {
            let spec = NormSpec::new(p, q, s).unwrap();
            let ratio = dec_norm_continuous(&f, spec, &a).unwrap() / dec_norm_continuous(&f, spec, &b).unwrap();
            assert!((0.25..=4.0).contains(&ratio), "({p},{q},{s}): {ratio}");
        }
    }
}

/// `max |K(x)| σ^{7/4} (1 + |x|_ω²/σ)^3` for the kernel of `ψ_{ω,σ}`, over
/// `|x|_ω <= 6 σ^{1/2}`; beyond that the lattice tail floor dominates.
fn kernel_constant(fam: &Arc<DirectionalFamily>, g: TorusGrid, sigma: f64) -> f64 {
    let omega = Direction::from_angle(0.0);
    let sym = packet_symbol(fam, RadialProfile::default(), omega, sigma).unwrap();
    let spec = TorusField::from_spectrum(g, |xi| sym.evaluate(xi).unwrap());
    let phys = spec.into_physical();
    let m = g.points() as f64;
    let scale = m / (g.side() * g.side());
    let half = 0.5 * g.side();
    let mut c: f64 = 0.0;
    for (i, v) in phys.values().iter().enumerate() {
        let p = g.point(i);
        let x = [if p[0] >= half { p[0] - g.side() } else { p[0] }, if p[1] >= half { p[1] - g.side() } else { p[1] }];
        let an = aniso_norm(&omega, &x);
        if an > 6.0 * sigma.sqrt() {
            continue;
        }
        c = c.max(v.norm() * scale * sigma.powf(1.75) * (1.0 + an * an / sigma).powi(3));
    }
    c
}

#[test]
fn packet_kernels_decay_uniformly_in_scale() {
    let g = TorusGrid::new(2, 512, 5.0).unwrap();
    let fam = Arc::new(DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard).unwrap());
    assert!(fam.band_top() > 128.0);
    let a = kernel_constant(&fam, g, 1.0 / 16.0);
    let b = kernel_constant(&fam, g, 1.0 / 64.0);
    assert!(a.is_finite() && b.is_finite());
    assert!(a.max(b) / a.min(b) <= 2.0, "{a} {b}");
}
