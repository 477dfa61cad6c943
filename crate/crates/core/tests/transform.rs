use std::sync::Arc;

use decnorm::aniso::Direction;
use decnorm::experiments::gaussian_band_field;
use decnorm::frames::{packet_symbol, AngularProfile, DirectionalFamily, RadialProfile, DEFAULT_BAND};
use decnorm::grid::{Space, TorusField, TorusGrid};
use decnorm::transform::{
    analyze, lqp_norm, lqp_norms, pair, project, synthesize, PhaseSpaceField, RenormalizedFrame, DEFAULT_PER_OCTAVE,
};
use decnorm::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frame(points: usize, side: f64) -> Arc<RenormalizedFrame> {
    let g = TorusGrid::new(2, points, side).unwrap();
    let fam = Arc::new(DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard).unwrap());
    Arc::new(RenormalizedFrame::new(g, fam, RadialProfile::default(), DEFAULT_PER_OCTAVE).unwrap())
}

fn random_phase_field(fr: &Arc<RenormalizedFrame>, seed: u64) -> PhaseSpaceField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PhaseSpaceField::from_fn(fr, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn phase_norm(f: &PhaseSpaceField) -> f64 {
    pair(f, f).unwrap().re.sqrt()
}

fn field(fr: &RenormalizedFrame, seed: u64) -> TorusField {
    gaussian_band_field(fr.grid(), 0.0, fr.band_top(), seed).unwrap()
}

#[test]
fn frame_identities_on_a_small_grid() {
    let fr = frame(128, 16.0);
    assert!(fr.calderon_defect() <= 1e-13);
    let f = field(&fr, 1);
    let g = field(&fr, 2);
    let (wf, wg) = (analyze(&f, &fr).unwrap(), analyze(&g, &fr).unwrap());
    let nf = f.l2_norm();
    assert!((pair(&wf, &wf).unwrap().re - nf * nf).abs() <= 1e-10 * nf * nf);
    assert!((lqp_norm(&wf, 2.0, 2.0).unwrap() / nf - 1.0).abs() <= 1e-10);
    let inner = f.inner(&g).unwrap();
    assert!((pair(&wf, &wg).unwrap() - inner).norm() <= 1e-10 * nf * g.l2_norm());
    let back = synthesize(&wf, &fr).unwrap();
    let err = back.add_scaled(&f.to_physical(), Complex64::new(-1.0, 0.0)).unwrap().l2_norm();
    assert!(err <= 1e-10 * nf);
    let zero = PhaseSpaceField::zeros(&fr);
    assert_eq!(pair(&wf, &zero).unwrap(), Complex64::new(0.0, 0.0));
    assert_eq!(synthesize(&zero, &fr).unwrap().l2_norm(), 0.0);
}

#[test]
fn synthesis_is_the_adjoint_of_analysis() {
    let fr = frame(64, 8.0);
    for seed in 0..3 {
        let big_f = random_phase_field(&fr, seed);
        let g = field(&fr, 100 + seed);
        let lhs = pair(&big_f, &analyze(&g, &fr).unwrap()).unwrap();
        let rhs = synthesize(&big_f, &fr).unwrap().inner(&g).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10 * phase_norm(&big_f) * g.l2_norm());
    }
}

#[test]
fn projection_is_idempotent_and_fixes_the_range() {
    let fr = frame(64, 8.0);
    let wf = analyze(&field(&fr, 3), &fr).unwrap();
    let pw = project(&wf, &fr).unwrap();
    assert!(phase_norm(&pw.sub(&wf).unwrap()) <= 1e-10 * phase_norm(&wf));
    let big_f = random_phase_field(&fr, 4);
    let p1 = project(&big_f, &fr).unwrap();
    let p2 = project(&p1, &fr).unwrap();
    assert!(phase_norm(&p2.sub(&p1).unwrap()) <= 1e-9 * phase_norm(&p1));
}

#[test]
fn projection_is_bounded_on_mixed_norms() {
    let fr = frame(64, 8.0);
    let pairs = [(2.0, 2.0), (4.0, 2.0), (6.0, 2.0), (4.0, 4.0)];
    let mut worst = [0.0f64; 4];
    for seed in 0..20 {
        let big_f = random_phase_field(&fr, seed);
        let a = lqp_norms(&project(&big_f, &fr).unwrap(), &pairs).unwrap();
        let b = lqp_norms(&big_f, &pairs).unwrap();
        for k in 0..4 {
            worst[k] = worst[k].max(a[k] / b[k]);
        }
    }
    assert!(worst.iter().all(|&c| c <= 10.0), "{worst:?}");
    assert!(worst[0] <= 1.0 + 1e-10);
}

#[test]
fn low_frequency_fields_live_in_the_low_slice() {
    let fr = frame(64, 64.0);
    let g = *fr.grid();
    let f = TorusField::from_spectrum(g, |xi| {
        if (xi[0] * xi[0] + xi[1] * xi[1]).sqrt() <= 0.25 {
            Complex64::new(1.0, 0.5)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let wf = analyze(&f, &fr).unwrap();
    let (slices, low) = wf.slice_energies();
    assert!(slices.iter().flatten().all(|&e| e == 0.0));
    let nf = f.l2_norm();
    assert!((low - nf * nf).abs() <= 1e-12 * nf * nf);
}

#[test]
fn a_single_packet_stays_near_its_phase_space_point() {
    let fr = frame(256, 8.0);
    let fam = Arc::clone(fr.family());
    let omega0 = Direction::from_angle(0.9);
    let sigma0 = 1.0 / 20.0;
    let sym = packet_symbol(&fam, RadialProfile::default(), omega0, sigma0).unwrap();
    let f = TorusField::from_spectrum(*fr.grid(), |xi| sym.evaluate(xi).unwrap());
    let wf = analyze(&f, &fr).unwrap();
    let (e, low) = wf.slice_energies();
    let total: f64 = e.iter().flatten().sum::<f64>() + low;
    let sigmas = fr.scales().sigmas();
    let mut near = 0.0;
    for (j, row) in e.iter().enumerate() {
        let d = fam.directions()[j].chord(&omega0);
        for (k, v) in row.iter().enumerate() {
            let ratio = sigmas[k] / sigma0;
            if d <= 4.0 * sigma0.sqrt() && (0.25..=4.0).contains(&ratio) {
                near += v;
            }
        }
    }
    assert!(near >= 0.9 * total, "{}", near / total);
}

fn shift(f: &TorusField, a: usize, b: usize) -> TorusField {
    let g = *f.grid();
    let m = g.points();
    let src = f.to_physical();
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for i in 0..m {
        for j in 0..m {
            out[g.flatten(&[(i + a) % m, (j + b) % m])] = src.values()[g.flatten(&[i, j])];
        }
    }
    TorusField::new(g, out, Space::Physical).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn projection_is_linear(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let fr = frame(32, 4.0);
        let c = Complex64::new(re, im);
        let a = random_phase_field(&fr, seed);
        let b = random_phase_field(&fr, seed ^ 0x55);
        let lhs = project(&a.sub(&b.scale(c)).unwrap(), &fr).unwrap();
        let rhs = project(&a, &fr).unwrap().sub(&project(&b, &fr).unwrap().scale(c)).unwrap();
        prop_assert!(phase_norm(&lhs.sub(&rhs).unwrap()) <= 1e-10 * (phase_norm(&a) + phase_norm(&b) * c.norm()));
    }

    #[test]
    fn analysis_commutes_with_lattice_translations(seed in any::<u64>(), a in 0usize..32, b in 0usize..32) {
        let fr = frame(32, 4.0);
        let f = field(&fr, seed);
        let wf = analyze(&f, &fr).unwrap();
        let ws = analyze(&shift(&f, a, b), &fr).unwrap();
        for (j, k) in [(0usize, 0usize), (3, 2), (fr.family().len() - 1, fr.scales().len() - 1)] {
            let lhs = ws.slice_physical(j, k).unwrap();
            let rhs = shift(&wf.slice_physical(j, k).unwrap(), a, b);
            let d = lhs.add_scaled(&rhs, Complex64::new(-1.0, 0.0)).unwrap().l2_norm();
            prop_assert!(d <= 1e-12 * f.l2_norm());
        }
    }
}
