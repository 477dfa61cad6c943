use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use decnorm::experiments::gaussian_band_field;
use decnorm::frames::{AngularProfile, DirectionalFamily, DEFAULT_BAND};
use decnorm::grid::{write_field, TorusGrid};
use decnorm::norms::{dec_norm_continuous, NormSpec};
use decnorm_ffi::*;

fn last_error() -> String {
    let p = decnorm_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn grid_handles_and_errors() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(decnorm_grid_new(2, 64, 8.0, &mut g), DecnormStatus::Ok);
        assert!(decnorm_last_error().is_null());
        let mut len = 0usize;
        assert_eq!(decnorm_grid_len(g, &mut len), DecnormStatus::Ok);
        assert_eq!(len, 64 * 64);
        let mut xi = 0.0;
        assert_eq!(decnorm_grid_xi_max(g, &mut xi), DecnormStatus::Ok);
        assert!((xi - std::f64::consts::PI * 8.0).abs() < 1e-12);
        decnorm_grid_free(g);

        let mut bad = ptr::null_mut();
        assert_eq!(decnorm_grid_new(2, 60, 8.0, &mut bad), DecnormStatus::InvalidArgument);
        assert!(bad.is_null());
        assert!(last_error().contains("power of two"), "{}", last_error());
        assert_eq!(decnorm_grid_new(2, 64, 8.0, ptr::null_mut()), DecnormStatus::NullPointer);
        assert_eq!(decnorm_grid_len(ptr::null(), &mut len), DecnormStatus::NullPointer);
        decnorm_grid_free(ptr::null_mut());
    }
}

#[test]
fn norms_match_the_library() {
    let grid = TorusGrid::new(2, 64, 8.0).unwrap();
    let fam = DirectionalFamily::for_grid(&grid, DEFAULT_BAND, AngularProfile::Standard).unwrap();
    let f = gaussian_band_field(&grid, 0.0, fam.band_top(), 4).unwrap();
    let want = dec_norm_continuous(&f, NormSpec::new(4.0, 2.0, 0.25).unwrap(), &fam).unwrap();
    let phys = f.to_physical();
    let re: Vec<f64> = phys.values().iter().map(|v| v.re).collect();
    let im: Vec<f64> = phys.values().iter().map(|v| v.im).collect();
    unsafe {
        let (mut g, mut h, mut fh) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(decnorm_grid_new(2, 64, 8.0, &mut g), DecnormStatus::Ok);
        assert_eq!(decnorm_family_new(g, &mut h), DecnormStatus::Ok);
        assert_eq!(decnorm_field_new(g, re.as_ptr(), im.as_ptr(), re.len(), &mut fh), DecnormStatus::Ok);
        let mut got = 0.0;
        assert_eq!(decnorm_dec_norm(fh, h, 4.0, 2.0, 0.25, &mut got), DecnormStatus::Ok);
        assert!((got / want - 1.0).abs() <= 1e-12);

        let mut back = vec![0.0; re.len()];
        assert_eq!(decnorm_field_values(fh, back.as_mut_ptr(), ptr::null_mut(), back.len()), DecnormStatus::Ok);
        assert!(back.iter().zip(&re).all(|(a, b)| (a - b).abs() <= 1e-12));
        assert_eq!(decnorm_field_values(fh, back.as_mut_ptr(), ptr::null_mut(), 3), DecnormStatus::InvalidArgument);

        assert_eq!(decnorm_dec_norm(fh, h, 0.5, 2.0, 0.0, &mut got), DecnormStatus::InvalidArgument);
        assert_eq!(decnorm_dec_norm_discrete(fh, 8.0, 4.0, 2.0, 0.0, &mut got), DecnormStatus::SupportViolation);
        assert!(last_error().contains("support"));
        assert_eq!(decnorm_field_new(g, re.as_ptr(), ptr::null(), 5, &mut fh), DecnormStatus::GridMismatch);

        let wide = gaussian_band_field(&grid, 0.0, grid.xi_max(), 1).unwrap().to_physical();
        let wre: Vec<f64> = wide.values().iter().map(|v| v.re).collect();
        let wim: Vec<f64> = wide.values().iter().map(|v| v.im).collect();
        let mut wh = ptr::null_mut();
        assert_eq!(decnorm_field_new(g, wre.as_ptr(), wim.as_ptr(), wre.len(), &mut wh), DecnormStatus::Ok);
        assert_eq!(decnorm_dec_norm(wh, h, 2.0, 2.0, 0.0, &mut got), DecnormStatus::BandViolation);

        decnorm_field_free(wh);
        decnorm_field_free(fh);
        decnorm_family_free(h);
        decnorm_grid_free(g);
    }
}

#[test]
fn fields_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TorusGrid::new(2, 32, 4.0).unwrap();
    let f = gaussian_band_field(&grid, 0.0, 5.0, 2).unwrap();
    let path = dir.path().join("f.bin");
    write_field(&f, &path).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    unsafe {
        let mut h = ptr::null_mut();
        assert_eq!(decnorm_field_read(cpath.as_ptr(), &mut h), DecnormStatus::Ok);
        let mut re = vec![0.0; grid.len()];
        assert_eq!(decnorm_field_values(h, re.as_mut_ptr(), ptr::null_mut(), re.len()), DecnormStatus::Ok);
        let want = f.to_physical();
        assert!(re.iter().zip(want.values()).all(|(a, b)| (a - b.re).abs() <= 1e-12));
        decnorm_field_free(h);
        let missing = CString::new(dir.path().join("nope.bin").to_str().unwrap()).unwrap();
        assert_eq!(decnorm_field_read(missing.as_ptr(), &mut h), DecnormStatus::Io);
        assert_eq!(decnorm_field_read(ptr::null(), &mut h), DecnormStatus::NullPointer);
    }
}

#[test]
fn scalar_functions() {
    unsafe {
        let mut v = 0.0;
        assert_eq!(decnorm_exponent(DecnormExponent::S, 6.0, 0.0, 2, &mut v), DecnormStatus::Ok);
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(decnorm_exponent(DecnormExponent::D, 6.0, 6.0, 2, &mut v), DecnormStatus::Ok);
        assert!((v - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(decnorm_exponent(DecnormExponent::Alpha, 10.0, 0.0, 2, &mut v), DecnormStatus::Ok);
        assert!((v - 0.1).abs() < 1e-15);
        assert_eq!(decnorm_exponent(DecnormExponent::Sigma, 4.0, 0.0, 2, &mut v), DecnormStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(decnorm_exponent(DecnormExponent::S, 6.0, 0.0, 1, &mut v), DecnormStatus::InvalidArgument);

        let e1 = [2.0, 0.0];
        let x = [1.0, 1.0];
        assert_eq!(decnorm_aniso_norm(2, e1.as_ptr(), x.as_ptr(), &mut v), DecnormStatus::Ok);
        assert!((v - ((1.0 + 5f64.sqrt()) / 2.0).sqrt()).abs() < 1e-14);
        let zero = [0.0, 0.0];
        assert_eq!(decnorm_aniso_norm(2, zero.as_ptr(), x.as_ptr(), &mut v), DecnormStatus::InvalidArgument);
        assert_eq!(decnorm_aniso_norm(2, ptr::null(), x.as_ptr(), &mut v), DecnormStatus::NullPointer);

        let version = CStr::from_ptr(decnorm_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn selftest_through_the_abi() {
    unsafe {
        let mut passed = -1;
        assert_eq!(decnorm_selftest(1, 0.0, &mut passed), DecnormStatus::Ok);
        assert_eq!(passed, 1);
        assert_eq!(decnorm_selftest(1, 1e-3, &mut passed), DecnormStatus::Ok);
        assert_eq!(passed, 0);
    }
}

/// Compiles the C smoke program against the generated header and the
/// static library, then runs it.
#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = manifest.join("include/decnorm.h");
    assert!(header.exists());
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["decnorm_grid_new", "decnorm_dec_norm", "decnorm_last_error", "DECNORM_STATUS_OK"] {
        assert!(text.contains(name), "{name}");
    }
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libdecnorm_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-D_DEFAULT_SOURCE")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
