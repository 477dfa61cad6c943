use std::path::Path;
use std::process::{Command, Output};

use decnorm::experiments::gaussian_band_field;
use decnorm::grid::{write_field, TorusGrid};
use decnorm::norms::{dec_norm_continuous, NormSpec};
use decnorm::frames::{AngularProfile, DirectionalFamily, DEFAULT_BAND};

fn decnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decnorm"))
        .args(args)
        .env_remove("DECNORM_THREADS")
        .output()
        .unwrap()
}

fn out_dir(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

#[test]
fn selftest_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = decnorm(&["selftest", "--out", &out_dir(dir.path())]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("verdict: Pass"));
    assert!(dir.path().join("selftest.json").exists());
    assert!(dir.path().join("selftest.csv").exists());

    let bad = decnorm(&["selftest", "--fault", "1e-3", "--out", &out_dir(dir.path())]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("verdict: Fail"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["selftest", "--bogus", "1"],
        vec!["no-such-command"],
        vec!["norm"],
        vec!["selftest", "--seed", "x"],
        vec!["selftest", "--config", "/nonexistent/decnorm.conf"],
    ] {
        let out = decnorm(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    std::fs::write(&conf, "# selftest settings\nseed = 3\nfault = 1e-3\n").unwrap();
    let faulty = decnorm(&["selftest", "--config", conf.to_str().unwrap(), "--out", &out_dir(dir.path())]);
    assert_eq!(faulty.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("selftest.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["options"]["seed"], "3");

    let flagged = decnorm(&["selftest", "--config", conf.to_str().unwrap(), "--seed", "9", "--out", &out_dir(dir.path())]);
    assert_eq!(flagged.status.code(), Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("selftest.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["options"]["seed"], "9");
    assert_eq!(json["config"]["options"]["fault"], "1e-3");

    std::fs::write(&conf, "--seed=4\n").unwrap();
    let clean = decnorm(&["selftest", "--config", conf.to_str().unwrap(), "--out", &out_dir(dir.path())]);
    assert_eq!(clean.status.code(), Some(0));

    std::fs::write(&conf, "colour = blue\n").unwrap();
    let unknown = decnorm(&["selftest", "--config", conf.to_str().unwrap()]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn norm_subcommand_prints_a_csv_row() {
    let dir = tempfile::tempdir().unwrap();
    let g = TorusGrid::new(2, 64, 8.0).unwrap();
    let fam = DirectionalFamily::for_grid(&g, DEFAULT_BAND, AngularProfile::Standard).unwrap();
    let f = gaussian_band_field(&g, 0.0, fam.band_top(), 2).unwrap();
    let path = dir.path().join("wave.bin");
    write_field(&f, &path).unwrap();
    let want = dec_norm_continuous(&f, NormSpec::new(4.0, 2.0, 0.5).unwrap(), &fam).unwrap();

    let out = decnorm(&["norm", "--input", path.to_str().unwrap(), "--p", "4", "--q", "2", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("field-id,p,q,s,variant,value"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[..5], &["wave", "4.0", "2.0", "0.5", "continuous"]);
    let got: f64 = row[5].parse().unwrap();
    assert!((got / want - 1.0).abs() <= 1e-12, "{got} vs {want}");

    let bad = decnorm(&["norm", "--input", path.to_str().unwrap(), "--variant", "discrete"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = decnorm(&["selftest", "--seed", "5", "--threads", "1", "--out", &out_dir(d.path())]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["selftest.csv", "selftest.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}
