//! Command line front end: `decnorm <subcommand> [--key value ...]`.
//!
//! Every subcommand option can also come from a `key = value` file passed
//! with `--config`; flags override the file. Blank lines and lines starting
//! with `#` are ignored.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, Command};
use serde_json::json;

use crate::error::{Error, Result};
use crate::experiments::{
    run_counterexample, run_decoupling_cone, run_decoupling_sphere, run_embedding_scan, run_halfwave,
    run_local_smoothing, run_selftest, ConeConfig, CounterexampleConfig, EmbeddingConfig, ExperimentReport,
    HalfwaveConfig, LocalSmoothingConfig, ModelKind, SelftestConfig, SphereConfig, Verdict,
};
use crate::frames::{build_caps, minimum_count, AngularProfile, DirectionalFamily, RadialProfile, DEFAULT_BAND};
use crate::grid::{apply_multiplier, read_field, Symbol};
use crate::norms::{dec_norm_continuous, dec_norm_discrete, lqp_norm, NormSpec};
use crate::transform::{analyze, RenormalizedFrame, DEFAULT_PER_OCTAVE};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const THREADS_ENV: &str = "DECNORM_THREADS";
const DEFAULT_OUT: &str = "decnorm-out";

const GLOBAL_KEYS: &[(&str, &str)] = &[
    ("config", "key = value file; flags override its entries"),
    ("threads", "worker thread cap (fallback: DECNORM_THREADS)"),
    ("out", "output directory for CSV and JSON artifacts"),
];

const NORM_KEYS: &[(&str, &str)] = &[
    ("input", "binary field file"),
    ("id", "field id for the CSV row (default: file stem)"),
    ("p", "Lebesgue exponent, 2 <= p < inf"),
    ("q", "sequence exponent, 2 <= q < inf"),
    ("s", "smoothness"),
    ("variant", "continuous | discrete | transform"),
    ("R", "frequency scale for the discrete variant"),
    ("directions", "direction count (default: the minimum for the grid)"),
    ("per-octave", "scales per octave for the transform variant"),
    ("band", "resolved band as a fraction of the Nyquist frequency"),
];

const SPHERE_KEYS: &[(&str, &str)] = &[
    ("p", "Lebesgue exponent"),
    ("q", "sequence exponent"),
    ("R", "comma-separated frequency scales"),
    ("trials", "random fields per scale (>= 10)"),
    ("model", "rademacher-caps | gaussian-caps | single-cap | focusing-all-ones"),
    ("seed", "RNG seed"),
    ("kappa", "annulus half-width"),
    ("index-scale", "lattice radius of the annulus divided by R"),
    ("slack", "allowed excess of the fitted slope over d(p, q)"),
];

const CONE_KEYS: &[(&str, &str)] = &[
    ("p", "Lebesgue exponent"),
    ("q", "sequence exponent"),
    ("R", "comma-separated cap scales"),
    ("trials", "random fields per scale (>= 10)"),
    ("model", "rademacher-caps | gaussian-caps | single-cap | focusing-all-ones"),
    ("seed", "RNG seed"),
    ("M", "grid points per axis"),
    ("inner", "inner radius of the slab"),
    ("outer", "outer radius of the slab"),
    ("thickness", "slab half-thickness"),
    ("slack", "allowed excess of the fitted slope over d(p, q)"),
];

const HALFWAVE_KEYS: &[(&str, &str)] = &[
    ("pairs", "comma-separated p:q pairs"),
    ("p", "single Lebesgue exponent (with --q, replaces --pairs)"),
    ("q", "single sequence exponent"),
    ("s", "smoothness"),
    ("t", "comma-separated times in [0, 4]"),
    ("fields", "random fields in the battery"),
    ("M", "grid points per axis"),
    ("L", "torus side"),
    ("inner", "inner radius of the random fields"),
    ("seed", "RNG seed"),
    ("ratio-cap", "largest admissible norm ratio"),
];

const LOCAL_KEYS: &[(&str, &str)] = &[
    ("p", "Lebesgue exponent"),
    ("q", "sequence exponent"),
    ("s", "smoothness"),
    ("R", "comma-separated frequency scales"),
    ("t-samples", "time samples on [0, 1] (>= 16)"),
    ("trials", "random fields per scale"),
    ("M", "grid points per axis"),
    ("seed", "RNG seed"),
    ("slope-limit", "largest admissible fitted slope"),
];

const COUNTER_KEYS: &[(&str, &str)] = &[
    ("p", "Lebesgue exponent"),
    ("q", "sequence exponent"),
    ("R", "frequency scale"),
    ("N", "comma-separated packet counts"),
    ("M", "grid points per axis"),
    ("L", "torus side"),
    ("band", "resolved band as a fraction of the Nyquist frequency"),
    ("seed", "echoed only; the construction is deterministic"),
    ("slope-tolerance", "tolerance on the fitted slopes"),
    ("separation", "required slope gap"),
];

const EMBED_KEYS: &[(&str, &str)] = &[
    ("p", "Lebesgue exponent"),
    ("q", "sequence exponent"),
    ("R", "comma-separated frequency scales"),
    ("trials", "random fields per scale"),
    ("kappa", "annulus half-width"),
    ("spacing", "frequency lattice spacing"),
    ("seed", "RNG seed"),
    ("slope-limit", "largest admissible fitted slope"),
];

const SELFTEST_KEYS: &[(&str, &str)] = &[
    ("seed", "RNG seed"),
    ("fault", "perturb the frame renormaliser by this relative amount"),
];

fn subcommands() -> [(&'static str, &'static str, &'static [(&'static str, &'static str)]); 8] {
    [
        ("norm", "evaluate a decoupling norm of a stored field", NORM_KEYS),
        ("decouple-sphere", "decoupling ratios for thin annuli", SPHERE_KEYS),
        ("decouple-cone", "decoupling ratios for light-cone slabs", CONE_KEYS),
        ("halfwave", "norm ratios under the half-wave group", HALFWAVE_KEYS),
        ("localsmooth", "local smoothing against the decoupling norm", LOCAL_KEYS),
        ("counterexample", "a change of variables that is unbounded for p != q", COUNTER_KEYS),
        ("embed-scan", "Sobolev embedding of radially localized fields", EMBED_KEYS),
        ("selftest", "small checks of every module", SELFTEST_KEYS),
    ]
}

fn keys_for(sub: &str) -> &'static [(&'static str, &'static str)] {
    subcommands()
        .into_iter()
        .find(|(name, _, _)| *name == sub)
        .map(|(_, _, k)| k)
        .unwrap_or(&[])
}

pub fn command() -> Command {
    let mut cmd = Command::new("decnorm")
        .about("Decoupling norms, wave packet transforms and scaling experiments")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for (key, help) in GLOBAL_KEYS {
        cmd = cmd.arg(Arg::new(*key).long(*key).help(*help).global(true).action(ArgAction::Set));
    }
    for (name, about, keys) in subcommands() {
        let mut sub = Command::new(name).about(about);
        for (key, help) in keys {
            sub = sub.arg(Arg::new(*key).long(*key).help(*help).action(ArgAction::Set));
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

/// Parses a `key = value` file.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", i + 1)));
        };
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Merged options of one invocation.
#[derive(Clone, Debug)]
pub struct Options {
    pub subcommand: String,
    pub values: BTreeMap<String, String>,
}

impl Options {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("--{key}: cannot parse '{v}'"))),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("--{key}: cannot parse '{x}'")))
                })
                .collect(),
        }
    }

    fn pairs(&self, default: Vec<(f64, f64)>) -> Result<Vec<(f64, f64)>> {
        match (self.raw("p"), self.raw("q")) {
            (None, None) => {}
            _ => return Ok(vec![(self.parse("p", 2.0)?, self.parse("q", 2.0)?)]),
        }
        let Some(v) = self.raw("pairs") else {
            return Ok(default);
        };
        v.split(',')
            .map(|pq| {
                let bad = || Error::Config(format!("--pairs: expected p:q, got '{pq}'"));
                let (p, q) = pq.trim().split_once(':').ok_or_else(bad)?;
                Ok((p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?))
            })
            .collect()
    }

    fn threads(&self) -> Result<Option<usize>> {
        let v = match self.raw("threads") {
            Some(v) => v.to_string(),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => v,
                Err(_) => return Ok(None),
            },
        };
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("thread count must be a positive integer, got '{v}'"))),
        }
    }

    /// Options that determine the outputs, for the config echo.
    fn echo(&self) -> BTreeMap<&str, &str> {
        self.values
            .iter()
            .filter(|(k, _)| !GLOBAL_KEYS.iter().any(|(g, _)| g == k))
            .map(|(k, v)| (k.as_str(), v.as_str()))
            .collect()
    }
}

/// Parses `argv` (including the program name) and merges the config file.
pub fn parse_options<I, T>(argv: I) -> std::result::Result<Options, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = command().try_get_matches_from(argv)?;
    let (sub, sm) = matches.subcommand().expect("subcommand is required");
    let mut values = BTreeMap::new();
    let config = sm.get_one::<String>("config").cloned();
    if let Some(path) = &config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            command().error(clap::error::ErrorKind::Io, format!("cannot read config '{path}': {e}"))
        })?;
        let file = parse_config(&text).map_err(|e| command().error(clap::error::ErrorKind::InvalidValue, e))?;
        let allowed = keys_for(sub);
        for (k, v) in file {
            let known = allowed.iter().chain(GLOBAL_KEYS).any(|(a, _)| *a == k);
            if !known || k == "config" {
                return Err(command().error(
                    clap::error::ErrorKind::UnknownArgument,
                    format!("config key '{k}' is not an option of '{sub}'"),
                ));
            }
            values.insert(k, v);
        }
    }
    for (key, _) in keys_for(sub).iter().chain(GLOBAL_KEYS) {
        if *key == "config" {
            continue;
        }
        if sm.value_source(key) == Some(ValueSource::CommandLine) {
            values.insert(key.to_string(), sm.get_one::<String>(key).expect("set").clone());
        }
    }
    Ok(Options {
        subcommand: sub.to_string(),
        values,
    })
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let opts = match parse_options(argv) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    match dispatch(&opts) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(opts: &Options) -> Result<i32> {
    let threads = opts.threads()?;
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?
    };
    let start = Instant::now();
    let code = pool.install(|| match opts.subcommand.as_str() {
        "norm" => run_norm(opts),
        other => {
            let report = run_experiment(other, opts)?;
            finish(opts, report)
        }
    })?;
    eprintln!("elapsed {:.2}s", start.elapsed().as_secs_f64());
    Ok(code)
}

fn run_experiment(sub: &str, o: &Options) -> Result<ExperimentReport> {
    let model = |d: ModelKind| -> Result<ModelKind> {
        match o.raw("model") {
            None => Ok(d),
            Some(v) => v.parse(),
        }
    };
    match sub {
        "decouple-sphere" => {
            let d = SphereConfig::default();
            run_decoupling_sphere(&SphereConfig {
                p: o.parse("p", d.p)?,
                q: o.parse("q", d.q)?,
                r_list: o.list("R", d.r_list)?,
                trials: o.parse("trials", d.trials)?,
                model: model(d.model)?,
                seed: o.parse("seed", d.seed)?,
                kappa: o.parse("kappa", d.kappa)?,
                index_scale: o.parse("index-scale", d.index_scale)?,
                slope_slack: o.parse("slack", d.slope_slack)?,
            })
        }
        "decouple-cone" => {
            let d = ConeConfig::default();
            run_decoupling_cone(&ConeConfig {
                p: o.parse("p", d.p)?,
                q: o.parse("q", d.q)?,
                r_list: o.list("R", d.r_list)?,
                trials: o.parse("trials", d.trials)?,
                model: model(d.model)?,
                seed: o.parse("seed", d.seed)?,
                points: o.parse("M", d.points)?,
                inner: o.parse("inner", d.inner)?,
                outer: o.parse("outer", d.outer)?,
                thickness: o.parse("thickness", d.thickness)?,
                slope_slack: o.parse("slack", d.slope_slack)?,
            })
        }
        "halfwave" => {
            let d = HalfwaveConfig::default();
            run_halfwave(&HalfwaveConfig {
                pairs: o.pairs(d.pairs)?,
                s: o.parse("s", d.s)?,
                t_list: o.list("t", d.t_list)?,
                fields: o.parse("fields", d.fields)?,
                points: o.parse("M", d.points)?,
                side: o.parse("L", d.side)?,
                inner: o.parse("inner", d.inner)?,
                seed: o.parse("seed", d.seed)?,
                ratio_cap: o.parse("ratio-cap", d.ratio_cap)?,
            })
        }
        "localsmooth" => {
            let d = LocalSmoothingConfig::default();
            run_local_smoothing(&LocalSmoothingConfig {
                p: o.parse("p", d.p)?,
                q: o.parse("q", d.q)?,
                s: o.parse("s", d.s)?,
                r_list: o.list("R", d.r_list)?,
                t_samples: o.parse("t-samples", d.t_samples)?,
                trials: o.parse("trials", d.trials)?,
                points: o.parse("M", d.points)?,
                seed: o.parse("seed", d.seed)?,
                slope_limit: o.parse("slope-limit", d.slope_limit)?,
            })
        }
        "counterexample" => {
            let d = CounterexampleConfig::default();
            run_counterexample(&CounterexampleConfig {
                p: o.parse("p", d.p)?,
                q: o.parse("q", d.q)?,
                r: o.parse("R", d.r)?,
                n_list: o.list("N", d.n_list)?,
                points: o.parse("M", d.points)?,
                side: o.parse("L", d.side)?,
                band_fraction: o.parse("band", d.band_fraction)?,
                seed: o.parse("seed", d.seed)?,
                slope_tolerance: o.parse("slope-tolerance", d.slope_tolerance)?,
                separation: o.parse("separation", d.separation)?,
            })
        }
        "embed-scan" => {
            let d = EmbeddingConfig::default();
            run_embedding_scan(&EmbeddingConfig {
                p: o.parse("p", d.p)?,
                q: o.parse("q", d.q)?,
                r_list: o.list("R", d.r_list)?,
                trials: o.parse("trials", d.trials)?,
                kappa: o.parse("kappa", d.kappa)?,
                spacing: o.parse("spacing", d.spacing)?,
                seed: o.parse("seed", d.seed)?,
                slope_limit: o.parse("slope-limit", d.slope_limit)?,
            })
        }
        "selftest" => {
            let d = SelftestConfig::default();
            let fault = match o.raw("fault") {
                None => None,
                Some(_) => Some(o.parse("fault", 0.0)?),
            };
            run_selftest(&SelftestConfig {
                seed: o.parse("seed", d.seed)?,
                fault,
            })
        }
        other => Err(Error::Config(format!("unknown subcommand '{other}'"))),
    }
}

fn out_dir(o: &Options) -> PathBuf {
    PathBuf::from(o.raw("out").unwrap_or(DEFAULT_OUT))
}

fn finish(o: &Options, mut report: ExperimentReport) -> Result<i32> {
    let experiment = std::mem::take(&mut report.config);
    report.config = json!({
        "subcommand": o.subcommand,
        "options": o.echo(),
        "experiment": experiment,
    });
    let (csv, js) = report.write_to_dir(&out_dir(o))?;
    let mut stdout = std::io::stdout().lock();
    print_summary(&mut stdout, &report)?;
    writeln!(stdout, "wrote {} and {}", csv.display(), js.display())?;
    Ok(match report.verdict {
        Verdict::Pass => EXIT_PASS,
        _ => EXIT_FAIL,
    })
}

/// One line per scaling run and per check, then the overall verdict.
pub fn print_summary<W: Write>(w: &mut W, report: &ExperimentReport) -> Result<()> {
    for run in &report.runs {
        writeln!(
            w,
            "run {}: slope {:.4} residual {:.4} bound {:?} -> {:?}",
            run.run_id, run.fit.slope, run.fit.residual, run.bound, run.verdict
        )?;
    }
    for c in &report.checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        writeln!(w, "check {}: {:.6e} {} -> {mark}", c.name, c.value, c.limit)?;
    }
    writeln!(w, "verdict: {:?}", report.verdict)?;
    Ok(())
}

fn run_norm(o: &Options) -> Result<i32> {
    let input = o
        .raw("input")
        .ok_or_else(|| Error::Config("norm needs --input".into()))?;
    let f = read_field(input)?;
    let p: f64 = o.parse("p", 2.0)?;
    let q: f64 = o.parse("q", 2.0)?;
    let s: f64 = o.parse("s", 0.0)?;
    let spec = NormSpec::new(p, q, s)?;
    let variant = o.raw("variant").unwrap_or("continuous");
    let band: f64 = o.parse("band", DEFAULT_BAND)?;
    let grid = *f.grid();
    let count = o.parse("directions", minimum_count(grid.dim(), grid.xi_max()))?;
    let family = || DirectionalFamily::new(&grid, count, band, AngularProfile::Standard);
    let value = match variant {
        "continuous" => dec_norm_continuous(&f, spec, &family()?)?,
        "discrete" => {
            let r: f64 = o
                .raw("R")
                .ok_or_else(|| Error::Config("the discrete variant needs --R".into()))
                .and_then(|_| o.parse("R", 0.0))?;
            let caps = build_caps(r, grid.dim())?;
            dec_norm_discrete(&f, spec, &caps, r)?
        }
        "transform" => {
            let frame = Arc::new(RenormalizedFrame::new(
                grid,
                Arc::new(family()?),
                RadialProfile::default(),
                o.parse("per-octave", DEFAULT_PER_OCTAVE)?,
            )?);
            let g = if s == 0.0 {
                f
            } else {
                apply_multiplier(&f, &Symbol::bracket_power(s))?
            };
            lqp_norm(&analyze(&g, &frame)?, p, q)?
        }
        other => {
            return Err(Error::Config(format!(
                "unknown variant '{other}' (continuous, discrete, transform)"
            )))
        }
    };
    let id = match o.raw("id") {
        Some(id) => id.to_string(),
        None => Path::new(input)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| input.to_string()),
    };
    let row = NormRow {
        field_id: id,
        p,
        q,
        s,
        variant: variant.to_string(),
        value,
    };
    write_norm_rows(std::io::stdout().lock(), std::slice::from_ref(&row))?;
    if let Some(dir) = o.raw("out") {
        std::fs::create_dir_all(dir)?;
        write_norm_rows(std::fs::File::create(Path::new(dir).join("norm.csv"))?, &[row])?;
    }
    Ok(EXIT_PASS)
}

#[derive(Clone, Debug, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct NormRow {
    pub field_id: String,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub variant: String,
    pub value: f64,
}

pub fn write_norm_rows<W: Write>(w: W, rows: &[NormRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
