//! Scaling fits, verdicts and report output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Largest root-mean-square log residual for which a fit is trusted.
pub const MAX_FIT_RESIDUAL: f64 = 0.05;

/// Minimum number of samples for a slope fit.
pub const MIN_FIT_SAMPLES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// `Fail` dominates `Inconclusive`, which dominates `Pass`.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
}

pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<LogFit> {
    if x.len() != y.len() {
        return invalid("fit inputs differ in length");
    }
    if x.len() < MIN_FIT_SAMPLES {
        return invalid(format!("a slope fit needs at least {MIN_FIT_SAMPLES} samples"));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid("log-log fit needs positive finite data");
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return invalid("fit abscissae are all equal");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(LogFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Acceptance rule for a fitted slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SlopeBound {
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Within { target: f64, tolerance: f64 },
    /// Reported only.
    None,
}

impl SlopeBound {
    pub fn holds(&self, slope: f64) -> bool {
        match *self {
            SlopeBound::AtMost { limit } => slope <= limit,
            SlopeBound::AtLeast { limit } => slope >= limit,
            SlopeBound::Within { target, tolerance } => (slope - target).abs() <= tolerance,
            SlopeBound::None => true,
        }
    }
}

/// Measured values against a swept parameter with a log-log slope fit.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingRun {
    pub run_id: String,
    pub parameter: String,
    pub values: Vec<f64>,
    pub measured: Vec<f64>,
    pub fit: LogFit,
    pub bound: SlopeBound,
    pub verdict: Verdict,
}

impl ScalingRun {
    /// Fits `measured` against `values`. A residual above
    /// [`MAX_FIT_RESIDUAL`] makes the run inconclusive.
    pub fn new(
        run_id: impl Into<String>,
        parameter: impl Into<String>,
        values: Vec<f64>,
        measured: Vec<f64>,
        bound: SlopeBound,
    ) -> Result<Self> {
        let fit = fit_loglog(&values, &measured)?;
        let verdict = if fit.residual > MAX_FIT_RESIDUAL {
            Verdict::Inconclusive
        } else if bound.holds(fit.slope) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Ok(Self {
            run_id: run_id.into(),
            parameter: parameter.into(),
            values,
            measured,
            fit,
            bound,
            verdict,
        })
    }

    pub fn slope(&self) -> f64 {
        self.fit.slope
    }
}

/// A named scalar compared against a stated limit.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

fn short(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:e}")
    } else {
        format!("{}", (x * 1e6).round() / 1e6)
    }
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit: format!("<= {}", short(limit)),
            passed: value <= limit,
        }
    }
    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit: format!(">= {}", short(limit)),
            passed: value >= limit,
        }
    }
    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit: format!("in [{}, {}]", short(lo), short(hi)),
            passed: value >= lo && value <= hi,
        }
    }
}

/// One long-format output row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub run_id: String,
    pub parameter: f64,
    /// Trial index, or `all` for aggregates.
    pub trial: String,
    pub metric: String,
    pub value: f64,
}

/// Everything one experiment produces.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: serde_json::Value,
    #[serde(skip)]
    pub rows: Vec<Row>,
    pub runs: Vec<ScalingRun>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
}

impl ExperimentReport {
    pub fn new<C: Serialize>(name: impl Into<String>, config: &C) -> Result<Self> {
        let config =
            serde_json::to_value(config).map_err(|e| Error::Config(format!("config echo: {e}")))?;
        Ok(Self {
            name: name.into(),
            config,
            rows: Vec::new(),
            runs: Vec::new(),
            checks: Vec::new(),
            verdict: Verdict::Pass,
        })
    }

    pub fn row(&mut self, run_id: &str, parameter: f64, trial: Option<usize>, metric: &str, value: f64) {
        self.rows.push(Row {
            run_id: run_id.to_string(),
            parameter,
            trial: trial.map_or_else(|| "all".to_string(), |t| t.to_string()),
            metric: metric.to_string(),
            value,
        });
    }

    pub fn push_run(&mut self, run: ScalingRun) {
        self.verdict = self.verdict.combine(run.verdict);
        self.runs.push(run);
    }

    pub fn push_check(&mut self, check: Check) {
        if !check.passed {
            self.verdict = Verdict::Fail;
        }
        self.checks.push(check);
    }

    pub fn run(&self, run_id: &str) -> Option<&ScalingRun> {
        self.runs.iter().find(|r| r.run_id == run_id)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Names of failed checks and runs.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        out.extend(
            self.runs
                .iter()
                .filter(|r| r.verdict == Verdict::Fail)
                .map(|r| r.run_id.clone()),
        );
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(["run-id", "parameter", "trial", "metric", "value"])
            .map_err(csv_err)?;
        for r in &self.rows {
            out.write_record([
                r.run_id.as_str(),
                &r.parameter.to_string(),
                &r.trial,
                &r.metric,
                &r.value.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`; returns both paths.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.json", self.name));
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(&csv_path)?))?;
        let mut json = self.to_json()?;
        json.push('\n');
        std::fs::write(&json_path, json)?;
        Ok((csv_path, json_path))
    }
}

/// `max / min` of positive values.
pub fn drift(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Largest growth factor `values[j] / values[i]` over `i < j`.
pub fn growth(values: &[f64]) -> f64 {
    let mut best: f64 = 1.0;
    let mut lo = f64::INFINITY;
    for &v in values {
        if lo.is_finite() {
            best = best.max(v / lo);
        }
        lo = lo.min(v);
    }
    best
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
