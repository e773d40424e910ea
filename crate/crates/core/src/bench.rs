//! Timing sweeps over models and log lengths.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::log::{generate_log, GenerateConfig, TimedWord};
use crate::method::{MembershipMethod, MethodRegistry};
use crate::model::{builtin_base, builtin_model, model_from_json, spec_from_json, BuiltinSelector, Lha, ModelError};
use crate::monitor::{MonitorConfig, MonitorVerdict, Verdict};
use crate::numeric::Rational;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed plan: {0}")]
    Plan(String),
    #[error("nothing to plot along the {0} axis")]
    EmptyAxis(PlotAxis),
}

/// A model to benchmark: logs come from `base`, verdicts from `monitored`.
#[derive(Debug, Clone)]
pub struct BenchModel {
    pub label: String,
    pub base: Lha,
    pub monitored: Lha,
}

impl BenchModel {
    pub fn builtin(sel: &BuiltinSelector) -> Result<BenchModel, ModelError> {
        let (base, _) = builtin_base(sel)?;
        Ok(BenchModel { label: sel.to_string(), base, monitored: builtin_model(sel)? })
    }

    /// A model file, with an optional safety specification to monitor against.
    pub fn from_files(model: &Path, spec: Option<&Path>) -> Result<BenchModel, BenchError> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|source| BenchError::Io { path: p.to_path_buf(), source });
        let base = model_from_json(&read(model)?)?;
        let monitored = match spec {
            Some(s) => base.against_safety(&spec_from_json(&read(s)?, &base.space)?)?,
            None => base.clone(),
        };
        Ok(BenchModel { label: model.display().to_string(), base, monitored })
    }

    pub fn dimension(&self) -> usize {
        self.base.space.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMethod {
    Direct,
    #[serde(alias = "method1")]
    Product,
    Both,
}

impl BenchMethod {
    fn names(self) -> &'static [&'static str] {
        match self {
            BenchMethod::Direct => &["direct"],
            BenchMethod::Product => &["product"],
            BenchMethod::Both => &["direct", "product"],
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub models: Vec<BenchModel>,
    pub lengths: Vec<usize>,
    pub seeds: u64,
    /// Added to the seed index of every generated log.
    pub base_seed: u64,
    pub interval: (Rational, Rational),
    pub method: BenchMethod,
    pub cap: Option<usize>,
    /// Remaining runs of a cell are skipped once it has used this much monitoring time.
    pub timeout: Option<Duration>,
}

impl BenchPlan {
    /// Lengths 10, 100 and 1000 with five seeds each.
    pub fn desk_scale(models: Vec<BenchModel>) -> BenchPlan {
        BenchPlan {
            models,
            lengths: vec![10, 100, 1000],
            seeds: 5,
            base_seed: 0,
            interval: (Rational::from(1), Rational::from(5)),
            method: BenchMethod::Direct,
            cap: None,
            timeout: Some(Duration::from_secs(120)),
        }
    }
}

/// JSON form of a plan: models are builtin names or `{ "model": path, "spec": path }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub models: Vec<PlanModel>,
    #[serde(default)]
    pub lengths: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_interval")]
    pub interval: [Rational; 2],
    #[serde(default = "default_method")]
    pub method: BenchMethod,
    #[serde(default)]
    pub cap: Option<usize>,
    #[serde(default)]
    pub timeout_secs: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PlanModel {
    Builtin(String),
    File { model: PathBuf, spec: Option<PathBuf> },
}

fn default_seeds() -> u64 {
    5
}

fn default_interval() -> [Rational; 2] {
    [Rational::from(1), Rational::from(5)]
}

fn default_method() -> BenchMethod {
    BenchMethod::Direct
}

impl PlanFile {
    pub fn parse(text: &str) -> Result<PlanFile, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Plan(e.to_string()))
    }

    /// Loads the models; relative paths are taken from `dir`.
    pub fn resolve(&self, dir: &Path) -> Result<BenchPlan, BenchError> {
        let mut models = Vec::with_capacity(self.models.len());
        for m in &self.models {
            models.push(match m {
                PlanModel::Builtin(name) => BenchModel::builtin(&name.parse()?)?,
                PlanModel::File { model, spec } => {
                    BenchModel::from_files(&dir.join(model), spec.as_ref().map(|s| dir.join(s)).as_deref())?
                }
            });
        }
        let [lo, hi] = self.interval.clone();
        if lo.is_negative() || lo > hi {
            return Err(BenchError::Plan(format!("invalid interval [{lo}, {hi}]")));
        }
        let timeout = match self.timeout_secs {
            Some(s) if !(s.is_finite() && s > 0.0) => return Err(BenchError::Plan(format!("invalid timeout {s}"))),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(BenchPlan {
            models,
            lengths: self.lengths.clone(),
            seeds: self.seeds,
            base_seed: self.base_seed,
            interval: (lo, hi),
            method: self.method,
            cap: self.cap,
            timeout,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerdictCounts {
    pub accepted: usize,
    pub rejected: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodStats {
    pub method: String,
    /// Monitoring wall time per completed run, in seconds.
    pub seconds: Vec<f64>,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Over all indices of all completed runs.
    pub verdicts: VerdictCounts,
    /// Runs with at least one saturated interval.
    pub saturated_runs: usize,
    /// Fraction of completed runs accepting each index.
    pub acceptance_rates: Vec<f64>,
    pub timed_out: bool,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub model: String,
    pub dimension: usize,
    pub length: usize,
    pub runs: usize,
    /// Logs the generator could not complete; these runs are skipped.
    pub generation_failures: usize,
    pub methods: Vec<MethodStats>,
    /// Accepted-versus-rejected disagreements between methods, when more than one ran.
    pub disagreements: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BenchReport {
    pub cells: Vec<CellReport>,
}

impl BenchReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

fn conflicts(a: &MonitorVerdict, b: &MonitorVerdict) -> usize {
    a.indices
        .iter()
        .zip(&b.indices)
        .filter(|(x, y)| {
            matches!(
                (x.verdict, y.verdict),
                (Verdict::Accepted, Verdict::Rejected) | (Verdict::Rejected, Verdict::Accepted)
            )
        })
        .count()
}

/// Runs every (model, length) cell of the plan. Only monitoring is timed.
pub fn run_bench(plan: &BenchPlan) -> BenchReport {
    let registry = MethodRegistry::default();
    let methods: Vec<&dyn MembershipMethod> =
        plan.method.names().iter().map(|n| registry.get(n).expect("builtin method")).collect();
    let cfg = MonitorConfig { cap: plan.cap, merge: true, witness: false };
    let mut report = BenchReport::default();
    for model in &plan.models {
        for &length in &plan.lengths {
            report.cells.push(run_cell(plan, model, length, &methods, &cfg));
        }
    }
    report
}

fn run_cell(plan: &BenchPlan, model: &BenchModel, length: usize, methods: &[&dyn MembershipMethod], cfg: &MonitorConfig) -> CellReport {
    let mut logs: Vec<TimedWord> = Vec::new();
    let mut generation_failures = 0;
    for k in 0..plan.seeds {
        let gen = GenerateConfig {
            seed: plan.base_seed + k,
            length,
            interval: plan.interval.clone(),
            ..GenerateConfig::default()
        };
        match generate_log(&model.base, &gen) {
            Ok(w) => logs.push(w),
            Err(_) => generation_failures += 1,
        }
    }

    let mut stats = Vec::with_capacity(methods.len());
    let mut verdicts: Vec<Vec<Option<MonitorVerdict>>> = Vec::with_capacity(methods.len());
    for method in methods {
        let mut s = MethodStats {
            method: method.name().to_string(),
            seconds: Vec::new(),
            mean: None,
            median: None,
            verdicts: VerdictCounts::default(),
            saturated_runs: 0,
            acceptance_rates: vec![0.0; length],
            timed_out: false,
            errors: Vec::new(),
        };
        let mut per_log = Vec::with_capacity(logs.len());
        let mut spent = Duration::ZERO;
        for w in &logs {
            if plan.timeout.is_some_and(|t| spent >= t) {
                s.timed_out = true;
                per_log.push(None);
                continue;
            }
            let start = Instant::now();
            let result = method.verdicts(&model.monitored, w, cfg);
            let took = start.elapsed();
            spent += took;
            match result {
                Ok(v) => {
                    s.seconds.push(took.as_secs_f64());
                    for iv in &v.indices {
                        match iv.verdict {
                            Verdict::Accepted => {
                                s.verdicts.accepted += 1;
                                s.acceptance_rates[iv.index - 1] += 1.0;
                            }
                            Verdict::Rejected => s.verdicts.rejected += 1,
                            Verdict::Inconclusive => s.verdicts.inconclusive += 1,
                        }
                    }
                    if !v.saturated_intervals.is_empty() {
                        s.saturated_runs += 1;
                    }
                    per_log.push(Some(v));
                }
                Err(e) => {
                    s.errors.push(e.to_string());
                    per_log.push(None);
                }
            }
        }
        let completed = s.seconds.len();
        if completed > 0 {
            for r in &mut s.acceptance_rates {
                *r /= completed as f64;
            }
        }
        s.mean = mean(&s.seconds);
        s.median = median(&s.seconds);
        stats.push(s);
        verdicts.push(per_log);
    }

    let disagreements = (methods.len() > 1).then(|| {
        (0..logs.len())
            .map(|k| match (&verdicts[0][k], &verdicts[1][k]) {
                (Some(a), Some(b)) => conflicts(a, b),
                _ => 0,
            })
            .sum()
    });
    CellReport {
        model: model.label.clone(),
        dimension: model.dimension(),
        length,
        runs: logs.len(),
        generation_failures,
        methods: stats,
        disagreements,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    Length,
    Dimension,
}

impl std::fmt::Display for PlotAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PlotAxis::Length => "length",
            PlotAxis::Dimension => "dimension",
        })
    }
}

impl std::str::FromStr for PlotAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "length" => Ok(PlotAxis::Length),
            "dimension" => Ok(PlotAxis::Dimension),
            _ => Err(format!("unknown axis `{s}` (expected length or dimension)")),
        }
    }
}

/// x, mean seconds, timed out.
type PlotRow = (usize, Option<f64>, bool);

/// Whitespace-separated `x seconds` rows, one block per series, `#` comments.
/// Cells without any completed run appear as `x NaN` with a flag comment.
/// Returns the text and warnings about degenerate series.
pub fn emit_plot_data(report: &BenchReport, axis: PlotAxis) -> Result<(String, Vec<String>), BenchError> {
    let mut series: Vec<(String, Vec<PlotRow>)> = Vec::new();
    for cell in &report.cells {
        for m in &cell.methods {
            let (key, x) = match axis {
                PlotAxis::Length => (format!("{} {}", cell.model, m.method), cell.length),
                PlotAxis::Dimension => (format!("{} length={}", m.method, cell.length), cell.dimension),
            };
            let row = (x, m.mean, m.timed_out);
            match series.iter_mut().find(|(k, _)| *k == key) {
                Some((_, rows)) => rows.push(row),
                None => series.push((key, vec![row])),
            }
        }
    }
    if series.is_empty() {
        return Err(BenchError::EmptyAxis(axis));
    }
    let mut out = format!("# x = {axis}, y = mean monitoring time in seconds\n");
    let mut warnings = Vec::new();
    for (k, (key, rows)) in series.iter_mut().enumerate() {
        rows.sort_by_key(|r| r.0);
        if rows.len() == 1 {
            warnings.push(format!("series `{key}` has a single point"));
        }
        if k > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# series: {key}\n"));
        for (x, secs, timed_out) in rows.iter() {
            match (secs, timed_out) {
                (Some(s), false) => out.push_str(&format!("{x} {s:.6}\n")),
                (Some(s), true) => out.push_str(&format!("{x} {s:.6} # timeout, partial mean\n")),
                (None, true) => out.push_str(&format!("{x} NaN # timeout\n")),
                (None, false) => out.push_str(&format!("{x} NaN # no completed run\n")),
            }
        }
    }
    Ok((out, warnings))
}
