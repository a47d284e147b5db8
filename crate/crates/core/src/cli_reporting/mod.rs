//! Config-driven scenario runner. A [`ScenarioConfig`] names one task; the
//! runner validates every field up front, dispatches to the estimator or
//! classifier, and returns a [`ReportBundle`] that [`render_tables`] turns
//! into `report.json` plus one CSV per curve.

mod tables;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distributions::{Family, IncrementModel};
use crate::error::{Error, Result};
use crate::estimators::lattice_oracle::MAX_LEVEL;
use crate::estimators::mc::{proportion_half_width, resolve_workers, DEFAULT_CAP};
use crate::estimators::tail_ratio::MIN_REPLICATIONS;
use crate::estimators::{
    estimate_downcrossings, estimate_ladder_decomposition, estimate_split_ratios, estimate_supremum_windows,
    estimate_tail_ratio, exact_lattice_oracle, positive_drift_ratio, subexp_two_sum_ratio, LadderConfig, LadderStats,
    LatticeOracleResult, McOptions, RatioCurve, Statistic,
};
use crate::tail_analysis::{classify_tail, trend_of, TailProperty, TailVerdict, Trend};
use crate::walk_engine::StoppingRule;

pub use tables::{format_number, render_tables, CSV_HEADER};

/// Process exit codes of the command-line tool.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const ESTIMATOR: i32 = 3;
    pub const VERDICT: i32 = 4;
    pub const IO: i32 = 5;
}

/// Maps an error to its exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ConfigInvalid(_) | Error::Json(_) => exit_code::CONFIG,
        Error::Io(_) => exit_code::IO,
        _ => exit_code::ESTIMATOR,
    }
}

/// Parses the short rule syntax `tau`, `fixed:<N>` or `min:<N>`
/// (the last meaning `min(τ, N)`).
pub fn parse_rule_arg(text: &str) -> Result<StoppingRule> {
    let bad = || Error::ConfigInvalid(vec![format!("rule: expected tau, fixed:<N> or min:<N>, got {text:?}")]);
    let text = text.trim();
    if text == "tau" {
        return Ok(StoppingRule::Tau);
    }
    let (kind, n) = text.split_once(':').ok_or_else(bad)?;
    let n: u64 = n.trim().parse().map_err(|_| bad())?;
    match kind.trim() {
        "fixed" => Ok(StoppingRule::FixedN { n }),
        "min" => Ok(StoppingRule::min_of(StoppingRule::Tau, StoppingRule::FixedN { n })),
        _ => Err(bad()),
    }
}

/// Parses a comma-separated list of grid points.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::ConfigInvalid(vec![format!("grid: cannot parse {v:?}")])))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classify,
    TailRatio,
    Split,
    Downcross,
    Windows,
    Ladder,
    TwoSum,
    PositiveDrift,
    OracleCompare,
}

/// Pass/fail thresholds applied to the results.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// Allowed distance from the target in combined CI half-widths.
    #[serde(default = "default_ci_multiple")]
    pub ci_multiple: f64,
    /// Endpoint tolerance for trend verdicts.
    #[serde(default = "default_trend_tol")]
    pub trend_tol: f64,
}

fn default_ci_multiple() -> f64 {
    3.0
}

fn default_trend_tol() -> f64 {
    0.15
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { ci_multiple: default_ci_multiple(), trend_tol: default_trend_tol() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub task: Task,
    pub model: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<StoppingRule>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_grid: Vec<f64>,
    /// Replications (cycles for `ladder`).
    #[serde(default)]
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, rename = "floor_L", alias = "floor", skip_serializing_if = "Option::is_none")]
    pub floor_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u64>,
    pub seed: u64,
    /// Downcrossing barrier depth below `−t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<f64>,
    /// Per-sample size of the ladder KS comparison; defaults to `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<TailProperty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<Statistic>,
    /// Expected trend of the main curve, checked instead of CI agreement
    /// when set to anything other than `converging_to_target`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Trend>,
    #[serde(default)]
    pub thresholds: Thresholds,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(vec![e.to_string()]))
    }

    fn cap(&self) -> u64 {
        self.cap.unwrap_or(DEFAULT_CAP)
    }

    fn model(&self) -> Result<IncrementModel> {
        match self.task {
            Task::Classify | Task::TwoSum | Task::PositiveDrift => IncrementModel::unchecked(self.model),
            _ => IncrementModel::new(self.model),
        }
    }

    fn rule(&self) -> &StoppingRule {
        self.rule.as_ref().expect("validated")
    }

    /// Checks every field the task uses; collects all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let model = match self.model() {
            Ok(m) => Some(m),
            Err(e) => {
                errs.push(format!("model: {e}"));
                None
            }
        };
        let t = &self.thresholds;
        if !(t.ci_multiple > 0.0 && t.ci_multiple.is_finite()) {
            errs.push(format!("thresholds.ci_multiple: must be positive, got {}", t.ci_multiple));
        }
        if !(t.trend_tol > 0.0 && t.trend_tol.is_finite()) {
            errs.push(format!("thresholds.trend_tol: must be positive, got {}", t.trend_tol));
        }
        if self.cap == Some(0) {
            errs.push("cap: must be at least 1".into());
        }

        let needs_rule = matches!(self.task, Task::TailRatio | Task::Split | Task::PositiveDrift | Task::OracleCompare);
        match (&self.rule, needs_rule) {
            (None, true) => errs.push("rule: required for this task".into()),
            (Some(r), true) => {
                if let Err(e) = r.validate() {
                    errs.push(format!("rule: {e}"));
                }
            }
            _ => {}
        }

        let min_grid = if self.task == Task::Classify { 4 } else { 1 };
        if self.task == Task::Downcross {
            check_grid("t_grid", &self.t_grid, 1, &mut errs);
            match self.barrier {
                Some(b) if b > 0.0 && b.is_finite() => {}
                other => errs.push(format!("barrier: must be positive, got {other:?}")),
            }
        } else {
            check_grid("x_grid", &self.x_grid, min_grid, &mut errs);
        }

        let min_n = match self.task {
            Task::Classify => 0,
            Task::TailRatio | Task::Split | Task::OracleCompare => MIN_REPLICATIONS,
            _ => 1,
        };
        if self.n < min_n {
            errs.push(format!("n: must be at least {min_n}, got {}", self.n));
        }

        if matches!(self.task, Task::Windows | Task::Ladder) {
            for (name, v) in [("c", self.c), ("floor_L", self.floor_l)] {
                match v {
                    Some(v) if v > 0.0 && v.is_finite() => {}
                    other => errs.push(format!("{name}: must be positive, got {other:?}")),
                }
            }
        }
        if self.ks_samples == Some(0) {
            errs.push("ks_samples: must be at least 1".into());
        }

        match self.task {
            Task::Classify if self.property.is_none() => errs.push("property: required for classify".into()),
            Task::TailRatio if self.statistic == Some(Statistic::ValueAtSigma) => {
                if let Some(r) = &self.rule {
                    if !r.is_independent() {
                        errs.push(format!("statistic: value_at_sigma needs a walk-independent rule, got {}", r.label()));
                    }
                }
            }
            Task::PositiveDrift => {
                if let Some(r) = &self.rule {
                    if !r.is_independent() {
                        errs.push(format!("rule: positive drift needs a walk-independent rule, got {}", r.label()));
                    }
                }
            }
            Task::OracleCompare => {
                if !matches!(self.model, Family::LatticePolyTail { .. }) {
                    errs.push("model: oracle_compare needs a lattice_poly_tail model".into());
                }
                for &x in &self.x_grid {
                    if x.fract() != 0.0 || x > MAX_LEVEL as f64 {
                        errs.push(format!("x_grid: oracle levels must be integers up to {MAX_LEVEL}, got {x}"));
                    }
                }
                if let Some(r) = &self.rule {
                    if !oracle_supports(r) {
                        errs.push(format!("rule: the exact oracle handles tau, fixed_n and min_of(tau, fixed_n), got {}", r.label()));
                    }
                }
            }
            _ => {}
        }
        if let (Some(m), Task::Split) = (&model, self.task) {
            for &x in &self.x_grid {
                if let Err(e) = m.insensitivity_h(x) {
                    errs.push(format!("x_grid: {e}"));
                    break;
                }
            }
        }

        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(errs))
        }
    }
}

fn check_grid(name: &str, grid: &[f64], min_len: usize, errs: &mut Vec<String>) {
    if grid.len() < min_len {
        errs.push(format!("{name}: needs at least {min_len} points, got {}", grid.len()));
        return;
    }
    if grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        errs.push(format!("{name}: values must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        errs.push(format!("{name}: values must be strictly increasing"));
    }
}

fn oracle_supports(rule: &StoppingRule) -> bool {
    match rule {
        StoppingRule::Tau | StoppingRule::FixedN { .. } => true,
        StoppingRule::MinOf { a, b } => matches!(
            (a.as_ref(), b.as_ref()),
            (StoppingRule::Tau, StoppingRule::FixedN { .. }) | (StoppingRule::FixedN { .. }, StoppingRule::Tau)
        ),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub wall_clock_seconds: f64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub seed: u64,
    pub config: ScenarioConfig,
    pub version: String,
    /// Left out of [`ReportBundle::reproducible_json`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Runtime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveItem {
    Ratio(RatioCurve),
    TailVerdict(TailVerdict),
    Ladder(LadderStats),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub meta: Meta,
    pub curves: Vec<CurveItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<LatticeOracleResult>>,
    pub verdicts: Vec<Verdict>,
    /// Task-specific scalars and vectors that are not curves.
    #[serde(default)]
    pub extras: BTreeMap<String, Value>,
}

impl ReportBundle {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// Pretty JSON of the whole bundle.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON without the runtime block; identical for identical config and seed.
    pub fn reproducible_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.meta.runtime = None;
        copy.to_json()
    }

    /// Every [`RatioCurve`] in the bundle, including those inside ladder stats.
    pub fn ratio_curves(&self) -> Vec<&RatioCurve> {
        let mut out = Vec::new();
        for item in &self.curves {
            match item {
                CurveItem::Ratio(c) => out.push(c),
                CurveItem::Ladder(l) => {
                    out.push(&l.window_ratio);
                    out.push(&l.t2_window_ratio);
                }
                CurveItem::TailVerdict(_) => {}
            }
        }
        out
    }
}

/// Runs with the worker count from `HEAVYTAIL_WORKERS` or the CPU count.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ReportBundle> {
    run_scenario_with(config, None)
}

pub fn run_scenario_with(config: &ScenarioConfig, workers: Option<usize>) -> Result<ReportBundle> {
    config.validate()?;
    let workers = resolve_workers(workers);
    let start = Instant::now();
    let model = config.model()?;
    let opts = McOptions::new(config.n, config.seed).with_workers(workers).with_cap(config.cap());
    let mut out = Outcome::new(config.thresholds);
    match config.task {
        Task::Classify => run_classify(config, &model, &mut out)?,
        Task::TailRatio => run_tail_ratio(config, &model, &opts, &mut out)?,
        Task::Split => run_split(config, &model, &opts, &mut out)?,
        Task::Downcross => run_downcross(config, &model, &opts, &mut out)?,
        Task::Windows => run_windows(config, &model, &opts, &mut out)?,
        Task::Ladder => run_ladder(config, &model, workers, &mut out)?,
        Task::TwoSum => run_two_sum(config, &model, &opts, &mut out)?,
        Task::PositiveDrift => run_positive_drift(config, &model, &opts, &mut out)?,
        Task::OracleCompare => run_oracle_compare(config, &model, &opts, &mut out)?,
    }
    Ok(ReportBundle {
        meta: Meta {
            seed: config.seed,
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            runtime: Some(Runtime { wall_clock_seconds: start.elapsed().as_secs_f64(), workers }),
        },
        curves: out.curves,
        oracle: out.oracle,
        verdicts: out.verdicts,
        extras: out.extras,
    })
}

struct Outcome {
    th: Thresholds,
    curves: Vec<CurveItem>,
    oracle: Option<Vec<LatticeOracleResult>>,
    verdicts: Vec<Verdict>,
    extras: BTreeMap<String, Value>,
}

impl Outcome {
    fn new(th: Thresholds) -> Self {
        Self { th, curves: Vec::new(), oracle: None, verdicts: Vec::new(), extras: BTreeMap::new() }
    }

    fn verdict(&mut self, check: impl Into<String>, pass: bool, detail: String) {
        self.verdicts.push(Verdict { check: check.into(), pass, detail });
    }

    fn extra(&mut self, key: &str, v: impl Serialize) -> Result<()> {
        self.extras.insert(key.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    /// CI agreement with the curve target at the largest grid point.
    fn within_at_end(&mut self, curve: &RatioCurve) {
        let i = curve.len() - 1;
        let k = self.th.ci_multiple;
        let pass = curve.within(i, k);
        let detail = format!(
            "x = {}: point {} vs target {} (allowed {})",
            curve.x_grid[i],
            curve.point[i],
            curve.target,
            k * curve.combined_half_width(i)
        );
        self.verdict(format!("{}_within_ci_at_largest_x", curve.name), pass, detail);
    }

    fn within_everywhere(&mut self, curve: &RatioCurve) {
        let k = self.th.ci_multiple;
        for i in 0..curve.len() {
            let detail = format!("point {} vs target {} (allowed {})", curve.point[i], curve.target, k * curve.combined_half_width(i));
            self.verdict(format!("{}_within_ci_at_x={}", curve.name, curve.x_grid[i]), curve.within(i, k), detail);
        }
    }

    /// Trend check when `expect` asks for one, CI agreement otherwise.
    fn expectation(&mut self, curve: &RatioCurve, expect: Option<Trend>) -> Result<()> {
        let trend = trend_of(&curve.point, curve.target, self.th.trend_tol);
        self.extra(&format!("{}_trend", curve.name), trend)?;
        match expect {
            Some(want) if want != Trend::ConvergingToTarget => {
                self.verdict(format!("{}_trend", curve.name), trend == want, format!("trend {trend:?}, expected {want:?}"));
            }
            _ if curve.target.is_finite() => self.within_at_end(curve),
            _ => {}
        }
        Ok(())
    }
}

fn run_classify(config: &ScenarioConfig, model: &IncrementModel, out: &mut Outcome) -> Result<()> {
    let property = config.property.expect("validated");
    let verdict = classify_tail(model, property, &config.x_grid, out.th.trend_tol)?;
    if let Some(want) = config.expect {
        let detail = format!("trend {:?}, expected {want:?}", verdict.trend);
        out.verdict("classification_trend", verdict.trend == want, detail);
    }
    out.curves.push(CurveItem::TailVerdict(verdict));
    Ok(())
}

fn run_tail_ratio(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let statistic = config.statistic.unwrap_or(Statistic::MaxOverSigma);
    let r = estimate_tail_ratio(model, config.rule(), &config.x_grid, opts, statistic)?;
    out.expectation(&r.curve, config.expect)?;
    out.extra("sigma_mean", r.sigma_mean)?;
    out.extra("sigma_half_width", r.sigma_half_width)?;
    out.extra("n_capped", r.n_capped)?;
    out.curves.push(CurveItem::Ratio(r.curve));
    out.curves.push(CurveItem::Ratio(r.second_tail_curve));
    Ok(())
}

fn run_split(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let r = estimate_split_ratios(model, config.rule(), &config.x_grid, opts)?;
    out.within_at_end(&r.a1);
    out.extra("delta_proxy", r.delta_proxy)?;
    out.extra("n_capped", r.n_capped)?;
    for c in [r.total, r.a1, r.a2] {
        out.curves.push(CurveItem::Ratio(c));
    }
    Ok(())
}

fn run_downcross(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let r = estimate_downcrossings(model, &config.t_grid, config.barrier.expect("validated"), opts)?;
    out.within_everywhere(&r.curve);
    if let Some(exact) = &r.exact {
        let k = out.th.ci_multiple;
        for (i, e) in exact.iter().enumerate() {
            let diff = (r.curve.point[i] - e).abs();
            let allowed = k * r.curve.half_width[i];
            out.verdict(format!("exact_within_ci_at_t={}", r.curve.x_grid[i]), diff <= allowed, format!("|MC - exact| = {diff} (allowed {allowed})"));
        }
    }
    out.extra("k_hat", r.k_hat)?;
    out.extra("exact", &r.exact)?;
    out.extra("n_capped", r.n_capped)?;
    out.curves.push(CurveItem::Ratio(r.curve));
    Ok(())
}

fn run_windows(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let r = estimate_supremum_windows(model, &config.x_grid, config.c.expect("validated"), config.floor_l.expect("validated"), opts)?;
    out.within_at_end(&r.window);
    out.extra("bias_bound", r.bias_bound)?;
    out.extra("n_capped", r.n_capped)?;
    out.curves.push(CurveItem::Ratio(r.window));
    out.curves.push(CurveItem::Ratio(r.global_tail));
    Ok(())
}

fn run_ladder(config: &ScenarioConfig, model: &IncrementModel, workers: usize, out: &mut Outcome) -> Result<()> {
    let cfg = LadderConfig {
        n_cycles: config.n,
        ks_samples: config.ks_samples.unwrap_or(config.n),
        floor: config.floor_l.expect("validated"),
        c: config.c.expect("validated"),
        x_grid: config.x_grid.clone(),
        seed: config.seed,
        workers: Some(workers),
        cap: config.cap(),
    };
    let r = estimate_ladder_decomposition(model, &cfg)?;
    out.verdict("ks_below_critical", r.ks_distance <= r.ks_critical, format!("D = {} vs {}", r.ks_distance, r.ks_critical));
    out.within_at_end(&r.window_ratio);
    out.curves.push(CurveItem::Ladder(r));
    Ok(())
}

fn run_two_sum(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let r = subexp_two_sum_ratio(model, &config.x_grid, opts)?;
    let k = out.th.ci_multiple;
    for (i, q) in r.quadrature.iter().enumerate() {
        let diff = (r.curve.point[i] - q).abs();
        let allowed = k * r.curve.half_width[i];
        out.verdict(format!("quadrature_within_ci_at_x={}", r.curve.x_grid[i]), diff <= allowed, format!("|MC - quadrature| = {diff} (allowed {allowed})"));
    }
    out.verdict("inclusion_exclusion_counts", r.inclusion_holds, String::new());
    out.extra("quadrature", &r.quadrature)?;
    out.curves.push(CurveItem::Ratio(r.curve));
    Ok(())
}

fn run_positive_drift(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let r = positive_drift_ratio(model, config.rule(), &config.x_grid, opts)?;
    out.within_at_end(&r.curve);
    out.extra("pcond", &r.pcond)?;
    out.extra("n_capped", r.n_capped)?;
    out.curves.push(CurveItem::Ratio(r.curve));
    Ok(())
}

fn run_oracle_compare(config: &ScenarioConfig, model: &IncrementModel, opts: &McOptions, out: &mut Outcome) -> Result<()> {
    let rule = config.rule();
    let oracle = config
        .x_grid
        .iter()
        .map(|&x| exact_lattice_oracle(model, rule, x as u64))
        .collect::<Result<Vec<_>>>()?;
    let r = estimate_tail_ratio(model, rule, &config.x_grid, opts, Statistic::MaxOverSigma)?;
    let k = out.th.ci_multiple;
    let n = r.curve.n_effective[0];
    for (i, o) in oracle.iter().enumerate() {
        let hits = r.curve.hits[i];
        let p = hits as f64 / n as f64;
        let allowed = k * proportion_half_width(hits, n);
        let diff = (p - o.probability).abs();
        out.verdict(format!("mc_matches_exact_at_x={}", o.x), diff <= allowed, format!("MC {p} vs exact {} (allowed {allowed})", o.probability));
    }
    out.extra("sigma_mean", r.sigma_mean)?;
    out.curves.push(CurveItem::Ratio(r.curve));
    out.oracle = Some(oracle);
    Ok(())
}
