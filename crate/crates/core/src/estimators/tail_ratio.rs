//! `P(M_σ > x) / F̄(x)` and its split by the pre-passage position.

use serde::{Deserialize, Serialize};

use super::curve::RatioCurve;
use super::mc::{mean_half_width, run_replications, McOptions, Merge};
use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::walk_engine::{validate_levels, walk_stopped, ModelSource, StoppingRule};

const STREAM: u64 = 0x5707;

/// Minimum replication count accepted by the tail-ratio estimators.
pub const MIN_REPLICATIONS: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Event `{M_σ > x}`.
    MaxOverSigma,
    /// Event `{S_σ > x}`; only meaningful for σ independent of the walk.
    ValueAtSigma,
}

/// Per-level counts from one pass over the replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoppedCounts {
    pub n: u64,
    pub capped: u64,
    pub sigma_sum: u128,
    pub sigma_sq_sum: u128,
    pub max_hits: Vec<u64>,
    pub value_hits: Vec<u64>,
    pub a1_hits: Vec<u64>,
    pub a2_hits: Vec<u64>,
    #[serde(skip)]
    scratch: Vec<f64>,
}

impl StoppedCounts {
    fn new(levels: usize) -> Self {
        Self {
            n: 0,
            capped: 0,
            sigma_sum: 0,
            sigma_sq_sum: 0,
            max_hits: vec![0; levels],
            value_hits: vec![0; levels],
            a1_hits: vec![0; levels],
            a2_hits: vec![0; levels],
            scratch: Vec::with_capacity(levels),
        }
    }

    pub fn n_effective(&self) -> u64 {
        self.n - self.capped
    }

    /// `(Ê σ, 95% half-width)` over uncapped replications.
    pub fn sigma_mean(&self) -> (f64, f64) {
        let n = self.n_effective();
        let s = self.sigma_sum as f64;
        (s / n.max(1) as f64, mean_half_width(s, self.sigma_sq_sum as f64, n))
    }
}

impl Merge for StoppedCounts {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.capped += o.capped;
        self.sigma_sum += o.sigma_sum;
        self.sigma_sq_sum += o.sigma_sq_sum;
        for (dst, src) in [
            (&mut self.max_hits, &o.max_hits),
            (&mut self.value_hits, &o.value_hits),
            (&mut self.a1_hits, &o.a1_hits),
            (&mut self.a2_hits, &o.a2_hits),
        ] {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

/// Simulates `n` stopped walks and tallies, per level, the events
/// `M_σ > x`, `S_σ > x`, and the A1/A2 split at `h(x)`. Capped replications
/// are excluded from every count except `capped`.
pub fn stopped_counts(model: &IncrementModel, rule: &StoppingRule, x_grid: &[f64], opts: &McOptions) -> Result<StoppedCounts> {
    rule.validate()?;
    validate_levels(x_grid)?;
    let h: Vec<f64> = x_grid.iter().map(|&x| model.insensitivity_h(x)).collect::<Result<_>>()?;
    let cap = opts.cap;
    Ok(run_replications(opts.n, opts.seed, STREAM, opts.workers, || StoppedCounts::new(x_grid.len()), |acc, rng| {
        let plan = rule.draw_plan(rng);
        acc.scratch.clear();
        let scratch = &mut acc.scratch;
        let out = walk_stopped(&mut ModelSource::new(model, rng), plan, cap, x_grid, |_, _, pre, _| scratch.push(pre));
        acc.n += 1;
        if out.capped {
            acc.capped += 1;
            return;
        }
        acc.sigma_sum += out.steps as u128;
        acc.sigma_sq_sum += (out.steps as u128) * (out.steps as u128);
        for (i, &pre) in acc.scratch.iter().enumerate() {
            acc.max_hits[i] += 1;
            if pre <= h[i] {
                acc.a1_hits[i] += 1;
            } else {
                acc.a2_hits[i] += 1;
            }
        }
        for (i, &x) in x_grid.iter().enumerate() {
            if out.last > x {
                acc.value_hits[i] += 1;
            } else {
                break;
            }
        }
    }))
}

/// `E σ` target: exact for walk-independent rules, otherwise the Monte-Carlo
/// mean of σ from the same replications.
fn sigma_target(rule: &StoppingRule, counts: &StoppedCounts) -> (f64, f64, String) {
    match rule.exact_mean() {
        Some(v) if v.is_infinite() => (v, 0.0, format!("E sigma = infinity for {}", rule.label())),
        Some(v) => (v, 0.0, format!("exact E sigma for {}", rule.label())),
        None => {
            let (m, hw) = counts.sigma_mean();
            (m, hw, format!("Monte-Carlo E sigma = {m:.6} +/- {hw:.2e} for {}", rule.label()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRatioReport {
    pub statistic: Statistic,
    /// Hits divided by `F̄(x)`; target `E σ`.
    pub curve: RatioCurve,
    /// Same hits divided by `F̄ˢ(x)`; target 0 when `E σ < ∞`.
    pub second_tail_curve: RatioCurve,
    pub sigma_mean: f64,
    pub sigma_half_width: f64,
    pub n_capped: u64,
}

/// Estimates `P(M_σ > x)/F̄(x)` (or `P(S_σ > x)/F̄(x)`) along `x_grid`.
pub fn estimate_tail_ratio(
    model: &IncrementModel,
    rule: &StoppingRule,
    x_grid: &[f64],
    opts: &McOptions,
    statistic: Statistic,
) -> Result<TailRatioReport> {
    opts.check(MIN_REPLICATIONS)?;
    if statistic == Statistic::ValueAtSigma && !rule.is_independent() {
        return Err(Error::RuleNotIndependent(rule.label()));
    }
    let counts = stopped_counts(model, rule, x_grid, opts)?;
    Ok(tail_ratio_from_counts(model, rule, x_grid, &counts, statistic))
}

pub(crate) fn tail_ratio_from_counts(
    model: &IncrementModel,
    rule: &StoppingRule,
    x_grid: &[f64],
    counts: &StoppedCounts,
    statistic: Statistic,
) -> TailRatioReport {
    let hits = match statistic {
        Statistic::MaxOverSigma => &counts.max_hits,
        Statistic::ValueAtSigma => &counts.value_hits,
    };
    let n_eff = vec![counts.n_effective(); x_grid.len()];
    let tails: Vec<f64> = x_grid.iter().map(|&x| model.tail(x)).collect();
    let second: Vec<f64> = x_grid.iter().map(|&x| model.second_tail(x)).collect();
    let (target, target_hw, target_ref) = sigma_target(rule, counts);
    let name = match statistic {
        Statistic::MaxOverSigma => "max_over_sigma_ratio",
        Statistic::ValueAtSigma => "value_at_sigma_ratio",
    };
    let curve = RatioCurve::from_hits(name, x_grid, hits, &n_eff, &tails).with_target(target, target_hw, target_ref);
    let second_target = if target.is_finite() { 0.0 } else { f64::NAN };
    let second_tail_curve = RatioCurve::from_hits(&format!("{name}_over_second_tail"), x_grid, hits, &n_eff, &second)
        .with_target(second_target, 0.0, "o(second tail) when E sigma is finite; trend only otherwise");
    let (sigma_mean, sigma_half_width) = counts.sigma_mean();
    TailRatioReport { statistic, curve, second_tail_curve, sigma_mean, sigma_half_width, n_capped: counts.capped }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    /// `P(M_σ > x)/F̄(x)` from the same replications.
    pub total: RatioCurve,
    /// `P(A1)/F̄(x)`, target `E σ`.
    pub a1: RatioCurve,
    /// `P(A2)/F̄(x)`, target 0.
    pub a2: RatioCurve,
    /// Largest `a2` point on the grid, standing in for `sup_{y ≥ x}`.
    pub delta_proxy: f64,
    pub n_capped: u64,
}

/// Splits `{M_σ > x}` into the single-big-jump part A1 (pre-passage position
/// `≤ h(x)`) and the remainder A2.
pub fn estimate_split_ratios(model: &IncrementModel, rule: &StoppingRule, x_grid: &[f64], opts: &McOptions) -> Result<SplitReport> {
    opts.check(MIN_REPLICATIONS)?;
    if rule.exact_mean().is_some_and(f64::is_infinite) {
        return Err(Error::UnsupportedRule(format!("{} has infinite mean", rule.label())));
    }
    let counts = stopped_counts(model, rule, x_grid, opts)?;
    let n_eff = vec![counts.n_effective(); x_grid.len()];
    let tails: Vec<f64> = x_grid.iter().map(|&x| model.tail(x)).collect();
    let (target, target_hw, target_ref) = sigma_target(rule, &counts);
    let total = RatioCurve::from_hits("max_over_sigma_ratio", x_grid, &counts.max_hits, &n_eff, &tails)
        .with_target(target, target_hw, target_ref.clone());
    let a1 = RatioCurve::from_hits("a1_ratio", x_grid, &counts.a1_hits, &n_eff, &tails).with_target(target, target_hw, target_ref);
    let a2 = RatioCurve::from_hits("a2_ratio", x_grid, &counts.a2_hits, &n_eff, &tails)
        .with_target(0.0, 0.0, "A2 is negligible against the tail");
    let delta_proxy = a2.point.iter().copied().fold(0.0, f64::max);
    Ok(SplitReport { total, a1, a2, delta_proxy, n_capped: counts.capped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    fn pareto() -> IncrementModel {
        IncrementModel::new(Family::pareto(2.5, 1.0, 3.0)).unwrap()
    }

    #[test]
    fn fixed_zero_gives_zero_curve() {
        let r = estimate_tail_ratio(&pareto(), &StoppingRule::FixedN { n: 0 }, &[1.0, 5.0], &McOptions::new(10_000, 1), Statistic::MaxOverSigma)
            .unwrap();
        assert!(r.curve.point.iter().all(|&p| p == 0.0));
        assert_eq!(r.curve.target, 0.0);
        assert!(r.curve.within(0, 3.0));
    }

    #[test]
    fn value_at_sigma_needs_independent_rule() {
        let e = estimate_tail_ratio(&pareto(), &StoppingRule::Tau, &[1.0], &McOptions::new(10_000, 1), Statistic::ValueAtSigma);
        assert!(matches!(e, Err(Error::RuleNotIndependent(_))));
    }

    #[test]
    fn split_partitions_the_total_exactly() {
        let opts = McOptions::new(200_000, 3);
        let split = estimate_split_ratios(&pareto(), &StoppingRule::Tau, &[2.0, 8.0, 20.0], &opts).unwrap();
        let tr = estimate_tail_ratio(&pareto(), &StoppingRule::Tau, &[2.0, 8.0, 20.0], &opts, Statistic::MaxOverSigma).unwrap();
        for i in 0..3 {
            assert_eq!(split.a1.hits[i] + split.a2.hits[i], split.total.hits[i]);
            assert_eq!(split.total.hits[i], tr.curve.hits[i]);
            assert_eq!(split.a1.point[i] + split.a2.point[i], tr.curve.point[i]);
        }
    }

    #[test]
    fn wald_identity_for_tau() {
        // E S_τ = −m E τ, checked through the sample mean of σ and of S_σ.
        let m = pareto();
        let mut rng = crate::rng::RngState::from_seed(11);
        let n = 1_000_000;
        let (mut st, mut st2, mut s, mut s2, mut cross) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let r = crate::walk_engine::simulate_stopped(&m, &StoppingRule::Tau, None, 1 << 40, &mut rng);
            let t = r.sigma as f64;
            let v = r.s_sigma.unwrap();
            st += t;
            st2 += t * t;
            s += v;
            s2 += v * v;
            cross += t * v;
        }
        let nf = n as f64;
        let mt = st / nf;
        let ms = s / nf;
        // variance of S_τ + m τ per replication
        let var = (s2 / nf - ms * ms) + (4.0 / 3.0f64).powi(2) * (st2 / nf - mt * mt) + 2.0 * (4.0 / 3.0) * (cross / nf - ms * mt);
        let se = (var / nf).sqrt();
        assert!((ms + 4.0 / 3.0 * mt).abs() < 4.0 * se, "{ms} {mt} {se}");
    }
}
