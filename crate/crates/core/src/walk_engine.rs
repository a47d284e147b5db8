//! Path simulation: stopped walks, first-passage bookkeeping, busy cycles,
//! the Lindley workload recursion, and the floor-stopped walks used to
//! approximate the all-time supremum.
//!
//! Every simulator pulls increments one at a time from an
//! [`IncrementSource`] and decides whether to stop at step `n` using only
//! `S_0, …, S_n` and randomness drawn before the walk starts, so every rule
//! is a stopping time by construction.

use serde::{Deserialize, Serialize};

use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::rng::RngState;
use crate::special::zeta;

/// Supplier of i.i.d. increments.
pub trait IncrementSource {
    fn next_increment(&mut self) -> f64;
}

/// Draws increments from a model using the walk stream of an [`RngState`].
pub struct ModelSource<'a> {
    model: &'a IncrementModel,
    rng: &'a mut RngState,
}

impl<'a> ModelSource<'a> {
    pub fn new(model: &'a IncrementModel, rng: &'a mut RngState) -> Self {
        Self { model, rng }
    }
}

impl IncrementSource for ModelSource<'_> {
    #[inline]
    fn next_increment(&mut self) -> f64 {
        self.model.sample(self.rng)
    }
}

/// Replays a fixed list of increments and counts how many were consumed.
/// Past the end it yields NaN, so any read beyond the script is visible.
#[derive(Debug, Clone)]
pub struct ScriptedSource {
    steps: Vec<f64>,
    pub reads: usize,
}

impl ScriptedSource {
    pub fn new(steps: Vec<f64>) -> Self {
        Self { steps, reads: 0 }
    }
}

impl IncrementSource for ScriptedSource {
    fn next_increment(&mut self) -> f64 {
        let v = self.steps.get(self.reads).copied().unwrap_or(f64::NAN);
        self.reads += 1;
        v
    }
}

/// Stopping rules. JSON form: `{"kind": "tau"}`, `{"kind": "fixed_n", "n": 3}`,
/// `{"kind": "min_of", "a": {...}, "b": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StoppingRule {
    FixedN { n: u64 },
    /// First `n ≥ 1` with `S_n ≤ 0`.
    Tau,
    /// The `k`-th weak descending ladder epoch; `LadderK { k: 1 }` is `Tau`.
    LadderK { k: u64 },
    /// First `n` with `S_n > x`.
    MuX { x: f64 },
    /// `P(σ = j) = q (1 − q)^j` on `{0, 1, …}`, independent of the walk.
    IndependentGeometric { q: f64 },
    /// `P(σ > j) = (j + 1)^(−a)` on `{1, 2, …}`, independent of the walk.
    IndependentPareto { a: f64 },
    MinOf { a: Box<StoppingRule>, b: Box<StoppingRule> },
}

/// Stop conditions for one replication after independent times are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopPlan {
    /// Stop once `n` reaches this value (`u64::MAX` for none).
    pub deadline: u64,
    /// Stop at this ladder epoch (`0` for none).
    pub ladder_k: u64,
    /// Stop once `S_n` exceeds this level.
    pub mu_level: f64,
}

impl StopPlan {
    pub const NEVER: StopPlan = StopPlan { deadline: u64::MAX, ladder_k: 0, mu_level: f64::INFINITY };

    fn merge(self, other: StopPlan) -> StopPlan {
        let ladder_k = match (self.ladder_k, other.ladder_k) {
            (0, k) | (k, 0) => k,
            (a, b) => a.min(b),
        };
        StopPlan {
            deadline: self.deadline.min(other.deadline),
            ladder_k,
            mu_level: self.mu_level.min(other.mu_level),
        }
    }
}

impl StoppingRule {
    pub fn min_of(a: StoppingRule, b: StoppingRule) -> Self {
        StoppingRule::MinOf { a: Box::new(a), b: Box::new(b) }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            StoppingRule::LadderK { k } if *k == 0 => bad("ladder_k needs k >= 1".into()),
            StoppingRule::MuX { x } if !x.is_finite() => bad(format!("mu_x level must be finite, got {x}")),
            StoppingRule::IndependentGeometric { q } if !(*q > 0.0 && *q <= 1.0) => {
                bad(format!("independent_geometric needs q in (0, 1], got {q}"))
            }
            StoppingRule::IndependentPareto { a } if !(*a > 0.0 && a.is_finite()) => {
                bad(format!("independent_pareto needs a > 0, got {a}"))
            }
            StoppingRule::MinOf { a, b } => {
                a.validate()?;
                b.validate()
            }
            _ => Ok(()),
        }
    }

    /// True when σ never looks at the walk (fixed or drawn from the auxiliary stream).
    pub fn is_independent(&self) -> bool {
        match self {
            StoppingRule::FixedN { .. }
            | StoppingRule::IndependentGeometric { .. }
            | StoppingRule::IndependentPareto { .. } => true,
            StoppingRule::MinOf { a, b } => a.is_independent() && b.is_independent(),
            _ => false,
        }
    }

    /// `P(σ > n)` for walk-independent rules.
    pub fn tail_prob(&self, n: u64) -> Option<f64> {
        match self {
            StoppingRule::FixedN { n: big } => Some(if n < *big { 1.0 } else { 0.0 }),
            StoppingRule::IndependentGeometric { q } => Some((1.0 - q).powf(n as f64 + 1.0)),
            StoppingRule::IndependentPareto { a } => Some((n as f64 + 1.0).powf(-a)),
            StoppingRule::MinOf { a, b } => Some(a.tail_prob(n)? * b.tail_prob(n)?),
            _ => None,
        }
    }

    /// `E σ` when known in closed form (walk-independent rules only).
    pub fn exact_mean(&self) -> Option<f64> {
        match self {
            StoppingRule::FixedN { n } => Some(*n as f64),
            StoppingRule::IndependentGeometric { q } => Some((1.0 - q) / q),
            StoppingRule::IndependentPareto { a } => Some(if *a > 1.0 { zeta(*a) } else { f64::INFINITY }),
            StoppingRule::MinOf { .. } if self.is_independent() => {
                if let Some(big) = self.fixed_bound() {
                    Some((0..big).map(|n| self.tail_prob(n).unwrap()).sum())
                } else {
                    // product of geometric/polynomial tails: sum until negligible
                    let mut total = 0.0;
                    let mut n = 0u64;
                    loop {
                        let p = self.tail_prob(n).unwrap();
                        total += p;
                        n += 1;
                        if p < 1e-17 * total || n > 50_000_000 {
                            return Some(total);
                        }
                    }
                }
            }
            _ => None,
        }
    }

    fn fixed_bound(&self) -> Option<u64> {
        match self {
            StoppingRule::FixedN { n } => Some(*n),
            StoppingRule::MinOf { a, b } => match (a.fixed_bound(), b.fixed_bound()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            },
            _ => None,
        }
    }

    /// Draws the independent parts of the rule from the auxiliary stream.
    pub fn draw_plan(&self, rng: &mut RngState) -> StopPlan {
        match self {
            StoppingRule::FixedN { n } => StopPlan { deadline: *n, ..StopPlan::NEVER },
            StoppingRule::Tau => StopPlan { ladder_k: 1, ..StopPlan::NEVER },
            StoppingRule::LadderK { k } => StopPlan { ladder_k: *k, ..StopPlan::NEVER },
            StoppingRule::MuX { x } => StopPlan { mu_level: *x, ..StopPlan::NEVER },
            StoppingRule::IndependentGeometric { q } => {
                let deadline = if *q >= 1.0 {
                    0
                } else {
                    let v = 1.0 - rng.aux_uniform(); // (0, 1]
                    float_to_steps((v.ln() / (1.0 - q).ln()).floor())
                };
                StopPlan { deadline, ..StopPlan::NEVER }
            }
            StoppingRule::IndependentPareto { a } => {
                let v = 1.0 - rng.aux_uniform();
                StopPlan { deadline: float_to_steps(v.powf(-1.0 / a).floor()), ..StopPlan::NEVER }
            }
            StoppingRule::MinOf { a, b } => a.draw_plan(rng).merge(b.draw_plan(rng)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            StoppingRule::FixedN { n } => format!("fixed_n({n})"),
            StoppingRule::Tau => "tau".into(),
            StoppingRule::LadderK { k } => format!("ladder_k({k})"),
            StoppingRule::MuX { x } => format!("mu_x({x})"),
            StoppingRule::IndependentGeometric { q } => format!("independent_geometric({q})"),
            StoppingRule::IndependentPareto { a } => format!("independent_pareto({a})"),
            StoppingRule::MinOf { a, b } => format!("min({}, {})", a.label(), b.label()),
        }
    }
}

fn float_to_steps(v: f64) -> u64 {
    if v >= u64::MAX as f64 {
        u64::MAX
    } else {
        v as u64
    }
}

/// Raw outcome of [`walk_stopped`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkOutcome {
    /// Number of increments consumed (`σ`, or `cap` when capped).
    pub steps: u64,
    pub capped: bool,
    /// `max_{0≤i≤steps} S_i`
    pub max: f64,
    /// `S_steps`
    pub last: f64,
}

/// Runs one stopped walk.
///
/// `levels` must be sorted ascending; negative levels are ignored. For each
/// level `x` first exceeded at step `n ≤ σ`, `on_pass(index, n, S_{n−1}, S_n)` is
/// called once, in order of increasing level.
#[inline]
pub fn walk_stopped<S, F>(src: &mut S, plan: StopPlan, cap: u64, levels: &[f64], mut on_pass: F) -> WalkOutcome
where
    S: IncrementSource,
    F: FnMut(usize, u64, f64, f64),
{
    let mut s = 0.0f64;
    let mut max = 0.0f64;
    let mut min = 0.0f64;
    let mut ladders = 0u64;
    let mut next = levels.partition_point(|&l| l < 0.0);
    let mut n = 0u64;
    if plan.deadline == 0 {
        return WalkOutcome { steps: 0, capped: false, max, last: s };
    }
    loop {
        if n >= cap {
            return WalkOutcome { steps: n, capped: true, max, last: s };
        }
        let prev = s;
        s += src.next_increment();
        n += 1;
        if s > max {
            max = s;
            while next < levels.len() && levels[next] < s {
                on_pass(next, n, prev, s);
                next += 1;
            }
        }
        if s > plan.mu_level {
            break;
        }
        if plan.ladder_k > 0 && s <= min {
            min = s;
            ladders += 1;
            if ladders == plan.ladder_k {
                break;
            }
        }
        if n == plan.deadline {
            break;
        }
    }
    WalkOutcome { steps: n, capped: false, max, last: s }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageRecord {
    pub mu: u64,
    /// `S_{μ(x)−1}`
    pub pre_jump: f64,
    /// `S_{μ(x)} − x`
    pub overshoot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppedSummary {
    pub sigma: u64,
    pub capped: bool,
    pub m_sigma: f64,
    /// `S_σ`; absent when the cap was hit first.
    pub s_sigma: Option<f64>,
    pub mu_x_hit: Option<PassageRecord>,
}

/// One stopped walk with optional first-passage probe at `x_probe`.
pub fn simulate_stopped(
    model: &IncrementModel,
    rule: &StoppingRule,
    x_probe: Option<f64>,
    cap: u64,
    rng: &mut RngState,
) -> StoppedSummary {
    let plan = rule.draw_plan(rng);
    simulate_stopped_from(&mut ModelSource::new(model, rng), plan, x_probe, cap)
}

/// [`simulate_stopped`] over any increment source and a pre-drawn plan.
pub fn simulate_stopped_from<S: IncrementSource>(src: &mut S, plan: StopPlan, x_probe: Option<f64>, cap: u64) -> StoppedSummary {
    let levels: Vec<f64> = x_probe.into_iter().collect();
    let mut hit = None;
    let out = walk_stopped(src, plan, cap, &levels, |_, n, pre, pos| hit = Some((n, pre, pos)));
    let mu_x_hit = hit.map(|(mu, pre_jump, pos)| PassageRecord { mu, pre_jump, overshoot: pos - x_probe.unwrap() });
    StoppedSummary {
        sigma: out.steps,
        capped: out.capped,
        m_sigma: out.max,
        s_sigma: (!out.capped).then_some(out.last),
        mu_x_hit,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassageClass {
    /// `μ(x) ≤ σ` with pre-jump position `≤ h(x)`: a single big jump.
    A1,
    /// `μ(x) ≤ σ` with pre-jump position `> h(x)`.
    A2,
    NoPassage,
}

pub fn classify_passage(pre_jump: Option<f64>, h: f64) -> PassageClass {
    match pre_jump {
        None => PassageClass::NoPassage,
        Some(p) if p <= h => PassageClass::A1,
        Some(_) => PassageClass::A2,
    }
}

/// Splits the event `{M_σ > x}` by where the walk stood just before crossing `x`.
pub fn first_passage_split(
    model: &IncrementModel,
    rule: &StoppingRule,
    x: f64,
    cap: u64,
    rng: &mut RngState,
) -> Result<PassageClass> {
    if !(x > 0.0) {
        return Err(Error::NonpositiveX(x));
    }
    let summary = simulate_stopped(model, rule, Some(x), cap, rng);
    Ok(classify_passage(summary.mu_x_hit.map(|h| h.pre_jump), model.insensitivity_h(x)?))
}

/// Ladder epochs `(τ_i, S_{τ_i})` for `i = 1..=k`; stops early at `cap` steps.
pub fn ladder_epochs<S: IncrementSource>(src: &mut S, k: usize, cap: u64) -> Vec<(u64, f64)> {
    let mut out = Vec::with_capacity(k);
    let (mut s, mut min, mut n) = (0.0f64, 0.0f64, 0u64);
    while out.len() < k && n < cap {
        s += src.next_increment();
        n += 1;
        if s <= min {
            min = s;
            out.push((n, s));
        }
    }
    out
}

/// One busy cycle `[0, τ]` with downcrossing counts on a level grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub tau: u64,
    pub m_tau: f64,
    pub s_tau: f64,
    pub levels: Vec<f64>,
    /// `N⁻(x)` for each entry of `levels`.
    pub downcrossings: Vec<u64>,
}

/// Runs one cycle; `levels` must be nonempty, positive and increasing.
pub fn simulate_cycle(model: &IncrementModel, levels: &[f64], rng: &mut RngState) -> Result<CycleRecord> {
    validate_levels(levels)?;
    if model.moments().mean >= 0.0 {
        return Err(Error::NonNegativeMean { mean: model.moments().mean });
    }
    let mut counts = vec![0u64; levels.len()];
    let (tau, m_tau, s_tau) = cycle_from(&mut ModelSource::new(model, rng), levels, &mut counts);
    Ok(CycleRecord { tau, m_tau, s_tau, levels: levels.to_vec(), downcrossings: counts })
}

pub(crate) fn validate_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() || !(levels[0] > 0.0) || levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("level grid must be nonempty, positive and increasing".into()));
    }
    Ok(())
}

/// Adds the cycle's downcrossings into `counts`; returns `(τ, M_τ, S_τ)`.
#[inline]
pub fn cycle_from<S: IncrementSource>(src: &mut S, levels: &[f64], counts: &mut [u64]) -> (u64, f64, f64) {
    let lowest = levels[0];
    let (mut s, mut max, mut n) = (0.0f64, 0.0f64, 0u64);
    loop {
        let prev = s;
        s += src.next_increment();
        n += 1;
        if s > max {
            max = s;
        } else if prev > lowest && s < prev {
            // levels x with s ≤ x < prev
            let lo = levels.partition_point(|&l| l < s);
            let hi = levels.partition_point(|&l| l < prev);
            for c in &mut counts[lo..hi] {
                *c += 1;
            }
        }
        if s <= 0.0 {
            return (n, max, s);
        }
    }
}

/// Counts, for each `t`, the transitions `S_n > −t ≥ S_{n+1}` made while the
/// running minimum stays above `−t − barrier`. Runs until the walk is at or
/// below `−t_max − barrier` (or `cap` steps); returns `false` if capped.
pub fn downcrossings_until_barrier<S: IncrementSource>(
    src: &mut S,
    t_grid: &[f64],
    barrier: f64,
    cap: u64,
    counts: &mut [u64],
) -> bool {
    let stop = -t_grid.last().copied().unwrap_or(0.0) - barrier;
    let mut s = 0.0f64;
    let mut min = 0.0f64;
    for _ in 0..cap {
        let prev = s;
        s += src.next_increment();
        if s < prev {
            for (i, &t) in t_grid.iter().enumerate() {
                if prev > -t && -t >= s && min > -t - barrier {
                    counts[i] += 1;
                }
            }
        }
        if s < min {
            min = s;
            if min <= stop {
                return true;
            }
        }
    }
    false
}

/// Running maximum of the walk until it first goes below `−floor`.
/// Returns `(max, capped)`.
#[inline]
pub fn supremum_until_floor<S: IncrementSource>(src: &mut S, floor: f64, cap: u64) -> (f64, bool) {
    let (mut s, mut max) = (0.0f64, 0.0f64);
    for _ in 0..cap {
        s += src.next_increment();
        if s > max {
            max = s;
        } else if s < -floor {
            return (max, false);
        }
    }
    (max, true)
}

/// Outcome of one excursion from 0 in search of the first strict ascent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ascent {
    /// `S_η`, the first strictly positive position.
    Height(f64),
    /// Fell to `−floor` or below without rising above 0.
    Floored,
    Capped,
}

pub fn first_ascent<S: IncrementSource>(src: &mut S, floor: f64, cap: u64) -> Ascent {
    let mut s = 0.0f64;
    for _ in 0..cap {
        s += src.next_increment();
        if s > 0.0 {
            return Ascent::Height(s);
        }
        if s <= -floor {
            return Ascent::Floored;
        }
    }
    Ascent::Capped
}

/// Long-run statistics of the Lindley workload `W_n = max(0, W_{n−1} + ξ_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LindleyStats {
    pub steps: u64,
    /// Number of returns of `W` to 0.
    pub cycles: u64,
    /// `Σ_n 1{W_n > x} F(x − W_n)` per level (compensated sums).
    pub conditional_sums: Vec<f64>,
    /// Observed transitions `W_n > x ≥ W_{n+1}` per level.
    pub downcrossings: Vec<u64>,
}

/// Runs the Lindley recursion from `W_0 = 0` for `steps` steps.
pub fn lindley_run(model: &IncrementModel, levels: &[f64], steps: u64, rng: &mut RngState) -> Result<LindleyStats> {
    validate_levels(levels)?;
    let mut sums = vec![crate::estimators::Neumaier::default(); levels.len()];
    let mut down = vec![0u64; levels.len()];
    let mut cycles = 0u64;
    let mut w = 0.0f64;
    for _ in 0..steps {
        for (i, &x) in levels.iter().enumerate() {
            if w > x {
                sums[i].add(model.cdf(x - w));
            }
        }
        let prev = w;
        w = (w + model.sample(rng)).max(0.0);
        if w == 0.0 {
            cycles += 1;
        }
        if w < prev {
            for (i, &x) in levels.iter().enumerate() {
                if prev > x && x >= w {
                    down[i] += 1;
                }
            }
        }
    }
    Ok(LindleyStats { steps, cycles, conditional_sums: sums.iter().map(|s| s.total()).collect(), downcrossings: down })
}
