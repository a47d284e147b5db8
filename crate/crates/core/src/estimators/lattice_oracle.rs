//! Exact probabilities for walks on `{…, −1, 0, 1, …}` whose only downward
//! step is `−1` (skip-free downward).
//!
//! Skip-freeness means a walk at height `j` can only reach `j − 1` by
//! visiting it, so descents factor into one-level pieces. Let `ε(y)` be the
//! probability that a walk started at 0 reaches −1 before exceeding `y`.
//! Conditioning on the first step gives `ε(y) = q / (q + N(y))` with
//! `N(y) = Σ_{k≤y} p_k (1 − Π_{i=1}^k ε(y − i)) + P(ξ > y)`.
//! Jumps past the upper level are absorbed in one transition through the
//! exact tail, so nothing is truncated.

use serde::{Deserialize, Serialize};

use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::walk_engine::StoppingRule;

/// Largest level the oracle accepts.
pub const MAX_LEVEL: u64 = 10_000;

/// A skip-free-downward step law: `−1` w.p. `q`, `k ≥ 0` w.p. `p(k)`.
pub trait SkipFreeLaw {
    fn down(&self) -> f64;
    fn up(&self, k: u64) -> f64;
    /// `P(ξ > k)` for `k ≥ 0`.
    fn above(&self, k: u64) -> f64;
    fn mean(&self) -> f64;
}

impl SkipFreeLaw for IncrementModel {
    fn down(&self) -> f64 {
        self.lattice_law().expect("lattice model").q
    }
    fn up(&self, k: u64) -> f64 {
        self.lattice_law().expect("lattice model").up_prob(k)
    }
    fn above(&self, k: u64) -> f64 {
        self.lattice_law().expect("lattice model").at_least(k + 1)
    }
    fn mean(&self) -> f64 {
        self.moments().mean
    }
}

/// Finite-support skip-free law given by `q` and the masses of `0..up.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSkipFree {
    pub q: f64,
    pub up: Vec<f64>,
}

impl SkipFreeLaw for FiniteSkipFree {
    fn down(&self) -> f64 {
        self.q
    }
    fn up(&self, k: u64) -> f64 {
        self.up.get(k as usize).copied().unwrap_or(0.0)
    }
    fn above(&self, k: u64) -> f64 {
        self.up.iter().skip(k as usize + 1).sum()
    }
    fn mean(&self) -> f64 {
        -self.q + self.up.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeOracleResult {
    pub x: u64,
    pub rule: StoppingRule,
    /// Exact `P(M_σ > x)`.
    pub probability: f64,
    /// Exact `E σ`.
    pub sigma_mean: f64,
    /// Exact `F̄(x)`.
    pub tail: f64,
}

impl LatticeOracleResult {
    pub fn ratio(&self) -> f64 {
        self.probability / self.tail
    }
}

/// `1 − ε(y)` for `y = 0..=top`: failure to descend one level with `y` room above.
pub fn descent_failure<L: SkipFreeLaw + ?Sized>(law: &L, top: u64) -> Vec<f64> {
    let q = law.down();
    let mut fail = Vec::with_capacity(top as usize + 1);
    for y in 0..=top {
        // d = 1 − Π_{i=1}^k ε(y − i), built up in k
        let mut d = 0.0f64;
        let mut n = law.above(y);
        // k = 0 contributes p_0 · 0
        for k in 1..=y {
            d += (1.0 - d) * fail[(y - k) as usize];
            n += law.up(k) * d;
        }
        fail.push(n / (q + n));
    }
    fail
}

fn check_level(x: u64) -> Result<()> {
    if x > MAX_LEVEL {
        return Err(Error::StateSpaceTooLarge { x, max: MAX_LEVEL });
    }
    Ok(())
}

/// `P(M_τ > x)` with `τ = min{n ≥ 1 : S_n ≤ 0}`.
pub fn tau_exceedance<L: SkipFreeLaw + ?Sized>(law: &L, x: u64) -> Result<f64> {
    check_level(x)?;
    if x == 0 {
        return Ok(law.above(0));
    }
    let fail = descent_failure(law, x - 1);
    // From s ∈ 1..=x the walk must fail to descend at least once on the way
    // to 0; the descent from height j has x − j room above.
    let mut total = law.above(x);
    let mut d = 0.0f64;
    for s in 1..=x {
        d += (1.0 - d) * fail[(x - s) as usize];
        total += law.up(s) * d;
    }
    Ok(total)
}

/// Expected number of downcrossings of `−t` before the walk first reaches
/// `−t − barrier`, for integer `t ≥ 1`: `1 / Π_{j<barrier} ε(j)`.
pub fn expected_downcrossings<L: SkipFreeLaw + ?Sized>(law: &L, barrier: u64) -> Result<f64> {
    check_level(barrier)?;
    if barrier == 0 {
        return Ok(1.0);
    }
    let fail = descent_failure(law, barrier - 1);
    Ok(1.0 / fail.iter().map(|f| 1.0 - f).product::<f64>())
}

/// `P(max_{0≤i≤N} S_i > x)` by forward DP over positions `−N..=x`.
fn fixed_exceedance<L: SkipFreeLaw + ?Sized>(law: &L, n_steps: u64, x: u64, stop_at_zero: bool) -> f64 {
    let q = law.down();
    let lo = -(n_steps as i64);
    let width = (x as i64 - lo + 1) as usize;
    let idx = |s: i64| (s - lo) as usize;
    let mut dist = vec![0.0f64; width];
    dist[idx(0)] = 1.0;
    let mut success = 0.0f64;
    let ups: Vec<f64> = (0..=(x as i64 - lo) as u64).map(|k| law.up(k)).collect();
    let aboves: Vec<f64> = (0..=(x as i64 - lo) as u64).map(|k| law.above(k)).collect();
    for _ in 0..n_steps {
        let mut next = vec![0.0f64; width];
        for (i, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let s = lo + i as i64;
            if s > lo {
                next[idx(s - 1)] += mass * q;
            }
            let room = (x as i64 - s) as u64; // jumps k ≤ room stay at or below x
            for k in 0..=room {
                next[idx(s + k as i64)] += mass * ups[k as usize];
            }
            success += mass * aboves[room as usize];
        }
        if stop_at_zero {
            // τ fires once S_n ≤ 0 for n ≥ 1
            for s in lo..=0 {
                next[idx(s)] = 0.0;
            }
        }
        dist = next;
    }
    success
}

/// `Σ_{n<N} P(τ > n)`: DP on heights `1..=N`, where anything above `N`
/// cannot return to 0 within the remaining steps.
fn tau_truncated_mean<L: SkipFreeLaw + ?Sized>(law: &L, n_steps: u64) -> f64 {
    if n_steps == 0 {
        return 0.0;
    }
    let cut = n_steps as usize;
    let q = law.down();
    // dist[s] for heights 1..=cut, plus mass `high` above cut
    let mut dist = vec![0.0f64; cut + 1];
    let mut high = law.above(cut as u64);
    for (s, slot) in dist.iter_mut().enumerate().skip(1) {
        *slot = law.up(s as u64);
    }
    let ups: Vec<f64> = (0..=cut as u64).map(|k| law.up(k)).collect();
    let aboves: Vec<f64> = (0..=cut as u64).map(|k| law.above(k)).collect();
    let mut total = 1.0; // P(τ > 0)
    for _ in 1..n_steps {
        total += dist.iter().sum::<f64>() + high;
        let mut next = vec![0.0f64; cut + 1];
        for s in 1..=cut {
            let mass = dist[s];
            if mass == 0.0 {
                continue;
            }
            if s > 1 {
                next[s - 1] += mass * q;
            }
            for k in 0..=(cut - s) {
                next[s + k] += mass * ups[k];
            }
            high += mass * aboves[cut - s];
        }
        dist = next;
    }
    total
}

/// Exact `P(M_σ > x)` for σ in {`FixedN`, `Tau`, `MinOf(Tau, FixedN)`}.
pub fn exact_lattice_oracle(model: &IncrementModel, rule: &StoppingRule, x: u64) -> Result<LatticeOracleResult> {
    if !model.is_lattice() {
        return Err(Error::InvalidParameter("the exact oracle needs a lattice_poly_tail model".into()));
    }
    exact_oracle_for(model, rule, x).map(|(probability, sigma_mean)| LatticeOracleResult {
        x,
        rule: rule.clone(),
        probability,
        sigma_mean,
        tail: model.tail(x as f64),
    })
}

/// `(P(M_σ > x), E σ)` for any skip-free law.
pub fn exact_oracle_for<L: SkipFreeLaw + ?Sized>(law: &L, rule: &StoppingRule, x: u64) -> Result<(f64, f64)> {
    check_level(x)?;
    let fixed_of = |r: &StoppingRule| match r {
        StoppingRule::FixedN { n } => Some(*n),
        _ => None,
    };
    match rule {
        StoppingRule::Tau => {
            let mean = law.mean();
            let sigma_mean = if mean < 0.0 { law.down() / -mean } else { f64::INFINITY };
            Ok((tau_exceedance(law, x)?, sigma_mean))
        }
        StoppingRule::FixedN { n } => {
            check_level(*n)?;
            Ok((fixed_exceedance(law, *n, x, false), *n as f64))
        }
        StoppingRule::MinOf { a, b } => {
            let n = match (a.as_ref(), b.as_ref()) {
                (StoppingRule::Tau, other) | (other, StoppingRule::Tau) => fixed_of(other),
                _ => None,
            }
            .ok_or_else(|| Error::UnsupportedRule(rule.label()))?;
            check_level(n)?;
            Ok((fixed_exceedance(law, n, x, true), tau_truncated_mean(law, n)))
        }
        other => Err(Error::UnsupportedRule(other.label())),
    }
}
