//! Expected downcrossing counts: below the start with an absorbing barrier,
//! and per busy cycle against the stationary Lindley workload.

use serde::{Deserialize, Serialize};

use super::curve::RatioCurve;
use super::lattice_oracle::expected_downcrossings;
use super::mc::{run_replications, McOptions, Merge, Neumaier, Z95};
use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::walk_engine::{cycle_from, downcrossings_until_barrier, lindley_run, validate_levels, ModelSource};

const STREAM_BARRIER: u64 = 0xd0c7;
const STREAM_CYCLE: u64 = 0xc7c1;
const STREAM_LINDLEY: u64 = 0x11d1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DowncrossingReport {
    /// Mean number of downcrossings of `−t`; target `m⁻/m`.
    pub curve: RatioCurve,
    /// Largest point on the grid, standing in for `sup_t`.
    pub k_hat: f64,
    /// Exact expectations for lattice models with integer `t` and barrier.
    pub exact: Option<Vec<f64>>,
    pub n_capped: u64,
}

#[derive(Clone)]
struct CountMoments {
    n: u64,
    capped: u64,
    sum: Vec<u64>,
    sum_sq: Vec<u128>,
}

impl Merge for CountMoments {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.capped += o.capped;
        for i in 0..self.sum.len() {
            self.sum[i] += o.sum[i];
            self.sum_sq[i] += o.sum_sq[i];
        }
    }
}

/// Monte-Carlo `𝒟(−t, −x)`: expected transitions `S_n > −t ≥ S_{n+1}` made
/// while `min_{k≤n} S_k > −t − x`, for each `t` in `t_grid`.
pub fn estimate_downcrossings(model: &IncrementModel, t_grid: &[f64], x_barrier: f64, opts: &McOptions) -> Result<DowncrossingReport> {
    opts.check(1)?;
    validate_levels(t_grid)?;
    if !(x_barrier > *t_grid.last().unwrap()) {
        return Err(Error::InvalidParameter(format!("barrier {x_barrier} must exceed the largest t")));
    }
    let k = t_grid.len();
    let cap = opts.cap;
    let acc = run_replications(
        opts.n,
        opts.seed,
        STREAM_BARRIER,
        opts.workers,
        || CountMoments { n: 0, capped: 0, sum: vec![0; k], sum_sq: vec![0; k] },
        |acc, rng| {
            let mut counts = [0u64; 16];
            let mut heap;
            let buf: &mut [u64] = if k <= 16 {
                &mut counts[..k]
            } else {
                heap = vec![0u64; k];
                &mut heap
            };
            acc.n += 1;
            if !downcrossings_until_barrier(&mut ModelSource::new(model, rng), t_grid, x_barrier, cap, buf) {
                acc.capped += 1;
                return;
            }
            for (i, &c) in buf.iter().enumerate() {
                acc.sum[i] += c;
                acc.sum_sq[i] += (c as u128) * (c as u128);
            }
        },
    );
    let n_eff = acc.n - acc.capped;
    let sums: Vec<f64> = acc.sum.iter().map(|&s| s as f64).collect();
    let sums_sq: Vec<f64> = acc.sum_sq.iter().map(|&s| s as f64).collect();
    let mo = model.moments();
    let curve = RatioCurve::from_moments("downcrossings", t_grid, &sums, &sums_sq, n_eff)
        .with_target(mo.m_minus / mo.m_abs, 0.0, "m_minus / m from closed-form moments");
    let k_hat = curve.point.iter().copied().fold(0.0, f64::max);
    let exact = lattice_exact(model, t_grid, x_barrier)?;
    Ok(DowncrossingReport { curve, k_hat, exact, n_capped: acc.capped })
}

fn lattice_exact(model: &IncrementModel, t_grid: &[f64], barrier: f64) -> Result<Option<Vec<f64>>> {
    let integral = |v: f64| v.fract() == 0.0;
    if !model.is_lattice() || !integral(barrier) || !t_grid.iter().all(|&t| integral(t)) {
        return Ok(None);
    }
    // the count does not depend on t once −t lies below the start
    let v = expected_downcrossings(model, barrier as u64)?;
    Ok(Some(vec![v; t_grid.len()]))
}

/// Cycle-based and stationary estimates of the downcrossing rate per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleDowncrossingReport {
    pub levels: Vec<f64>,
    /// `Ê N⁻(x) / Ê τ` from independent busy cycles.
    pub cycle_rate: Vec<f64>,
    pub cycle_half_width: Vec<f64>,
    /// `Ê[1{W > x} F(x − W)]` from Lindley batches.
    pub stationary_rate: Vec<f64>,
    pub stationary_half_width: Vec<f64>,
    pub tau_mean: f64,
    pub n_cycles: u64,
}

impl CycleDowncrossingReport {
    /// Both estimates agree within `k` combined half-widths at index `i`.
    pub fn agree(&self, i: usize, k: f64) -> bool {
        (self.cycle_rate[i] - self.stationary_rate[i]).abs() <= k * self.cycle_half_width[i].hypot(self.stationary_half_width[i])
    }
}

#[derive(Clone)]
struct CycleMoments {
    n: u64,
    tau: u128,
    tau_sq: u128,
    count: Vec<u128>,
    count_sq: Vec<u128>,
    cross: Vec<u128>,
}

impl Merge for CycleMoments {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.tau += o.tau;
        self.tau_sq += o.tau_sq;
        for i in 0..self.count.len() {
            self.count[i] += o.count[i];
            self.count_sq[i] += o.count_sq[i];
            self.cross[i] += o.cross[i];
        }
    }
}

#[derive(Clone)]
struct BatchMoments {
    sum: Vec<Neumaier>,
    sum_sq: Vec<Neumaier>,
    batches: u64,
}

impl Merge for BatchMoments {
    fn merge(&mut self, o: Self) {
        self.batches += o.batches;
        for i in 0..self.sum.len() {
            self.sum[i].merge(&o.sum[i]);
            self.sum_sq[i].merge(&o.sum_sq[i]);
        }
    }
}

/// Compares `E N⁻(x)/E τ` over `n_cycles` busy cycles with the stationary
/// downcrossing rate from `batches` Lindley runs of `batch_steps` steps, each
/// started empty.
pub fn cycle_downcrossing_check(
    model: &IncrementModel,
    levels: &[f64],
    n_cycles: u64,
    batches: u64,
    batch_steps: u64,
    seed: u64,
    workers: Option<usize>,
) -> Result<CycleDowncrossingReport> {
    validate_levels(levels)?;
    if model.moments().mean >= 0.0 {
        return Err(Error::NonNegativeMean { mean: model.moments().mean });
    }
    if n_cycles < 2 || batches < 2 || batch_steps == 0 {
        return Err(Error::InvalidParameter("need at least 2 cycles, 2 batches and 1 step per batch".into()));
    }
    let k = levels.len();
    let cyc = run_replications(
        n_cycles,
        seed,
        STREAM_CYCLE,
        workers,
        || CycleMoments { n: 0, tau: 0, tau_sq: 0, count: vec![0; k], count_sq: vec![0; k], cross: vec![0; k] },
        |acc, rng| {
            let mut counts = vec![0u64; k];
            let (tau, _, _) = cycle_from(&mut ModelSource::new(model, rng), levels, &mut counts);
            let t = tau as u128;
            acc.n += 1;
            acc.tau += t;
            acc.tau_sq += t * t;
            for (i, &c) in counts.iter().enumerate() {
                let c = c as u128;
                acc.count[i] += c;
                acc.count_sq[i] += c * c;
                acc.cross[i] += c * t;
            }
        },
    );
    let nf = cyc.n as f64;
    let tau_mean = cyc.tau as f64 / nf;
    let mut cycle_rate = Vec::with_capacity(k);
    let mut cycle_half_width = Vec::with_capacity(k);
    for i in 0..k {
        let r = cyc.count[i] as f64 / cyc.tau as f64;
        // delta method on the ratio of means: Var(N − rτ) / (n (Eτ)²)
        let var = (cyc.count_sq[i] as f64 - 2.0 * r * cyc.cross[i] as f64 + r * r * cyc.tau_sq as f64) / nf
            - (cyc.count[i] as f64 / nf - r * tau_mean).powi(2);
        cycle_rate.push(r);
        cycle_half_width.push(Z95 * (var.max(0.0) / nf).sqrt() / tau_mean);
    }
    let lin = run_replications(
        batches,
        seed,
        STREAM_LINDLEY,
        workers,
        || BatchMoments { sum: vec![Neumaier::default(); k], sum_sq: vec![Neumaier::default(); k], batches: 0 },
        |acc, rng| {
            let stats = lindley_run(model, levels, batch_steps, rng).expect("levels validated");
            acc.batches += 1;
            for i in 0..k {
                let rate = stats.conditional_sums[i] / batch_steps as f64;
                acc.sum[i].add(rate);
                acc.sum_sq[i].add(rate * rate);
            }
        },
    );
    let bf = lin.batches as f64;
    let stationary_rate: Vec<f64> = lin.sum.iter().map(|s| s.total() / bf).collect();
    let stationary_half_width = (0..k)
        .map(|i| super::mc::mean_half_width(lin.sum[i].total(), lin.sum_sq[i].total(), lin.batches))
        .collect();
    Ok(CycleDowncrossingReport {
        levels: levels.to_vec(),
        cycle_rate,
        cycle_half_width,
        stationary_rate,
        stationary_half_width,
        tau_mean,
        n_cycles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    #[test]
    fn lattice_downcrossings_match_exact() {
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        let r = estimate_downcrossings(&m, &[1.0, 4.0, 10.0], 60.0, &McOptions::new(100_000, 2)).unwrap();
        let exact = r.exact.clone().unwrap();
        for i in 0..3 {
            assert!((r.curve.point[i] - exact[i]).abs() <= 3.0 * r.curve.half_width[i], "{i}: {} vs {}", r.curve.point[i], exact[i]);
        }
    }

    #[test]
    fn barrier_must_exceed_grid() {
        let m = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0)).unwrap();
        assert!(estimate_downcrossings(&m, &[10.0, 20.0], 15.0, &McOptions::new(10, 1)).is_err());
    }

    #[test]
    fn cycle_and_stationary_rates_agree() {
        let m = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
        let r = cycle_downcrossing_check(&m, &[0.5, 1.5], 400_000, 40, 20_000, 4, None).unwrap();
        for i in 0..2 {
            assert!(r.agree(i, 3.0), "{r:?}");
        }
    }
}
