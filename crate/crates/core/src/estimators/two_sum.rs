//! Monte-Carlo `P(φ₁ + φ₂ > x) / Ḡ⁺(x)` for i.i.d. `φ_i ~ ξ⁺` of the base law.

use serde::{Deserialize, Serialize};

use super::curve::RatioCurve;
use super::mc::{run_replications, McOptions, Merge};
use crate::distributions::IncrementModel;
use crate::error::Result;
use crate::tail_analysis::subexp_ratio;
use crate::walk_engine::validate_levels;

const STREAM: u64 = 0x2503;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSumReport {
    /// Target 2.
    pub curve: RatioCurve,
    /// Quadrature value of the same ratio at each grid point.
    pub quadrature: Vec<f64>,
    pub hits_first: Vec<u64>,
    pub hits_second: Vec<u64>,
    pub hits_both: Vec<u64>,
    /// `hits(φ₁>x) + hits(φ₂>x) − hits(both) ≤ hits(sum>x)` at every point.
    pub inclusion_holds: bool,
}

#[derive(Clone)]
struct Counts {
    n: u64,
    sum: Vec<u64>,
    first: Vec<u64>,
    second: Vec<u64>,
    both: Vec<u64>,
    inclusion_ok: bool,
}

impl Merge for Counts {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.inclusion_ok &= o.inclusion_ok;
        for i in 0..self.sum.len() {
            self.sum[i] += o.sum[i];
            self.first[i] += o.first[i];
            self.second[i] += o.second[i];
            self.both[i] += o.both[i];
        }
    }
}

/// Uses the unshifted base law of `model` (for lattice models, `ξ⁺` itself).
pub fn subexp_two_sum_ratio(model: &IncrementModel, x_grid: &[f64], opts: &McOptions) -> Result<TwoSumReport> {
    opts.check(1)?;
    validate_levels(x_grid)?;
    let base = model.base_model();
    let k = x_grid.len();
    let acc = run_replications(
        opts.n,
        opts.seed,
        STREAM,
        opts.workers,
        || Counts { n: 0, sum: vec![0; k], first: vec![0; k], second: vec![0; k], both: vec![0; k], inclusion_ok: true },
        |acc, rng| {
            let a = base.sample(rng).max(0.0);
            let b = base.sample(rng).max(0.0);
            acc.n += 1;
            for (i, &x) in x_grid.iter().enumerate() {
                let (s, f, g) = (a + b > x, a > x, b > x);
                acc.sum[i] += s as u64;
                acc.first[i] += f as u64;
                acc.second[i] += g as u64;
                acc.both[i] += (f && g) as u64;
                acc.inclusion_ok &= (f as u8 + g as u8 - (f && g) as u8) <= s as u8;
            }
        },
    );
    let tails: Vec<f64> = x_grid.iter().map(|&x| base.tail(x)).collect();
    let curve = RatioCurve::from_hits("two_sum_ratio", x_grid, &acc.sum, &vec![acc.n; k], &tails)
        .with_target(2.0, 0.0, "subexponential limit 2");
    let quadrature = x_grid.iter().map(|&x| subexp_ratio(&base, x)).collect::<Result<Vec<_>>>()?;
    Ok(TwoSumReport { curve, quadrature, hits_first: acc.first, hits_second: acc.second, hits_both: acc.both, inclusion_holds: acc.inclusion_ok })
}
