//! Local and global tail of the all-time supremum `M`.

use serde::{Deserialize, Serialize};

use super::curve::RatioCurve;
use super::mc::{run_replications, McOptions, Merge};
use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::walk_engine::{supremum_until_floor, validate_levels, ModelSource};

const STREAM: u64 = 0x3a11;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowsReport {
    /// `P(M ∈ (x, x + c]) / F̄(x)`, target `c/m`.
    pub window: RatioCurve,
    /// `P(M > x) / F̄ˢ(x)`, target `1/m`.
    pub global_tail: RatioCurve,
    /// `F̄ˢ(floor)/m`: size of the error from stopping at `−floor`.
    pub bias_bound: f64,
    pub c: f64,
    pub floor: f64,
    pub n_capped: u64,
}

#[derive(Clone)]
struct Hits {
    n: u64,
    capped: u64,
    window: Vec<u64>,
    above: Vec<u64>,
}

impl Merge for Hits {
    fn merge(&mut self, o: Self) {
        self.n += o.n;
        self.capped += o.capped;
        for i in 0..self.window.len() {
            self.window[i] += o.window[i];
            self.above[i] += o.above[i];
        }
    }
}

/// `M` is approximated per replication by the running maximum until the walk
/// first drops below `−floor`.
pub fn estimate_supremum_windows(
    model: &IncrementModel,
    x_grid: &[f64],
    c: f64,
    floor: f64,
    opts: &McOptions,
) -> Result<WindowsReport> {
    opts.check(1)?;
    validate_levels(x_grid)?;
    if !(c > 0.0) || !(floor > 0.0) {
        return Err(Error::InvalidParameter(format!("need c > 0 and floor > 0 (got {c}, {floor})")));
    }
    if model.moments().mean >= 0.0 {
        return Err(Error::NonNegativeMean { mean: model.moments().mean });
    }
    let k = x_grid.len();
    let cap = opts.cap;
    let acc = run_replications(
        opts.n,
        opts.seed,
        STREAM,
        opts.workers,
        || Hits { n: 0, capped: 0, window: vec![0; k], above: vec![0; k] },
        |acc, rng| {
            let (m, capped) = supremum_until_floor(&mut ModelSource::new(model, rng), floor, cap);
            acc.n += 1;
            if capped {
                acc.capped += 1;
                return;
            }
            for (i, &x) in x_grid.iter().enumerate() {
                if m <= x {
                    break;
                }
                acc.above[i] += 1;
                if m <= x + c {
                    acc.window[i] += 1;
                }
            }
        },
    );
    let m_abs = model.drift();
    let n_eff = vec![acc.n - acc.capped; k];
    let tails: Vec<f64> = x_grid.iter().map(|&x| model.tail(x)).collect();
    let second: Vec<f64> = x_grid.iter().map(|&x| model.second_tail(x)).collect();
    let window = RatioCurve::from_hits("window_ratio", x_grid, &acc.window, &n_eff, &tails)
        .with_target(c / m_abs, 0.0, format!("c/m with c = {c}"));
    let global_tail = RatioCurve::from_hits("global_tail_ratio", x_grid, &acc.above, &n_eff, &second)
        .with_target(1.0 / m_abs, 0.0, "1/m");
    Ok(WindowsReport { window, global_tail, bias_bound: model.second_tail(floor) / m_abs, c, floor, n_capped: acc.capped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    #[test]
    fn windows_add_up_in_counts() {
        let m = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0)).unwrap();
        let opts = McOptions::new(50_000, 8);
        let x = 4.0;
        let narrow = estimate_supremum_windows(&m, &[x, x + 2.0], 2.0, 50.0, &opts).unwrap();
        let wide = estimate_supremum_windows(&m, &[x], 4.0, 50.0, &opts).unwrap();
        assert_eq!(narrow.window.hits[0] + narrow.window.hits[1], wide.window.hits[0]);
        assert!((narrow.bias_bound - 53f64.powf(-1.5) / 1.5 * 0.75).abs() < 1e-15);
    }
}
