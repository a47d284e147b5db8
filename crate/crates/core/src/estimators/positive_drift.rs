//! `P(M_σ > x) / F̄(x)` when the drift may be positive, for σ whose tail is
//! negligible at the scale `h(x)`.

use serde::{Deserialize, Serialize};

use super::mc::McOptions;
use super::tail_ratio::{stopped_counts, tail_ratio_from_counts, Statistic};
use super::RatioCurve;
use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::walk_engine::{validate_levels, StoppingRule};

/// Largest accepted `P(σ > h(x)) / F̄(x)` at the top of the grid.
pub const PCOND_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveDriftReport {
    pub curve: RatioCurve,
    /// `P(σ > h(x)) / F̄(x)` at each grid point.
    pub pcond: Vec<f64>,
    pub n_capped: u64,
}

/// Checks `P(σ > h(x)) / F̄(x) ≤ 0.01` at the largest `x`; returns the ratios.
pub fn check_pcond(model: &IncrementModel, rule: &StoppingRule, x_grid: &[f64]) -> Result<Vec<f64>> {
    validate_levels(x_grid)?;
    let ratios = x_grid
        .iter()
        .map(|&x| {
            let h = model.insensitivity_h(x)?;
            let tail = rule.tail_prob(h.floor() as u64).ok_or_else(|| Error::UnsupportedRule(rule.label()))?;
            Ok(tail / model.tail(x))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (x, ratio) = (*x_grid.last().unwrap(), *ratios.last().unwrap());
    if !(ratio <= PCOND_LIMIT) {
        return Err(Error::PcondViolated { x, ratio, limit: PCOND_LIMIT });
    }
    Ok(ratios)
}

/// Accepts models of any finite mean; σ must be walk-independent.
pub fn positive_drift_ratio(model: &IncrementModel, rule: &StoppingRule, x_grid: &[f64], opts: &McOptions) -> Result<PositiveDriftReport> {
    opts.check(1)?;
    rule.validate()?;
    let pcond = check_pcond(model, rule, x_grid)?;
    let counts = stopped_counts(model, rule, x_grid, opts)?;
    let report = tail_ratio_from_counts(model, rule, x_grid, &counts, Statistic::MaxOverSigma);
    Ok(PositiveDriftReport { curve: report.curve, pcond, n_capped: counts.capped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    fn up_model() -> IncrementModel {
        IncrementModel::unchecked(Family::pareto(2.5, 1.0, 7.0 / 6.0)).unwrap()
    }

    #[test]
    fn mean_is_one_half() {
        assert!((up_model().moments().mean - 0.5).abs() < 1e-14);
    }

    #[test]
    fn fixed_zero_gives_zeros() {
        let r = positive_drift_ratio(&up_model(), &StoppingRule::FixedN { n: 0 }, &[10.0, 100.0], &McOptions::new(1000, 1)).unwrap();
        assert!(r.curve.point.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn polynomial_sigma_fails_pcond() {
        let r = positive_drift_ratio(&up_model(), &StoppingRule::IndependentPareto { a: 0.5 }, &[10.0, 100.0, 1000.0], &McOptions::new(1000, 1));
        assert!(matches!(r, Err(Error::PcondViolated { .. })));
    }

    #[test]
    fn walk_dependent_rule_is_unsupported() {
        let r = check_pcond(&up_model(), &StoppingRule::Tau, &[10.0]);
        assert!(matches!(r, Err(Error::UnsupportedRule(_))));
    }
}
