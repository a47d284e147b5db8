//! Parametric increment laws with exact tails, inverse-CDF samplers and
//! moment functionals.
//!
//! Every continuous family is a nonnegative base law `X` shifted down by
//! `b`, so increments are `ξ = X − b`. The lattice family lives on
//! `{−1, 0, 1, 2, …}` with `P(ξ = −1) = q` and `P(ξ = k) ∝ (k + 2)^(−r)`
//! for `k ≥ 0`; it is skip-free downward, which is what makes the exact
//! lattice oracle possible.
//!
//! Below the support infimum the tail is 1, so `tail` is total on ℝ.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ui, gamma_ur};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_tail, Tolerance};
use crate::rng::RngState;
use crate::special::{hurwitz_zeta, normal_isf, normal_sf, zeta};

/// Parameters of an increment law, in the JSON shape shared with scenario
/// configs: `{"family": "pareto_shift", "alpha": 2.5, "xm": 1.0, "b": 3.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ParetoShift {
        alpha: f64,
        xm: f64,
        #[serde(default)]
        b: f64,
    },
    WeibullShift {
        shape: f64,
        scale: f64,
        #[serde(default)]
        b: f64,
    },
    LognormalShift {
        mu_log: f64,
        sigma_log: f64,
        #[serde(default)]
        b: f64,
    },
    ExponentialShift {
        rate: f64,
        #[serde(default)]
        b: f64,
    },
    LatticePolyTail { q: f64, r: f64 },
}

impl Family {
    pub fn pareto(alpha: f64, xm: f64, b: f64) -> Self {
        Family::ParetoShift { alpha, xm, b }
    }

    pub fn exponential(rate: f64, b: f64) -> Self {
        Family::ExponentialShift { rate, b }
    }

    pub fn weibull(shape: f64, scale: f64, b: f64) -> Self {
        Family::WeibullShift { shape, scale, b }
    }

    pub fn lognormal(mu_log: f64, sigma_log: f64, b: f64) -> Self {
        Family::LognormalShift { mu_log, sigma_log, b }
    }

    pub fn lattice(q: f64, r: f64) -> Self {
        Family::LatticePolyTail { q, r }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::ParetoShift { .. } => "pareto_shift",
            Family::WeibullShift { .. } => "weibull_shift",
            Family::LognormalShift { .. } => "lognormal_shift",
            Family::ExponentialShift { .. } => "exponential_shift",
            Family::LatticePolyTail { .. } => "lattice_poly_tail",
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let finite_b = |b: f64| b.is_finite() && b >= 0.0;
        match *self {
            Family::ParetoShift { alpha, xm, b } => {
                if !(alpha > 0.0 && alpha.is_finite()) || !(xm > 0.0 && xm.is_finite()) || !finite_b(b) {
                    return bad(format!("pareto_shift needs alpha > 0, xm > 0, b >= 0 (got {alpha}, {xm}, {b})"));
                }
                if alpha <= 1.0 {
                    return Err(Error::InfiniteMean(format!("pareto tail index {alpha} <= 1")));
                }
            }
            Family::WeibullShift { shape, scale, b } => {
                if !(shape > 0.0 && shape.is_finite()) || !(scale > 0.0 && scale.is_finite()) || !finite_b(b) {
                    return bad(format!("weibull_shift needs shape > 0, scale > 0, b >= 0 (got {shape}, {scale}, {b})"));
                }
            }
            Family::LognormalShift { mu_log, sigma_log, b } => {
                if !mu_log.is_finite() || !(sigma_log > 0.0 && sigma_log.is_finite()) || !finite_b(b) {
                    return bad(format!("lognormal_shift needs finite mu_log, sigma_log > 0, b >= 0 (got {mu_log}, {sigma_log}, {b})"));
                }
            }
            Family::ExponentialShift { rate, b } => {
                if !(rate > 0.0 && rate.is_finite()) || !finite_b(b) {
                    return bad(format!("exponential_shift needs rate > 0, b >= 0 (got {rate}, {b})"));
                }
            }
            Family::LatticePolyTail { q, r } => {
                // q = 1 is the degenerate always-down walk, kept for boundary tests.
                if !(q > 0.0 && q <= 1.0) || !r.is_finite() {
                    return bad(format!("lattice_poly_tail needs q in (0, 1], finite r (got {q}, {r})"));
                }
                if r <= 2.0 {
                    return Err(Error::InfiniteMean(format!("lattice tail exponent {r} <= 2")));
                }
            }
        }
        Ok(())
    }
}

/// Whether the constructor enforced a negative mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftMode {
    Negative,
    Unchecked,
}

/// `mean = m_plus − m_minus`, with `m_abs = −mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub m_abs: f64,
    /// `∫_0^∞ F̄(x) dx`, the mean of `ξ⁺`.
    pub m_plus: f64,
    /// `∫_0^∞ F(−y) dy`, the mean of `ξ⁻`.
    pub m_minus: f64,
}

const LATTICE_TABLE: usize = 4096;

/// Exact law of the skip-free lattice family.
#[derive(Debug)]
pub(crate) struct LatticeLaw {
    pub q: f64,
    pub r: f64,
    /// `ζ(r) − 1 = Σ_{j≥2} j^(−r)`
    norm: f64,
    /// `P(up ≤ k)` for the conditional up-jump law, `k < LATTICE_TABLE`.
    up_cdf: Vec<f64>,
}

impl LatticeLaw {
    fn new(q: f64, r: f64) -> Self {
        let norm = zeta(r) - 1.0;
        let up_cdf = (0..LATTICE_TABLE)
            .map(|k| 1.0 - hurwitz_zeta(r, k as f64 + 3.0) / norm)
            .collect();
        Self { q, r, norm, up_cdf }
    }

    /// `P(ξ = k)` for `k ≥ 0`.
    pub fn up_prob(&self, k: u64) -> f64 {
        (1.0 - self.q) * (k as f64 + 2.0).powf(-self.r) / self.norm
    }

    /// `P(ξ ≥ j)` for integer `j ≥ 0`.
    pub fn at_least(&self, j: u64) -> f64 {
        if j == 0 {
            return 1.0 - self.q;
        }
        (1.0 - self.q) * hurwitz_zeta(self.r, j as f64 + 2.0) / self.norm
    }

    /// `Σ_{j≥n} P(ξ > j)` for integer `n ≥ 0`.
    fn summed_tail(&self, n: u64) -> f64 {
        let a = n as f64 + 3.0;
        (1.0 - self.q) / self.norm * (hurwitz_zeta(self.r - 1.0, a) - (n as f64 + 2.0) * hurwitz_zeta(self.r, a))
    }

    fn m_plus(&self) -> f64 {
        (1.0 - self.q) / self.norm * ((zeta(self.r - 1.0) - 1.0) - 2.0 * self.norm)
    }

    fn sample_from_uniform(&self, u: f64) -> f64 {
        if u < self.q {
            return -1.0;
        }
        let v = (u - self.q) / (1.0 - self.q);
        let k = self.up_cdf.partition_point(|&c| c <= v);
        if k < self.up_cdf.len() {
            return k as f64;
        }
        // Beyond the table: invert the Hurwitz tail directly.
        let w = (1.0 - u) / (1.0 - self.q);
        let above = |k: u64| hurwitz_zeta(self.r, k as f64 + 3.0) / self.norm;
        let mut lo = LATTICE_TABLE as u64 - 1; // above(lo) >= w
        let mut hi = lo.max(1) * 2;
        while above(hi) >= w {
            lo = hi;
            hi = hi.saturating_mul(2);
            if hi == u64::MAX {
                return hi as f64;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if above(mid) >= w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi as f64
    }
}

/// Precomputed constants for the hot sampling path.
#[derive(Debug, Clone, Copy)]
enum Kernel {
    Pareto { xm: f64, neg_inv_alpha: f64, b: f64 },
    Weibull { scale: f64, inv_shape: f64, b: f64 },
    Lognormal { mu: f64, sigma: f64, b: f64 },
    Exponential { inv_rate: f64, b: f64 },
    Lattice,
}

/// A validated increment law together with its moments.
#[derive(Debug, Clone)]
pub struct IncrementModel {
    family: Family,
    mode: DriftMode,
    moments: MomentSummary,
    kernel: Kernel,
    lattice: Option<Arc<LatticeLaw>>,
}

impl IncrementModel {
    /// Model for walks with negative drift; rejects `mean ≥ 0`.
    pub fn new(family: Family) -> Result<Self> {
        let model = Self::unchecked(family)?;
        if model.moments.mean >= 0.0 {
            return Err(Error::NonNegativeMean { mean: model.moments.mean });
        }
        Ok(Self { mode: DriftMode::Negative, ..model })
    }

    /// Model with any finite mean, for positive-drift scenarios and base laws.
    pub fn unchecked(family: Family) -> Result<Self> {
        family.validate()?;
        let lattice = match family {
            Family::LatticePolyTail { q, r } => Some(Arc::new(LatticeLaw::new(q, r))),
            _ => None,
        };
        let kernel = match family {
            Family::ParetoShift { alpha, xm, b } => Kernel::Pareto { xm, neg_inv_alpha: -1.0 / alpha, b },
            Family::WeibullShift { shape, scale, b } => Kernel::Weibull { scale, inv_shape: 1.0 / shape, b },
            Family::LognormalShift { mu_log, sigma_log, b } => Kernel::Lognormal { mu: mu_log, sigma: sigma_log, b },
            Family::ExponentialShift { rate, b } => Kernel::Exponential { inv_rate: 1.0 / rate, b },
            Family::LatticePolyTail { .. } => Kernel::Lattice,
        };
        let mut model = Self {
            family,
            mode: DriftMode::Unchecked,
            moments: MomentSummary { mean: 0.0, m_abs: 0.0, m_plus: 0.0, m_minus: 0.0 },
            kernel,
            lattice,
        };
        model.moments = model.closed_form_moments();
        if !(model.moments.mean.is_finite() && model.moments.m_plus.is_finite() && model.moments.m_minus.is_finite()) {
            return Err(Error::InfiniteMean(format!("{family:?}")));
        }
        Ok(model)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn mode(&self) -> DriftMode {
        self.mode
    }

    pub fn moments(&self) -> MomentSummary {
        self.moments
    }

    /// Drift magnitude `m = −E ξ`.
    pub fn drift(&self) -> f64 {
        self.moments.m_abs
    }

    pub fn is_lattice(&self) -> bool {
        self.lattice.is_some()
    }

    pub(crate) fn lattice_law(&self) -> Option<&LatticeLaw> {
        self.lattice.as_deref()
    }

    /// The unshifted nonnegative law (`b = 0`); lattice models return themselves.
    pub fn base_model(&self) -> IncrementModel {
        let family = match self.family {
            Family::ParetoShift { alpha, xm, .. } => Family::ParetoShift { alpha, xm, b: 0.0 },
            Family::WeibullShift { shape, scale, .. } => Family::WeibullShift { shape, scale, b: 0.0 },
            Family::LognormalShift { mu_log, sigma_log, .. } => Family::LognormalShift { mu_log, sigma_log, b: 0.0 },
            Family::ExponentialShift { rate, .. } => Family::ExponentialShift { rate, b: 0.0 },
            lattice @ Family::LatticePolyTail { .. } => lattice,
        };
        IncrementModel::unchecked(family).expect("base law of a valid model is valid")
    }

    /// Infimum of the support of `ξ`.
    pub fn support_min(&self) -> f64 {
        match self.family {
            Family::ParetoShift { xm, b, .. } => xm - b,
            Family::WeibullShift { b, .. } | Family::LognormalShift { b, .. } | Family::ExponentialShift { b, .. } => -b,
            Family::LatticePolyTail { .. } => -1.0,
        }
    }

    /// `F̄(x) = P(ξ > x)`.
    pub fn tail(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 0.0;
        }
        match self.family {
            Family::ParetoShift { alpha, xm, b } => {
                let y = x + b;
                if y <= xm {
                    1.0
                } else {
                    (y / xm).powf(-alpha)
                }
            }
            Family::WeibullShift { shape, scale, b } => {
                let y = x + b;
                if y <= 0.0 {
                    1.0
                } else {
                    (-(y / scale).powf(shape)).exp()
                }
            }
            Family::LognormalShift { mu_log, sigma_log, b } => {
                let y = x + b;
                if y <= 0.0 {
                    1.0
                } else {
                    normal_sf((y.ln() - mu_log) / sigma_log)
                }
            }
            Family::ExponentialShift { rate, b } => {
                let y = x + b;
                if y <= 0.0 {
                    1.0
                } else {
                    (-rate * y).exp()
                }
            }
            Family::LatticePolyTail { q, .. } => {
                if x < -1.0 {
                    1.0
                } else if x < 0.0 {
                    1.0 - q
                } else {
                    let law = self.lattice.as_ref().unwrap();
                    law.at_least(x.floor() as u64 + 1)
                }
            }
        }
    }

    /// `F(x) = P(ξ ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.family {
            Family::LatticePolyTail { q, .. } if x < 0.0 => {
                if x < -1.0 {
                    0.0
                } else {
                    q
                }
            }
            Family::ParetoShift { alpha, xm, b } if x + b > xm => -(-alpha * ((x + b) / xm).ln()).exp_m1(),
            Family::ExponentialShift { rate, b } if x + b > 0.0 => -(-rate * (x + b)).exp_m1(),
            _ => 1.0 - self.tail(x),
        }
    }

    /// Smallest `x` with `F̄(x) ≤ v`, for `v ∈ (0, 1]`.
    pub fn tail_quantile(&self, v: f64) -> f64 {
        match self.kernel {
            Kernel::Pareto { xm, neg_inv_alpha, b } => xm * v.powf(neg_inv_alpha) - b,
            Kernel::Weibull { scale, inv_shape, b } => scale * (-v.ln()).powf(inv_shape) - b,
            Kernel::Lognormal { mu, sigma, b } => {
                if v >= 1.0 {
                    -b
                } else {
                    (mu + sigma * normal_isf(v)).exp() - b
                }
            }
            Kernel::Exponential { inv_rate, b } => -v.ln() * inv_rate - b,
            Kernel::Lattice => self.lattice.as_ref().unwrap().sample_from_uniform(1.0 - v),
        }
    }

    /// Inverse CDF at `u ∈ [0, 1)`; `u = 0` maps to the support infimum.
    #[inline]
    pub fn sample_from_uniform(&self, u: f64) -> f64 {
        match self.kernel {
            Kernel::Lattice => self.lattice.as_ref().unwrap().sample_from_uniform(u),
            _ => self.tail_quantile(1.0 - u),
        }
    }

    /// One draw of `ξ`, advancing only the walk stream of `rng`.
    #[inline]
    pub fn sample(&self, rng: &mut RngState) -> f64 {
        let u = rng.uniform();
        match self.kernel {
            Kernel::Pareto { xm, neg_inv_alpha, b } => xm * (1.0 - u).powf(neg_inv_alpha) - b,
            _ => self.sample_from_uniform(u),
        }
    }

    /// `F̄ˢ(x) = min(1, ∫_x^∞ F̄(t) dt)`.
    pub fn second_tail(&self, x: f64) -> f64 {
        self.integrated_tail(x).min(1.0)
    }

    /// `∫_x^∞ F̄(t) dt` without the clamp at 1.
    pub fn integrated_tail(&self, x: f64) -> f64 {
        match self.family {
            Family::ParetoShift { alpha, xm, b } => {
                let y = x + b;
                if y >= xm {
                    xm * (xm / y).powf(alpha - 1.0) / (alpha - 1.0)
                } else {
                    (xm - y) + xm / (alpha - 1.0)
                }
            }
            Family::ExponentialShift { rate, b } => {
                let y = x + b;
                if y >= 0.0 {
                    (-rate * y).exp() / rate
                } else {
                    -y + 1.0 / rate
                }
            }
            Family::WeibullShift { b, .. } | Family::LognormalShift { b, .. } => {
                let y = x + b;
                let base_mean = self.moments.mean + b;
                if y <= 0.0 {
                    -y + base_mean
                } else {
                    self.base_excess_by_quadrature(y)
                }
            }
            Family::LatticePolyTail { q, .. } => {
                let law = self.lattice.as_ref().unwrap();
                if x >= 0.0 {
                    let n = x.floor();
                    (n + 1.0 - x) * law.at_least(n as u64 + 1) + law.summed_tail(n as u64 + 1)
                } else {
                    let at_zero = law.summed_tail(0);
                    if x >= -1.0 {
                        at_zero - x * (1.0 - q)
                    } else {
                        at_zero + (1.0 - q) + (-1.0 - x)
                    }
                }
            }
        }
    }

    /// `∫_y^∞ P(X > u) du` for the base law of the Weibull/lognormal families,
    /// `y > 0`, by blockwise adaptive quadrature with the analytic bound
    /// `∫_t^∞ P(X > u) du ≤ E[X; X > t]` on the remainder.
    fn base_excess_by_quadrature(&self, y: f64) -> f64 {
        let tol = Tolerance::new(1e-300, 1e-12);
        match self.family {
            Family::LognormalShift { mu_log, sigma_log, .. } => {
                let sf = |u: f64| normal_sf((u.ln() - mu_log) / sigma_log);
                let mean = (mu_log + 0.5 * sigma_log * sigma_log).exp();
                let rest = |t: f64| mean * normal_sf((t.ln() - mu_log - sigma_log * sigma_log) / sigma_log);
                let scale = 0.25 * y.max(mu_log.exp()) * sigma_log.min(1.0);
                integrate_tail(sf, y, scale, rest, tol).value
            }
            Family::WeibullShift { shape, scale, .. } => {
                let sf = |u: f64| (-(u / scale).powf(shape)).exp();
                let rest = |t: f64| scale * gamma_ui(1.0 + 1.0 / shape, (t / scale).powf(shape));
                // local decay length of the tail at y
                let decay = scale / shape * (y / scale).powf(1.0 - shape);
                integrate_tail(sf, y, decay.min(y.max(scale)), rest, tol).value
            }
            _ => unreachable!("quadrature excess only used for weibull and lognormal"),
        }
    }

    fn closed_form_moments(&self) -> MomentSummary {
        let (m_plus, m_minus) = match self.family {
            Family::ParetoShift { alpha, xm, b } => {
                let plus = if b >= xm {
                    xm * (xm / b).powf(alpha - 1.0) / (alpha - 1.0)
                } else {
                    (xm - b) + xm / (alpha - 1.0)
                };
                let minus = if b <= xm {
                    0.0
                } else {
                    (b - xm) - xm * (1.0 - (xm / b).powf(alpha - 1.0)) / (alpha - 1.0)
                };
                (plus, minus)
            }
            Family::ExponentialShift { rate, b } => ((-rate * b).exp() / rate, b + (-rate * b).exp_m1() / rate),
            Family::WeibullShift { shape, scale, b } => {
                let a = 1.0 / shape;
                let z = (b / scale).powf(shape);
                let g = gamma(a);
                // statrs rejects z = 0, where the regularized upper part is 1
                let upper = if z > 0.0 { gamma_ur(a, z) } else { 1.0 };
                let lower = if z > 0.0 { gamma_lr(a, z) } else { 0.0 };
                let plus = scale * a * g * upper;
                let minus = b - scale * a * g * lower;
                (plus, minus)
            }
            Family::LognormalShift { mu_log, sigma_log, b } => {
                let mean = (mu_log + 0.5 * sigma_log * sigma_log).exp();
                if b == 0.0 {
                    (mean, 0.0)
                } else {
                    let d = (b.ln() - mu_log) / sigma_log;
                    let plus = mean * normal_sf(d - sigma_log) - b * normal_sf(d);
                    let minus = b * normal_sf(-d) - mean * normal_sf(sigma_log - d);
                    (plus, minus)
                }
            }
            Family::LatticePolyTail { q, .. } => (self.lattice.as_ref().unwrap().m_plus(), q),
        };
        let mean = m_plus - m_minus;
        MomentSummary { mean, m_abs: -mean, m_plus, m_minus }
    }

    /// Exponent `γ` in `h(x) = min(x/2, x^γ)`.
    pub fn insensitivity_exponent(&self) -> f64 {
        match self.family {
            Family::WeibullShift { shape, .. } if shape < 1.0 => 0.5 * (1.0 - shape),
            _ => 0.5,
        }
    }

    /// Insensitivity function `h(x) = min(x/2, x^γ)`.
    ///
    /// Nondecreasing with slope at most 1/2 wherever `x^γ` is the active
    /// branch, so `h(x + t) ≤ h(x) + t` holds for all `x ≥ 1`.
    pub fn insensitivity_h(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::NegativeArgument(x));
        }
        Ok((0.5 * x).min(x.powf(self.insensitivity_exponent())))
    }

    /// Infallible variant for `x ≥ 0` inside estimator loops.
    pub(crate) fn h(&self, x: f64) -> f64 {
        (0.5 * x.max(0.0)).min(x.max(0.0).powf(self.insensitivity_exponent()))
    }
}

// Free-function spellings of the model operations.

pub fn tail(model: &IncrementModel, x: f64) -> f64 {
    model.tail(x)
}

pub fn sample(model: &IncrementModel, rng: &mut RngState) -> f64 {
    model.sample(rng)
}

pub fn moments(model: &IncrementModel) -> MomentSummary {
    model.moments()
}

pub fn second_tail(model: &IncrementModel, x: f64) -> f64 {
    model.second_tail(x)
}

pub fn insensitivity_h(model: &IncrementModel, x: f64) -> Result<f64> {
    model.insensitivity_h(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn pareto() -> IncrementModel {
        IncrementModel::new(Family::pareto(2.5, 1.0, 3.0)).unwrap()
    }

    fn all_models() -> Vec<IncrementModel> {
        vec![
            pareto(),
            IncrementModel::new(Family::weibull(0.5, 1.0, 3.0)).unwrap(),
            IncrementModel::new(Family::lognormal(0.0, 1.0, 2.5)).unwrap(),
            IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap(),
            IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap(),
        ]
    }

    #[test]
    fn pareto_tail_values() {
        let m = pareto();
        assert_eq!(m.tail(-2.0), 1.0);
        assert!((m.tail(7.0) - 10f64.powf(-2.5)).abs() < 1e-17);
        assert!((m.tail(7.0) - 3.16228e-3).abs() < 1e-8);
    }

    #[test]
    fn exponential_tail_value() {
        let m = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
        assert!((m.tail(0.0) - (-2.0f64).exp()).abs() < 1e-16);
        assert!((m.tail(0.0) - 0.135335).abs() < 1e-6);
    }

    #[test]
    fn lognormal_tail_reference_value() {
        let m = IncrementModel::unchecked(Family::lognormal(0.5, 0.8, 1.0)).unwrap();
        // P(ln X > ln 3) with ln X ~ N(0.5, 0.8²), 30-digit reference value
        let want = 0.227_150_056_838_778_05;
        assert!((m.tail(2.0) / want - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lattice_tail_matches_direct_sum() {
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        let norm: f64 = (2..2_000_000u64).map(|j| (j as f64).powi(-3)).sum::<f64>() + 0.5 / 2e6f64.powi(2);
        let direct = |x: u64| 0.3 * ((x + 3)..2_000_000u64).map(|j| (j as f64).powi(-3)).sum::<f64>() / norm;
        for x in [0u64, 1, 5, 50] {
            let want = direct(x) + 0.3 * 0.5 / 2e6f64.powi(2) / norm;
            assert!((m.tail(x as f64) / want - 1.0).abs() < 1e-9, "x={x}");
            assert_eq!(m.tail(x as f64 + 0.5), m.tail(x as f64));
        }
        assert!((m.tail(-0.5) - 0.3).abs() < 1e-15);
        assert_eq!(m.tail(-1.5), 1.0);
    }

    #[test]
    fn pareto_moments() {
        let mo = pareto().moments();
        assert!((mo.mean + 4.0 / 3.0).abs() < 1e-14);
        // ∫_0^2 (1 − (3 − y)^{-2.5}) dy = 2 − (1 − 3^{-1.5})/1.5
        assert!((mo.m_minus - 1.461_633_393_153_250_2).abs() < 1e-12, "{}", mo.m_minus);
        assert!((mo.m_plus - 0.128_300_059_819_916_84).abs() < 1e-14);
    }

    #[test]
    fn m_minus_by_quadrature_oracle() {
        let m = pareto();
        let q = integrate(|y| m.cdf(-y), 0.0, 2.0, &[], Tolerance::new(1e-12, 1e-12)).value;
        assert!((q - m.moments().m_minus).abs() < 1e-10);
    }

    #[test]
    fn lattice_mean_by_series_oracle() {
        // −q + (1−q) Σ_{j≥2} (j−2) j^{-3} / (ζ(3) − 1), summed directly
        let n = 20_000_000u64;
        let (mut s2, mut s3) = (0.0, 0.0);
        for j in (2..n).rev() {
            let jf = j as f64;
            s2 += 1.0 / (jf * jf);
            s3 += 1.0 / (jf * jf * jf);
        }
        let end = n as f64;
        s2 += 1.0 / end + 0.5 / (end * end);
        s3 += 0.5 / (end * end);
        let want = -0.7 + 0.3 * (s2 - 2.0 * s3) / s3;
        let mean = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap().moments().mean;
        assert!((mean - want).abs() < 1e-10, "{mean} vs {want}");
        assert!((mean + 0.3425).abs() < 2e-4);
    }

    #[test]
    fn moment_identity_by_tail_quadrature() {
        for m in all_models() {
            let mo = m.moments();
            let tol = Tolerance::new(1e-12, 1e-12);
            let (plus, minus) = if m.is_lattice() {
                let law = m.lattice_law().unwrap();
                let plus: f64 = (1..).take(200_000).map(|j| law.at_least(j)).sum::<f64>() + law.summed_tail(200_000);
                (plus, m.cdf(-0.5))
            } else {
                let lo = m.support_min();
                let brk = [lo.abs(), 1.0, 10.0];
                let plus = integrate(|x| m.tail(x), 0.0, 50.0, &brk, tol).value + m.integrated_tail(50.0);
                let minus = integrate(|y| m.cdf(-y), 0.0, (-lo).max(0.0), &brk, tol).value;
                (plus, minus)
            };
            assert!((plus - minus - mo.mean).abs() < 1e-8, "{:?}: {} vs {}", m.family(), plus - minus, mo.mean);
            assert!((plus - mo.m_plus).abs() < 1e-8, "{:?}", m.family());
        }
    }

    #[test]
    fn second_tail_values() {
        let m = pareto();
        assert!((m.second_tail(7.0) - 10f64.powf(-1.5) / 1.5).abs() < 1e-15);
        assert!((m.second_tail(7.0) - 0.0210819).abs() < 1e-7);
        for model in all_models() {
            assert_eq!(model.second_tail(-1e9), 1.0);
        }
        let e = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
        assert!((e.second_tail(0.0) - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn second_tail_quadrature_families_agree_with_direct_integral() {
        let tol = Tolerance::new(1e-15, 1e-12);
        for m in [
            IncrementModel::new(Family::weibull(0.5, 1.0, 3.0)).unwrap(),
            IncrementModel::new(Family::lognormal(0.0, 1.0, 2.5)).unwrap(),
        ] {
            for x in [0.5, 5.0, 40.0] {
                let direct = integrate(|t| m.tail(t), x, x + 4000.0, &[x + 10.0, x + 100.0, x + 1000.0], tol).value;
                let got = m.integrated_tail(x);
                assert!((got / direct - 1.0).abs() < 1e-8, "{:?} x={x}: {got} vs {direct}", m.family());
            }
        }
    }

    #[test]
    fn lattice_second_tail_is_piecewise_linear_integral() {
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        for x in [-2.0f64, -0.5, 0.0, 0.25, 3.7, 20.0] {
            let k0 = x.floor() as i64;
            let mut acc = (k0 as f64 + 1.0 - x) * m.tail(x);
            for j in (k0 + 1)..200_000 {
                acc += m.tail(j as f64);
            }
            acc += m.lattice_law().unwrap().summed_tail(200_000);
            assert!((m.integrated_tail(x) - acc).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn insensitivity_values() {
        let m = pareto();
        assert_eq!(m.insensitivity_h(1.0).unwrap(), 0.5);
        assert_eq!(m.insensitivity_h(10_000.0).unwrap(), 100.0);
        assert!(matches!(m.insensitivity_h(-1.0), Err(Error::NegativeArgument(_))));
        let x = 1e6;
        let h = m.insensitivity_h(x).unwrap();
        let ratio = m.tail(x - h) / m.tail(x);
        assert!(ratio > 1.0 && ratio - 1.0 < 0.003, "{ratio}");
    }

    #[test]
    fn constructors_reject_bad_parameters() {
        assert!(matches!(IncrementModel::new(Family::pareto(1.0, 1.0, 3.0)), Err(Error::InfiniteMean(_))));
        assert!(matches!(IncrementModel::new(Family::lattice(0.7, 2.0)), Err(Error::InfiniteMean(_))));
        assert!(matches!(IncrementModel::new(Family::pareto(2.5, 1.0, 1.0)), Err(Error::NonNegativeMean { .. })));
        assert!(IncrementModel::unchecked(Family::pareto(2.5, 1.0, 1.0)).is_ok());
        assert!(matches!(IncrementModel::new(Family::exponential(-1.0, 2.0)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sampler_boundary_and_determinism() {
        let m = pareto();
        assert_eq!(m.sample_from_uniform(0.0), -2.0);
        for model in all_models() {
            let a = model.sample(&mut RngState::from_seed(42));
            let b = model.sample(&mut RngState::from_seed(42));
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn pareto_sample_mean_within_four_standard_errors() {
        let m = pareto();
        let mut rng = RngState::from_seed(7);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = m.sample(&mut rng);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean + 4.0 / 3.0).abs() < 4.0 * se, "{mean} ± {se}");
    }

    #[test]
    fn kolmogorov_smirnov_against_analytic_cdf() {
        let n = 100_000;
        for m in all_models() {
            let mut rng = RngState::for_replication(11, 3, 0);
            let mut xs: Vec<f64> = (0..n).map(|_| m.sample(&mut rng)).collect();
            xs.sort_by(f64::total_cmp);
            let mut d: f64 = 0.0;
            let mut i = 0;
            while i < n {
                let mut j = i;
                while j < n && xs[j] == xs[i] {
                    j += 1;
                }
                let f = m.cdf(xs[i]);
                // ECDF just below and at the atom
                d = d.max((f - j as f64 / n as f64).abs());
                let below = 1.0 - m.tail(xs[i] - 1e-9 * xs[i].abs().max(1.0));
                d = d.max((below - i as f64 / n as f64).abs());
                i = j;
            }
            assert!(d < 1.63 / (n as f64).sqrt(), "{:?}: D = {d}", m.family());
        }
    }

    #[test]
    fn lattice_sampler_reaches_beyond_table() {
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        let law = m.lattice_law().unwrap();
        // uniform deep in the tail: result k satisfies P(ξ ≥ k+1) < 1-u ≤ P(ξ ≥ k)
        let u = 1.0 - 1e-9;
        let k = m.sample_from_uniform(u) as u64;
        assert!(k > LATTICE_TABLE as u64);
        assert!(law.at_least(k + 1) < 1e-9 && law.at_least(k) >= 1e-9 * (1.0 - 1e-12));
        assert_eq!(IncrementModel::new(Family::lattice(1.0, 3.0)).unwrap().sample_from_uniform(0.999), -1.0);
    }

    #[test]
    fn tail_quantile_inverts_tail() {
        for m in all_models().into_iter().filter(|m| !m.is_lattice()) {
            for v in [0.9, 0.1, 1e-4, 1e-8] {
                let x = m.tail_quantile(v);
                if x > m.support_min() {
                    assert!((m.tail(x) / v - 1.0).abs() < 1e-9, "{:?} v={v}", m.family());
                }
            }
        }
    }

    #[test]
    fn family_json_schema() {
        let f: Family = serde_json::from_str(r#"{"family": "pareto_shift", "alpha": 2.5, "xm": 1.0, "b": 3.0}"#).unwrap();
        assert_eq!(f, Family::pareto(2.5, 1.0, 3.0));
        let l: Family = serde_json::from_str(r#"{"family": "lattice_poly_tail", "q": 0.7, "r": 3}"#).unwrap();
        assert_eq!(l, Family::lattice(0.7, 3.0));
        let back = serde_json::to_value(Family::exponential(1.0, 2.0)).unwrap();
        assert_eq!(back["family"], "exponential_shift");
    }

    #[test]
    fn second_tail_dominates_tail_for_long_tails() {
        let mut x = 8.0;
        let m = pareto();
        let e = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
        let mut prev = 0.0;
        for _ in 0..10 {
            let r = m.second_tail(x) / m.tail(x);
            assert!(r > prev);
            prev = r;
            if x < 500.0 {
                assert!((e.second_tail(x) / e.tail(x) - 1.0).abs() < 1e-9);
            }
            x *= 2.0;
        }
        assert!(prev > 1000.0);
    }
}
