//! Numerical membership checks for the long-tailed, subexponential and 𝒮*
//! classes, evaluated on a finite grid of `x` values.

use serde::{Deserialize, Serialize};

use crate::distributions::IncrementModel;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Shift used by the long-tail check inside [`classify_tail`].
pub const LT_SHIFT: f64 = 1.0;

const RATIO_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-11, max_intervals: 4000 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailProperty {
    #[serde(alias = "LT")]
    Lt,
    Subexponential,
    #[serde(alias = "SStar")]
    Sstar,
}

impl TailProperty {
    pub fn target(self) -> f64 {
        match self {
            TailProperty::Subexponential => 2.0,
            TailProperty::Lt | TailProperty::Sstar => 1.0,
        }
    }
}

impl std::str::FromStr for TailProperty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lt" => Ok(TailProperty::Lt),
            "subexp" | "subexponential" => Ok(TailProperty::Subexponential),
            "sstar" | "s*" => Ok(TailProperty::Sstar),
            other => Err(Error::InvalidParameter(format!("unknown tail property {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    ConvergingToTarget,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailVerdict {
    pub property: TailProperty,
    pub grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub target: f64,
    pub tol: f64,
    pub trend: Trend,
}

/// Endpoint rule shared by every finite-grid asymptotic check.
///
/// With `d_i = |ratio_i − target|`: converging when the last distance is
/// below `tol` and either smaller than the first or exactly zero; diverging
/// when the last distance is at least `tol` and no smaller than the first.
pub fn trend_of(ratios: &[f64], target: f64, tol: f64) -> Trend {
    let (Some(first), Some(last)) = (ratios.first(), ratios.last()) else {
        return Trend::Inconclusive;
    };
    let d_first = (first - target).abs();
    let d_last = (last - target).abs();
    if !d_last.is_finite() {
        return Trend::Diverging;
    }
    if d_last < tol && (d_last < d_first || d_last == 0.0) {
        Trend::ConvergingToTarget
    } else if d_last >= tol && d_last >= d_first {
        Trend::Diverging
    } else {
        Trend::Inconclusive
    }
}

/// `F̄(x − h) / F̄(x)`.
pub fn long_tail_ratio(model: &IncrementModel, x: f64, h: f64) -> f64 {
    model.tail(x - h) / model.tail(x)
}

/// `F̄(n)` for integers `0..=top` of a lattice model, built by summing point
/// masses downward from one Hurwitz evaluation.
fn lattice_tail_table(model: &IncrementModel, top: u64) -> Vec<f64> {
    let law = model.lattice_law().expect("lattice model");
    let mut table = vec![0.0; top as usize + 1];
    let mut acc = law.at_least(top + 1);
    for n in (0..=top).rev() {
        table[n as usize] = acc;
        acc += law.up_prob(n);
    }
    table
}

fn sstar_breaks(model: &IncrementModel, x: f64) -> Vec<f64> {
    let s = model.support_min();
    vec![model.h(x), s, x - s]
}

/// `∫_a^b F̄(x − y) F̄(y) dy` for a continuous model.
fn self_convolution(model: &IncrementModel, x: f64, a: f64, b: f64) -> f64 {
    let mut breaks = sstar_breaks(model, x);
    breaks.push(0.5 * x);
    integrate(|y| model.tail(x - y) * model.tail(y), a, b, &breaks, RATIO_TOL).value
}

/// `∫_0^x F̄(x − y) F̄(y) dy`.
pub fn sstar_integral(model: &IncrementModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonpositiveX(x));
    }
    if model.is_lattice() {
        // F̄ is constant on [n, n+1); with X = ⌊x⌋ and f = x − X the integral
        // splits into pieces of length f and 1 − f per unit interval.
        let big_x = x.floor() as u64;
        let f = x - big_x as f64;
        let t = lattice_tail_table(model, big_x);
        let mut full = 0.0;
        let mut short = 0.0;
        for j in 0..=big_x as usize {
            full += t[j] * t[big_x as usize - j];
            if j < big_x as usize {
                short += t[j] * t[big_x as usize - 1 - j];
            }
        }
        return Ok(f * full + (1.0 - f) * short);
    }
    Ok(2.0 * self_convolution(model, x, 0.0, 0.5 * x))
}

/// 𝒮* ratio `∫_0^x F̄(x − y) F̄(y) dy / (2 m_{F⁺} F̄(x))`.
///
/// The integrand is symmetric about `x/2`, so only `[0, x/2]` is integrated,
/// split at `h(x)` where the endpoint mass concentrates.
pub fn sstar_ratio(model: &IncrementModel, x: f64) -> Result<f64> {
    let num = sstar_integral(model, x)?;
    Ok(num / (2.0 * model.moments().m_plus * model.tail(x)))
}

/// Contribution of `[0, h(x)]` to [`sstar_ratio`]; tends to 1/2 for 𝒮* laws.
pub fn sstar_endpoint_ratio(model: &IncrementModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonpositiveX(x));
    }
    let h = model.h(x);
    let num = if model.is_lattice() {
        // integrate the piecewise-constant integrand by splitting at every kink
        let mut edges: Vec<f64> = (0..=h.floor() as u64).map(|k| k as f64).collect();
        edges.extend((0..=h.ceil() as u64).map(|k| x - x.floor() + k as f64 - 1.0));
        edges.retain(|&e| e > 0.0 && e < h);
        edges.push(0.0);
        edges.push(h);
        edges.sort_by(f64::total_cmp);
        edges
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (w[1] - w[0]) * model.tail(x - mid) * model.tail(mid)
            })
            .sum()
    } else {
        self_convolution(model, x, 0.0, h)
    };
    Ok(num / (2.0 * model.moments().m_plus * model.tail(x)))
}

/// `P(φ₁ + φ₂ > x) / Ḡ⁺(x)` where `φ_i` are i.i.d. copies of `ξ⁺`, whose law
/// has an atom of mass `F(0)` at zero.
///
/// Uses `P(φ₁+φ₂ > x) = Ḡ⁺(x)(1 + F(0)) + ∫_{(0,x]} Ḡ⁺(x − y) dG⁺(y)`, with the
/// Stieltjes integral rewritten through the tail quantile `y = Q̄(v)` as a
/// plain integral over `v ∈ (Ḡ⁺(x), Ḡ⁺(0))`, then over `s = −ln v`.
pub fn subexp_ratio(model: &IncrementModel, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::NonpositiveX(x));
    }
    Ok(subexp_two_sum_tail(model, x) / model.tail(x))
}

/// `P(φ₁ + φ₂ > x)` for `x > 0`.
pub fn subexp_two_sum_tail(model: &IncrementModel, x: f64) -> f64 {
    let g_x = model.tail(x);
    let g_0 = model.tail(0.0);
    if model.is_lattice() {
        let big_x = x.floor() as u64;
        let t = lattice_tail_table(model, big_x);
        let law = model.lattice_law().unwrap();
        let mut acc = g_x + (1.0 - g_0) * t[big_x as usize];
        for k in 1..=big_x {
            acc += law.up_prob(k) * t[(big_x - k) as usize];
        }
        return acc;
    }
    if g_x >= g_0 {
        return g_x * (1.0 + model.cdf(0.0));
    }
    let s_of = |y: f64| -model.tail(y).ln();
    let (s_lo, s_hi) = (-g_0.ln(), -g_x.ln());
    let h = model.h(x);
    let breaks: Vec<f64> = [h, 0.5 * x, x - h, x - 1.0]
        .iter()
        .filter(|&&y| y > 0.0 && y < x)
        .map(|&y| s_of(y))
        .collect();
    let integrand = |s: f64| {
        let v = (-s).exp();
        let y = model.tail_quantile(v);
        model.tail(x - y) * v
    };
    let inner = integrate(integrand, s_lo, s_hi, &breaks, RATIO_TOL).value;
    g_x * (1.0 + model.cdf(0.0)) + inner
}

/// Evaluates the ratio for `property` along `grid` and applies [`trend_of`].
pub fn classify_tail(model: &IncrementModel, property: TailProperty, grid: &[f64], tol: f64) -> Result<TailVerdict> {
    if grid.len() < 4 {
        return Err(Error::GridTooSmall { got: grid.len(), need: 4 });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] > 0.0) {
        return Err(Error::InvalidParameter("grid must be positive and strictly increasing".into()));
    }
    let ratios = grid
        .iter()
        .map(|&x| match property {
            TailProperty::Lt => Ok(long_tail_ratio(model, x, LT_SHIFT)),
            TailProperty::Subexponential => subexp_ratio(model, x),
            TailProperty::Sstar => sstar_ratio(model, x),
        })
        .collect::<Result<Vec<_>>>()?;
    let target = property.target();
    Ok(TailVerdict {
        property,
        grid: grid.to_vec(),
        trend: trend_of(&ratios, target, tol),
        ratios,
        target,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    fn pareto() -> IncrementModel {
        IncrementModel::new(Family::pareto(2.5, 1.0, 3.0)).unwrap()
    }

    fn exp_plus() -> IncrementModel {
        IncrementModel::unchecked(Family::exponential(1.0, 0.0)).unwrap()
    }

    #[test]
    fn exponential_sstar_is_half_x() {
        for x in [1.0, 10.0, 100.0] {
            let r = sstar_ratio(&exp_plus(), x).unwrap();
            assert!((r - 0.5 * x).abs() < 1e-8, "x={x} r={r}");
        }
        assert!(matches!(sstar_ratio(&exp_plus(), 0.0), Err(Error::NonpositiveX(_))));
    }

    #[test]
    fn sstar_near_zero_vanishes() {
        assert!(sstar_ratio(&pareto(), 1e-12).unwrap() < 1e-9);
    }

    #[test]
    fn sstar_symmetry() {
        let m = pareto();
        for x in [10.0, 1e3] {
            let full = integrate(|y| m.tail(x - y) * m.tail(y), 0.0, x, &[m.h(x), 0.5 * x, x - m.h(x)], RATIO_TOL).value;
            assert!((full / sstar_integral(&m, x).unwrap() - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn pareto_sstar_decreases_toward_one() {
        let m = pareto();
        let r: Vec<f64> = [1e2, 1e3, 1e4, 1e5].iter().map(|&x| sstar_ratio(&m, x).unwrap()).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]), "{r:?}");
        assert!(r[3] > 1.0 && r[3] < 1.01);
    }

    #[test]
    fn sstar_endpoint_mass_lower_bound() {
        let m = pareto();
        for x in [1e2, 1e4, 1e6] {
            let lo = sstar_endpoint_ratio(&m, x).unwrap();
            assert!(lo <= sstar_ratio(&m, x).unwrap());
        }
        let far = sstar_endpoint_ratio(&m, 1e8).unwrap();
        assert!((far - 0.5).abs() < 0.01, "{far}");
    }

    #[test]
    fn sstar_shift_invariance() {
        let base = IncrementModel::new(Family::pareto(2.5, 1.0, 8.0)).unwrap();
        let shifted = pareto();
        let d = (sstar_ratio(&shifted, 1e4 + 5.0).unwrap() - sstar_ratio(&base, 1e4).unwrap()).abs();
        assert!(d < 0.02, "{d}");
    }

    #[test]
    fn long_tail_values() {
        let m = pareto();
        assert_eq!(long_tail_ratio(&m, 50.0, 0.0), 1.0);
        assert!((long_tail_ratio(&m, 997.0, 10.0) - (1000.0f64 / 990.0).powf(2.5)).abs() < 1e-12);
        assert!((long_tail_ratio(&m, 997.0, 10.0) - 1.02545).abs() < 1e-5);
        let e = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
        for x in [0.0, 5.0, 50.0] {
            assert!((long_tail_ratio(&e, x, 1.0) - std::f64::consts::E).abs() < 1e-12);
        }
    }

    #[test]
    fn long_tail_nonincreasing_for_lt_families() {
        let models = [
            pareto(),
            IncrementModel::new(Family::weibull(0.5, 1.0, 3.0)).unwrap(),
            IncrementModel::new(Family::lognormal(0.0, 1.0, 2.5)).unwrap(),
        ];
        for m in &models {
            let r: Vec<f64> = (0..12).map(|i| long_tail_ratio(m, 4f64 * 2f64.powi(i), 2.0)).collect();
            assert!(r.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}: {r:?}", m.family());
            assert!(r[11] - 1.0 < 0.05);
        }
    }

    #[test]
    fn exponential_two_sum_closed_form() {
        for x in [0.5, 3.0, 20.0] {
            let r = subexp_ratio(&exp_plus(), x).unwrap();
            assert!((r - (1.0 + x)).abs() < 1e-8 * (1.0 + x), "x={x} r={r}");
        }
    }

    #[test]
    fn two_sum_below_support_is_one() {
        let m = IncrementModel::unchecked(Family::pareto(2.5, 1.0, 0.0)).unwrap();
        assert!((subexp_ratio(&m, 0.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_two_sum_by_brute_convolution() {
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        let law = m.lattice_law().unwrap();
        let pmf = |k: u64| if k == 0 { m.cdf(0.0) } else { law.up_prob(k) };
        for x in [0.0f64, 3.0, 17.5] {
            let xi = x.floor() as u64;
            // P(φ₁ + φ₂ ≤ x) by explicit double sum
            let mut below = 0.0;
            for a in 0..=xi {
                for b in 0..=(xi - a) {
                    below += pmf(a) * pmf(b);
                }
            }
            let want = 1.0 - below;
            if x > 0.0 {
                assert!((subexp_two_sum_tail(&m, x) / want - 1.0).abs() < 1e-10, "x={x}");
            }
        }
    }

    #[test]
    fn lattice_sstar_integral_matches_midpoint_sum() {
        let m = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
        for x in [1.0, 7.3, 40.0] {
            let n = 200_000;
            let dy = x / n as f64;
            let direct: f64 = (0..n).map(|i| {
                let y = (i as f64 + 0.5) * dy;
                m.tail(x - y) * m.tail(y) * dy
            }).sum();
            assert!((sstar_integral(&m, x).unwrap() / direct - 1.0).abs() < 1e-3, "x={x}");
        }
    }

    #[test]
    fn classifier_verdicts() {
        let grid = [1e2, 1e3, 1e4, 1e5];
        let v = classify_tail(&pareto(), TailProperty::Sstar, &grid, 0.15).unwrap();
        assert_eq!(v.trend, Trend::ConvergingToTarget);
        let e = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
        let v = classify_tail(&e, TailProperty::Sstar, &grid, 0.15).unwrap();
        assert_eq!(v.trend, Trend::Diverging);
        let v = classify_tail(&pareto(), TailProperty::Lt, &grid, 0.05).unwrap();
        assert_eq!(v.trend, Trend::ConvergingToTarget);
        assert!(matches!(
            classify_tail(&pareto(), TailProperty::Sstar, &grid[..3], 0.1),
            Err(Error::GridTooSmall { got: 3, need: 4 })
        ));
    }

    #[test]
    fn trend_rule_edge_cases() {
        assert_eq!(trend_of(&[1.0, 1.0, 1.0, 1.0], 1.0, 1e-300), Trend::ConvergingToTarget);
        assert_eq!(trend_of(&[1.5, 1.4, 1.3, 1.2], 1.0, 0.1), Trend::Inconclusive);
        assert_eq!(trend_of(&[1.0, 2.0, 3.0, f64::INFINITY], 1.0, 0.1), Trend::Diverging);
    }

    #[test]
    fn property_parsing() {
        assert_eq!("sstar".parse::<TailProperty>().unwrap(), TailProperty::Sstar);
        assert_eq!("subexp".parse::<TailProperty>().unwrap(), TailProperty::Subexponential);
        assert!("nope".parse::<TailProperty>().is_err());
    }
}
