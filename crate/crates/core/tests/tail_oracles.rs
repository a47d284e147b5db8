//! Tail-class ratios against reference values computed once with 30-digit
//! adaptive quadrature (mpmath) and confirmed by a log-graded trapezoid rule
//! with 10⁶ panels.

use heavytail::tail_analysis::{classify_tail, sstar_ratio, subexp_ratio, TailProperty, Trend};
use heavytail::{Family, IncrementModel};

const SSTAR_PARETO: [(f64, f64); 4] = [
    (1e2, 1.118_376_053_373_679),
    (1e3, 1.014_644_807_376_478),
    (1e4, 1.001_496_404_854_691_6),
    (1e5, 1.000_149_964_004_859_5),
];

const TWO_SUM_PARETO: [(f64, f64); 4] = [
    (20.0, 2.517_642_878_295_696),
    (40.0, 2.234_639_709_092_202_6),
    (80.0, 2.110_873_688_768_745_7),
    (160.0, 2.053_776_249_859_244_3),
];

#[test]
fn sstar_ratio_matches_reference_quadrature() {
    let m = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0)).unwrap();
    for (x, want) in SSTAR_PARETO {
        let got = sstar_ratio(&m, x).unwrap();
        assert!((got - want).abs() < 1e-9, "x={x}: {got} vs {want}");
    }
}

#[test]
fn two_sum_ratio_matches_reference_convolution() {
    let m = IncrementModel::unchecked(Family::pareto(2.5, 1.0, 0.0)).unwrap();
    for (x, want) in TWO_SUM_PARETO {
        let got = subexp_ratio(&m, x).unwrap();
        assert!((got - want).abs() < 1e-8, "x={x}: {got} vs {want}");
    }
}

#[test]
fn subexponential_verdicts() {
    let grid = [20.0, 40.0, 80.0, 160.0, 320.0, 640.0];
    let pareto = IncrementModel::unchecked(Family::pareto(2.5, 1.0, 0.0)).unwrap();
    let v = classify_tail(&pareto, TailProperty::Subexponential, &grid, 0.05).unwrap();
    assert_eq!(v.trend, Trend::ConvergingToTarget, "{:?}", v.ratios);
    assert!(v.ratios.windows(2).all(|w| w[1] < w[0]));

    let weibull = IncrementModel::unchecked(Family::weibull(0.5, 1.0, 0.0)).unwrap();
    let v = classify_tail(&weibull, TailProperty::Subexponential, &[1e2, 1e3, 1e4, 1e5], 0.1).unwrap();
    assert_eq!(v.trend, Trend::ConvergingToTarget, "{:?}", v.ratios);

    let exp = IncrementModel::unchecked(Family::exponential(1.0, 0.0)).unwrap();
    let v = classify_tail(&exp, TailProperty::Subexponential, &grid, 0.05).unwrap();
    assert_eq!(v.trend, Trend::Diverging);
}

#[test]
fn sstar_verdicts_across_families() {
    let grid = [1e2, 1e3, 1e4, 1e5];
    let lognormal = IncrementModel::new(Family::lognormal(0.0, 1.0, 2.5)).unwrap();
    let v = classify_tail(&lognormal, TailProperty::Sstar, &grid, 0.15).unwrap();
    assert_eq!(v.trend, Trend::ConvergingToTarget, "{:?}", v.ratios);
    let lattice = IncrementModel::new(Family::lattice(0.7, 3.0)).unwrap();
    let v = classify_tail(&lattice, TailProperty::Sstar, &grid, 0.15).unwrap();
    assert_eq!(v.trend, Trend::ConvergingToTarget, "{:?}", v.ratios);
    let exp = IncrementModel::new(Family::exponential(1.0, 2.0)).unwrap();
    let v = classify_tail(&exp, TailProperty::Lt, &grid, 0.15).unwrap();
    assert_eq!(v.trend, Trend::Diverging);
}
