//! Walks with positive drift stopped at short independent times, and the
//! precondition check that rejects heavy stopping times.

use heavytail::estimators::{positive_drift_ratio, McOptions};
use heavytail::walk_engine::StoppingRule;
use heavytail::{Error, Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let model = IncrementModel::unchecked(Family::pareto(2.5, 1.0, 7.0 / 6.0))?;
    println!("mean {:+.3}", model.moments().mean);
    let grid: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&v| model.tail_quantile(v)).collect();
    for rule in [StoppingRule::FixedN { n: 3 }, StoppingRule::IndependentGeometric { q: 0.9 }] {
        let r = positive_drift_ratio(&model, &rule, &grid, &McOptions::new(2_000_000, 6))?;
        println!("{}: target {:.3}, ratios {:?}, pcond {:?}", rule.label(), r.curve.target, r.curve.point, r.pcond);
    }
    match positive_drift_ratio(&model, &StoppingRule::IndependentPareto { a: 0.5 }, &grid, &McOptions::new(1000, 6)) {
        Err(Error::PcondViolated { x, ratio, limit }) => println!("independent_pareto(0.5) rejected at x = {x:.2}: {ratio:.3e} > {limit}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
