//! P(M_σ > x) / F̄(x) for a few stopping rules, against E σ.

use heavytail::estimators::{estimate_tail_ratio, McOptions, Statistic};
use heavytail::walk_engine::StoppingRule;
use heavytail::{Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let model = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0))?;
    let grid: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&v| model.tail_quantile(v)).collect();
    let opts = McOptions::new(2_000_000, 1);
    let rules = [
        StoppingRule::FixedN { n: 2 },
        StoppingRule::Tau,
        StoppingRule::IndependentGeometric { q: 0.25 },
        StoppingRule::min_of(StoppingRule::Tau, StoppingRule::FixedN { n: 3 }),
    ];
    for rule in &rules {
        let r = estimate_tail_ratio(&model, rule, &grid, &opts, Statistic::MaxOverSigma)?;
        println!("{}: target {:.4} ({})", rule.label(), r.curve.target, r.curve.target_ref);
        for i in 0..grid.len() {
            println!("  x = {:>8.3}  ratio {:.4} +/- {:.4}", grid[i], r.curve.point[i], r.curve.half_width[i]);
        }
    }
    // S_σ instead of M_σ needs σ independent of the walk
    let r = estimate_tail_ratio(&model, &StoppingRule::IndependentGeometric { q: 0.25 }, &grid, &opts, Statistic::ValueAtSigma)?;
    println!("value at sigma, geometric: {:?}", r.curve.point);
    Ok(())
}
