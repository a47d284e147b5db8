//! Splits {M_τ > x} by the position just before the first passage: at most
//! h(x) (one big jump) or above it.

use heavytail::estimators::{estimate_split_ratios, McOptions};
use heavytail::walk_engine::StoppingRule;
use heavytail::{Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let model = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0))?;
    let grid: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&v| model.tail_quantile(v)).collect();
    let r = estimate_split_ratios(&model, &StoppingRule::Tau, &grid, &McOptions::new(5_000_000, 11))?;
    println!("target E tau = {:.4}", r.a1.target);
    for i in 0..grid.len() {
        println!(
            "x = {:>8.3}  total {:.4}  A1 {:.4}  A2 {:.5}  h(x) = {:.3}",
            grid[i],
            r.total.point[i],
            r.a1.point[i],
            r.a2.point[i],
            model.insensitivity_h(grid[i])?
        );
    }
    println!("grid proxy for sup A2 ratio: {:.5}", r.delta_proxy);
    Ok(())
}
