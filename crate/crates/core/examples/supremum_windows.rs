//! Window probabilities P(M ∈ (x, x + c]) of the all-time maximum, and its
//! tail against the integrated tail.

use heavytail::estimators::{estimate_supremum_windows, McOptions};
use heavytail::{Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let model = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0))?;
    let grid: Vec<f64> = [1e-2, 1e-3].iter().map(|&v| model.tail_quantile(v)).collect();
    let r = estimate_supremum_windows(&model, &grid, 5.0, 200.0, &McOptions::new(500_000, 2))?;
    println!("window target c/m = {:.4}, tail target 1/m = {:.4}, floor bias bound {:.2e}", r.window.target, r.global_tail.target, r.bias_bound);
    for i in 0..grid.len() {
        println!(
            "x = {:>7.3}  window {:.4} +/- {:.4}  P(M > x)/second tail {:.4} +/- {:.4}",
            grid[i],
            r.window.point[i],
            r.window.half_width[i],
            r.global_tail.point[i],
            r.global_tail.half_width[i]
        );
    }
    Ok(())
}
