//! Expected downcrossings of a level, and the busy-cycle rate against a
//! stationary Lindley workload estimate.

use heavytail::estimators::{cycle_downcrossing_check, estimate_downcrossings, McOptions};
use heavytail::{Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let model = IncrementModel::new(Family::pareto(2.5, 1.0, 3.0))?;
    let r = estimate_downcrossings(&model, &[5.0, 20.0, 40.0], 500.0, &McOptions::new(100_000, 5))?;
    println!("target m-/m = {:.5}", r.curve.target);
    for i in 0..r.curve.len() {
        println!("  t = {:>4}  mean downcrossings {:.4} +/- {:.4}", r.curve.x_grid[i], r.curve.point[i], r.curve.half_width[i]);
    }

    let lattice = IncrementModel::new(Family::lattice(0.7, 3.0))?;
    let r = estimate_downcrossings(&lattice, &[5.0, 20.0], 100.0, &McOptions::new(50_000, 5))?;
    println!("lattice MC {:?} vs exact {:?}", r.curve.point, r.exact);

    let c = cycle_downcrossing_check(&model, &[1.0, 5.0, 10.0], 200_000, 20, 50_000, 5, None)?;
    for i in 0..c.levels.len() {
        println!(
            "  x = {:>4}  cycle {:.5} +/- {:.5}  stationary {:.5} +/- {:.5}  agree: {}",
            c.levels[i],
            c.cycle_rate[i],
            c.cycle_half_width[i],
            c.stationary_rate[i],
            c.stationary_half_width[i],
            c.agree(i, 3.0)
        );
    }
    Ok(())
}
