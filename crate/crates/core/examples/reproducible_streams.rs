//! Replication streams are keyed by (seed, stream, index), so results do not
//! depend on how replications are spread over threads.

use heavytail::estimators::{estimate_tail_ratio, McOptions, Statistic};
use heavytail::walk_engine::StoppingRule;
use heavytail::{Family, IncrementModel, RngState};

fn main() -> heavytail::Result<()> {
    let mut a = RngState::for_replication(1, 0x5707, 12);
    let mut b = RngState::for_replication(1, 0x5707, 12);
    println!("same key, same draws: {}", (0..5).all(|_| a.uniform() == b.uniform()));

    let model = IncrementModel::new(Family::weibull(0.5, 1.0, 3.0))?;
    let grid = [10.0, 40.0, 160.0];
    let run = |workers| estimate_tail_ratio(&model, &StoppingRule::Tau, &grid, &McOptions::new(300_000, 9).with_workers(workers), Statistic::MaxOverSigma);
    let one = run(1)?;
    let four = run(4)?;
    println!("1 worker:  {:?}", one.curve.point);
    println!("4 workers: {:?}", four.curve.point);
    println!("identical: {}", one == four);
    Ok(())
}
