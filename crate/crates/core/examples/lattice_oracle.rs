//! Exact exceedance probabilities for a skip-free lattice walk, checked
//! against simulation.

use heavytail::estimators::mc::proportion_half_width;
use heavytail::estimators::{estimate_tail_ratio, exact_lattice_oracle, McOptions, Statistic};
use heavytail::walk_engine::StoppingRule;
use heavytail::{Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let model = IncrementModel::new(Family::lattice(0.7, 3.0))?;
    let xs = [10.0, 20.0, 50.0];
    let rules = [
        StoppingRule::Tau,
        StoppingRule::FixedN { n: 20 },
        StoppingRule::min_of(StoppingRule::Tau, StoppingRule::FixedN { n: 20 }),
    ];
    for rule in &rules {
        let mc = estimate_tail_ratio(&model, rule, &xs, &McOptions::new(1_000_000, 3), Statistic::MaxOverSigma)?;
        let n = mc.curve.n_effective[0];
        println!("{}", rule.label());
        for (i, &x) in xs.iter().enumerate() {
            let exact = exact_lattice_oracle(&model, rule, x as u64)?;
            let hits = mc.curve.hits[i];
            println!(
                "  x = {x:>3}  exact {:.6e}  MC {:.6e} +/- {:.1e}  E sigma {:.4}",
                exact.probability,
                hits as f64 / n as f64,
                proportion_half_width(hits, n),
                exact.sigma_mean
            );
        }
    }
    Ok(())
}
