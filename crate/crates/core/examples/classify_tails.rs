//! Long-tail, subexponential and S* ratios for a few increment laws.

use heavytail::tail_analysis::{classify_tail, TailProperty};
use heavytail::{Family, IncrementModel};

fn main() -> heavytail::Result<()> {
    let wide = [10.0, 100.0, 1e3, 1e4];
    // e^{-x} underflows long before 1e3
    let short = [10.0, 30.0, 100.0, 300.0];
    let laws = [
        ("pareto(2.5)", Family::pareto(2.5, 1.0, 3.0), wide),
        ("weibull(0.5)", Family::weibull(0.5, 1.0, 3.0), wide),
        ("lognormal(0, 1)", Family::lognormal(0.0, 1.0, 3.0), wide),
        ("exponential(1)", Family::exponential(1.0, 2.0), short),
    ];
    for (name, family, grid) in laws {
        let model = IncrementModel::new(family)?;
        println!("{name}  mean {:.4}", model.moments().mean);
        for property in [TailProperty::Lt, TailProperty::Subexponential, TailProperty::Sstar] {
            let v = classify_tail(&model, property, &grid, 0.15)?;
            let ratios: Vec<String> = v.ratios.iter().map(|r| format!("{r:.4}")).collect();
            println!("  {:<15} -> {:<8} [{}]  {:?}", format!("{property:?}"), v.target, ratios.join(", "), v.trend);
        }
    }
    Ok(())
}
