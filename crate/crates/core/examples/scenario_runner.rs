//! Runs a JSON scenario and writes report.json plus CSV tables, as the
//! `heavytail run` subcommand does.

use heavytail::cli_reporting::{render_tables, run_scenario, ScenarioConfig};

const CONFIG: &str = r#"{
  "task": "oracle_compare",
  "model": {"family": "lattice_poly_tail", "q": 0.7, "r": 3},
  "rule": {"kind": "tau"},
  "x_grid": [10, 20, 50],
  "n": 500000,
  "seed": 17
}"#;

fn main() -> heavytail::Result<()> {
    let config = ScenarioConfig::from_json(CONFIG)?;
    let bundle = run_scenario(&config)?;
    for v in &bundle.verdicts {
        println!("{} {}  {}", if v.pass { "PASS" } else { "FAIL" }, v.check, v.detail);
    }
    let out = std::env::temp_dir().join("heavytail-scenario");
    for path in render_tables(&bundle, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
