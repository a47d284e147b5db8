use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use heavytail::cli_reporting::{exit_code, exit_code_for, parse_grid, parse_rule_arg, render_tables, run_scenario_with, ScenarioConfig};
use heavytail::estimators::exact_lattice_oracle;
use heavytail::estimators::mc::WORKERS_ENV;
use heavytail::tail_analysis::{classify_tail, TailProperty};
use heavytail::{Error, Family, IncrementModel};

#[derive(Debug, Parser)]
#[command(name = "heavytail", version)]
#[command(about = "Tail ratios of stopped heavy-tailed random walks, with exact lattice oracles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a JSON scenario and write report.json plus CSV tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = WORKERS_ENV)]
        workers: Option<usize>,
        /// Overrides the seed in the config; the report echoes the seed used.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify a tail on a grid and print the verdict as JSON.
    Classify {
        /// Family JSON, e.g. {"family":"pareto_shift","alpha":2.5,"xm":1,"b":3}
        #[arg(long)]
        model: String,
        #[arg(long)]
        property: TailProperty,
        /// Comma-separated grid, e.g. 1e2,1e3,1e4,1e5
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
    },
    /// Exact P(M_sigma > x) for a skip-free lattice walk.
    Oracle {
        #[arg(long)]
        x: u64,
        /// tau, fixed:<N> or min:<N>
        #[arg(long)]
        rule: String,
        /// Family JSON; defaults to the lattice law with q = 0.7, r = 3.
        #[arg(long)]
        model: Option<String>,
    },
}

fn parse_family(text: &str) -> Result<Family, Error> {
    serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(vec![format!("model: {e}")]))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<(), Error> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn execute(cmd: Command) -> Result<i32, Error> {
    match cmd {
        Command::Run { config, out, workers, seed } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ScenarioConfig::from_json(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let bundle = run_scenario_with(&cfg, workers)?;
            let paths = render_tables(&bundle, &out)?;
            for v in &bundle.verdicts {
                println!("{} {}  {}", if v.pass { "PASS" } else { "FAIL" }, v.check, v.detail);
            }
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            Ok(if bundle.all_pass() { exit_code::OK } else { exit_code::VERDICT })
        }
        Command::Classify { model, property, grid, tol } => {
            let model = IncrementModel::unchecked(parse_family(&model)?)?;
            let grid = parse_grid(&grid)?;
            print_json(&classify_tail(&model, property, &grid, tol)?)?;
            Ok(exit_code::OK)
        }
        Command::Oracle { x, rule, model } => {
            let family = match model {
                Some(m) => parse_family(&m)?,
                None => Family::lattice(0.7, 3.0),
            };
            let model = IncrementModel::new(family)?;
            print_json(&exact_lattice_oracle(&model, &parse_rule_arg(&rule)?, x)?)?;
            Ok(exit_code::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = execute(cli.command).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code_for(&e)
    });
    ExitCode::from(code as u8)
}
