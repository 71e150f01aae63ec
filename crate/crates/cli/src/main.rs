//! `pittrans`: scenario runner for open-pit / underground transition studies.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pittrans::block_model::{load_block_model, save_block_model, validate};
use pittrans::scenario::{load_scenario_config, run_compare, run_optimize, ScenarioConfig};
use pittrans::synthetic::{generate_deposit, load_deposit_spec};
use pittrans::{Error, Result};

#[derive(Parser)]
#[command(name = "pittrans", version, about = "Optimal open-pit outlines above a potential underground mine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its result files
    Optimize {
        /// Scenario config JSON
        #[arg(long)]
        config: PathBuf,
    },
    /// Run several scenarios over one block model and tabulate them
    Compare {
        /// Scenario config JSON (repeat for each scenario)
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Also write the comparison table as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a deterministic synthetic block model
    GenSynthetic {
        /// Deposit spec JSON
        #[arg(long)]
        spec: PathBuf,
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a scenario's block model and report diagnostics
    Validate {
        /// Scenario config JSON
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

/// Worker cap from PITTRANS_THREADS; 0 or unset means one per CPU.
fn threads_from_env() -> Result<usize> {
    match std::env::var("PITTRANS_THREADS") {
        Ok(value) => value
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("PITTRANS_THREADS must be an integer, got {value:?}"))),
        Err(_) => Ok(0),
    }
}

fn load_configs(paths: &[PathBuf]) -> Result<Vec<ScenarioConfig>> {
    paths.iter().map(|p| load_scenario_config(p)).collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize { config } => {
            let config = load_scenario_config(&config)?;
            let run = run_optimize(&config)?;
            let r = &run.report;
            println!(
                "{}: {} vertices, B {} / C {} / D {} arcs",
                run.mode.name(),
                r.vertex_count,
                r.b_arc_count,
                r.c_arc_count,
                r.d_arc_count
            );
            println!(
                "pit: {:.0} t ore of {:.0} t, depth {:.0} m, value {}",
                r.pit_ore_tonnes, r.pit_total_tonnes, r.pit_depth_m, r.pit_value
            );
            println!(
                "underground: {} blocks available worth {}, crown pillar {} blocks",
                run.outcome.ug_available.len(),
                r.ug_value,
                run.outcome.crown_pillar.len()
            );
            println!(
                "total {} (objective {}), solved in {:.2} s",
                r.total_value, r.objective, r.solve_seconds
            );
            println!("outputs in {}", config.output_dir.display());
        }
        Command::Compare { configs, out } => {
            let configs = load_configs(&configs)?;
            let table = run_compare(&configs, threads_from_env()?)?;
            print!("{table}");
            if let Some(out) = out {
                table.write_csv(&out)?;
                println!("table written to {}", out.display());
            }
        }
        Command::GenSynthetic { spec, out } => {
            let spec = load_deposit_spec(&spec)?;
            let model = generate_deposit(&spec)?;
            save_block_model(&model, &out)?;
            println!(
                "wrote {} blocks ({} with stopes) to {}",
                model.pit.len(),
                model.ug.len(),
                out.display()
            );
        }
        Command::Validate { config } => {
            let config = load_scenario_config(&config)?;
            let model = load_block_model(&config.block_model, config.grid)?;
            let diagnostics = validate(&model);
            for d in &diagnostics {
                println!("{d}");
            }
            println!(
                "{}: {} blocks, {} stopes, {} diagnostics",
                config.block_model.display(),
                model.pit.len(),
                model.ug.len(),
                diagnostics.len()
            );
        }
    }
    Ok(())
}
