use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pppt::harness::{cmd_grid, cmd_run, cmd_verify, HarnessError, Preset};

#[derive(Parser)]
#[command(name = "pppt", version, about = "Provenance simulator for storing-mode RPL networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Overrides the adversary seed (run) or base seed (grid).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { file: PathBuf },
    /// Run a named preset grid.
    Grid {
        #[arg(value_name = "PRESET")]
        preset: String,
    },
    /// Re-verify every delivery in an event log.
    Verify { log: PathBuf },
    /// List the presets.
    Presets,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Run { file } => {
            let a = cmd_run(file, &cli.out, cli.seed)?;
            println!("log      {}", a.log.display());
            println!("metrics  {}", a.metrics.display());
            println!("manifest {}", a.manifest.display());
            println!("log hash {}", a.log_hash);
        }
        Command::Grid { preset } => {
            let grid = cmd_grid(preset, &cli.out, cli.seed)?;
            println!("{}: {} runs", grid.preset, grid.manifest.runs.len());
            for (file, rows) in &grid.files {
                println!("  {} ({} rows)", cli.out.join(file).display(), rows.len());
            }
        }
        Command::Verify { log } => {
            let report = cmd_verify(log)?;
            println!("deliveries {}", report.deliveries);
            for (label, count) in &report.counts {
                println!("  {label:<20} {count:>6}  ({:.1}%)", 100.0 * *count as f64 / report.deliveries.max(1) as f64);
            }
        }
        Command::Presets => {
            for p in Preset::ALL {
                println!("{:<6} {}", p.name(), p.describe());
            }
        }
    }
    Ok(())
}
