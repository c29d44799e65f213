use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use geoexplore::experiments::{
    run_check_suite, run_oracle_suite, run_sim1, run_sim2, ExperimentConfig, ExperimentError,
    GeometrySelection, Report,
};

/// Curiosity-driven exploration under Euclidean and projective internal
/// geometries.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    geometry: Option<GeometrySelection>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Single-object approach trajectories.
    Sim1,
    /// Epistemic value by direction over a grid of object positions.
    Sim2,
    /// Oracle verification suite.
    Oracle,
    /// Geometry, belief and pushforward invariant suite.
    Check,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ExperimentError> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(g) = cli.geometry {
        config.geometry = g;
    }
    config.validate()?;
    Ok(config)
}

fn print_report(report: &Report) {
    for c in &report.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        println!("{verdict}  {:<40} {:>14.6e}  (threshold {:e})", c.name, c.statistic, c.threshold);
    }
}

fn run(cli: &Cli) -> Result<(), ExperimentError> {
    let config = load(cli)?;
    let started = Instant::now();
    match cli.command {
        Command::Sim1 => {
            let result = run_sim1(&config)?;
            for t in &result.trajectories {
                let d = t.distances();
                println!(
                    "{:<10} steps {:>3}  distance {:.4} -> {:.4}  halt {:?}",
                    t.config.geometry.name(),
                    t.steps.len(),
                    d[0],
                    d[d.len() - 1],
                    t.halt
                );
            }
        }
        Command::Sim2 => {
            let results = run_sim2(&config)?;
            if let Some(r) = results.first() {
                eprintln!("excluded {} grid cells near the agent", r.excluded_cells);
            }
            for r in &results {
                println!("{}", r.geometry.name());
                println!("  idle      {:>12.6} ± {:.6}", r.idle.mean, r.idle.std_error);
                for b in &r.bins {
                    println!(
                        "  {:>+8.4}  {:>12.6} ± {:.6}",
                        b.angle.unwrap_or(f64::NAN),
                        b.mean,
                        b.std_error
                    );
                }
            }
        }
        Command::Oracle => {
            let report = run_oracle_suite(&config)?;
            print_report(&report);
            report.into_result()?;
        }
        Command::Check => {
            let report = run_check_suite(&config)?;
            print_report(&report);
            report.into_result()?;
        }
    }
    eprintln!(
        "wrote {} in {:.2?}",
        config.output_dir.display(),
        started.elapsed()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
