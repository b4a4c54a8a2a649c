use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsg::channel::StandardNoise;
use qsg::cli::{load_config, run_scenario, Overrides, Scenario};
use qsg::QsgError;

#[derive(Parser)]
#[command(name = "qsg", version, about = "Sabotage game simulator for classical and entangled teams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write the results CSV plus a summary.
    Run {
        /// TOML run configuration. Flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<Scenario>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        noise: Option<StandardNoise>,
        #[arg(long)]
        error_rate: Option<f64>,
        /// Hardware noise profile (TOML).
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Results CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let Command::Run { config, scenario, rounds, shots, seed, noise, error_rate, profile, out } = Cli::parse().command;
    let overrides = Overrides {
        scenario,
        rounds,
        shots,
        master_seed: seed,
        noise_kind: noise,
        error_rate,
        profile_path: profile,
        output_path: out,
    };

    let config = match load_config(config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(QsgError::Schema(issues)) => {
            eprintln!("qsg: invalid configuration");
            for issue in issues {
                eprintln!("  {issue}");
            }
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("qsg: {e}");
            return ExitCode::from(2);
        }
    };

    match run_scenario(&config) {
        Ok(report) => {
            for t in &report.teams {
                println!(
                    "{:>6}  mean {:+.4}  std {:.4}  P(+) {:.4}  accumulated {}",
                    t.spec.label, t.stats.mean, t.stats.std, t.stats.p_positive, t.stats.accumulated
                );
            }
            println!("wrote {}", config.output_path.display());
            println!("wrote {}", config.summary_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qsg: {e}");
            ExitCode::FAILURE
        }
    }
}
