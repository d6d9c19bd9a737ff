use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use threewave::scenario::{exit_code, run, ScenarioConfig, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "three-wave-kinetics", version, about = "Numerical laboratory for the three-wave kinetic equation with a condensate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for node-parallel evaluation.
        #[arg(long, env = "THREEWAVE_THREADS")]
        threads: Option<usize>,
        /// Seed for randomized test functions; overrides `seed` of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run { config, out, threads, seed } = cli.command;
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    let mut cfg = match ScenarioConfig::from_path(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let outcome = run(&cfg, out.as_deref());
    match &outcome {
        Ok(report) => print!("{}", report.summary()),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&outcome) as u8)
}
