use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use threewave_lab::{run_file, Overrides, Task};

#[derive(Parser)]
#[command(name = "threewave", about = "Three-wave Schrödinger experiments")]
struct Cli {
    #[arg(value_enum)]
    task: Task,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let ov = Overrides {
        out: cli.out,
        seed: cli.seed,
    };
    match run_file(cli.task, &cli.config, ov) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
