use std::process::ExitCode;

use clap::Parser;
use tubal::cli::{run, RunConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    tubal::init_threads_from_env();
    match run(RunConfig::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tprod: residual checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("tprod: {e}");
            ExitCode::from(2)
        }
    }
}
