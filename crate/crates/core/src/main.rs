use std::process::ExitCode;

use clap::Parser;
use rankdiff::cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("RANKDIFF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // ignore failure: the pool may already exist in embedded use
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match execute(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
