use clap::Parser;

use oba::cli::{self, Cli};

fn main() {
    if let Ok(v) = std::env::var("OBA_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: OBA_THREADS must be a positive integer, got {v:?}");
                std::process::exit(cli::EXIT_INPUT);
            }
        }
    }
    std::process::exit(cli::run(Cli::parse()));
}
