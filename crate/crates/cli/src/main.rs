use std::process::ExitCode;

use clap::Parser;
use rufst_cli::{execute, init_threads, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        execute(&cli, &mut lock)
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
