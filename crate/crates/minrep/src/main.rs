use std::io;
use std::process::ExitCode;

use clap::Parser;

use minrep::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MINREP_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let stdout = io::stdout();
    let stderr = io::stderr();
    let code = match minrep::run(cli, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            minrep::error_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
