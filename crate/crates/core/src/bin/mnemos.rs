use std::io::Write;
use std::process::ExitCode;

use mnemos::cli::{self, ConfigError};

fn main() -> ExitCode {
    let env_seed = std::env::var(cli::SEED_ENV).ok();
    let inv = match cli::parse_config(std::env::args_os(), env_seed.as_deref()) {
        Ok(inv) => inv,
        Err(ConfigError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("mnemos: {e}");
            return ExitCode::from(2);
        }
    };
    let exec = match cli::execute(&inv.config) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("mnemos: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let (Some(path), Some(corpus)) = (&inv.dump_corpus, &exec.corpus) {
        if let Err(e) = cli::write_atomic(path, corpus.to_text().as_bytes()) {
            eprintln!("mnemos: writing {}: {e}", path.display());
            return ExitCode::FAILURE;
        }
    }
    let written = match &inv.out {
        Some(path) => cli::write_atomic(path, &exec.bytes).map_err(|e| format!("writing {}: {e}", path.display())),
        None => std::io::stdout().lock().write_all(&exec.bytes).map_err(|e| format!("writing output: {e}")),
    };
    if let Err(e) = written {
        eprintln!("mnemos: {e}");
        return ExitCode::FAILURE;
    }
    for v in &exec.violations {
        eprintln!("mnemos: invariant violated: {v}");
    }
    if exec.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
