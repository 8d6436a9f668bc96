mod args;
mod commands;
mod config;
mod error;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::{CliError, EXIT_USAGE};

const THREADS_VAR: &str = "SPHFUN_THREADS";

fn report(err: &CliError, json: bool) -> ExitCode {
    let mut stderr = std::io::stderr().lock();
    if json {
        let _ = writeln!(stderr, "{}", err.to_json());
    } else {
        let _ = writeln!(stderr, "error: {}", err.message());
    }
    ExitCode::from(err.exit_code() as u8)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(
            THREADS_VAR,
            format!("{THREADS_VAR} must be a positive integer, got `{raw}`"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(THREADS_VAR, e.to_string()))
}

fn run(argv: Vec<OsString>) -> Result<commands::Outcome, CliError> {
    init_threads()?;
    let argv = config::expand(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return Ok(commands::Outcome {
                stdout: e.to_string(),
                code: 0,
            });
        }
        Err(e) => {
            // the message paragraph, without the usage and help trailers
            let text = e.to_string();
            let message = text
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(str::trim)
                .collect::<Vec<_>>()
                .join(" ");
            return Err(CliError::Usage {
                message: message.trim_start_matches("error: ").to_string(),
                field: None,
            });
        }
    };
    match &cli.command {
        Command::Eigen(a) => commands::eigen(a),
        Command::Eval(a) => commands::eval(a),
        Command::Verify(a) => commands::verify(a),
        Command::Ring(a) => commands::ring(a),
        Command::Roots(a) => commands::roots(a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let json_errors = argv.iter().any(|a| a == "--json-errors");
    match run(argv) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(EXIT_USAGE as u8);
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => report(&e, json_errors),
    }
}
