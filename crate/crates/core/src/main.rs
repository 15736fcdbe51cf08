use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use lintensor::cli::{self, Cli, EXIT_INVALID};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INVALID,
            };
            return ExitCode::from(code);
        }
    };
    ExitCode::from(cli::run(cli))
}
