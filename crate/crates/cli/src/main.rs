use std::process::ExitCode;

use clap::Parser;
use geoshadow_cli::commands::{run, Cli};
use geoshadow_cli::EXIT_INPUT;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    ExitCode::from(run(cli))
}
