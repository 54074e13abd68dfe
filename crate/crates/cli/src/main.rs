use std::process::ExitCode;

use chromasheet::engine::TaskKind;
use chromasheet_cli::cli::{exit_code, run, Cli, Command};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Serve { port, host } => {
            let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
            return match rt.block_on(chromasheet_cli::server::serve(&host, port)) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
        Command::Wrangle(a) => (TaskKind::Wrangle, a),
        Command::Select(a) => (TaskKind::Select, a),
        Command::Cluster(a) => (TaskKind::Cluster, a),
        Command::Constraints(a) => (TaskKind::LearnConstraints, a),
        Command::Predict(a) => (TaskKind::Predict, a),
        Command::Autocomplete(a) => (TaskKind::Autocomplete, a),
    };
    match run(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
