use std::process::ExitCode;

use clap::Parser;
use zzcli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| CliError::Io {
            path: path.clone(),
            message: e.to_string(),
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
