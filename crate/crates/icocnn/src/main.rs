use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = icocnn::cli::Cli::parse();
    match icocnn::cli::run(&cli) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("JSON value"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
