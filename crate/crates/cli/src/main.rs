mod args;
mod commands;
mod failure;
mod grids;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::{CliResult, Failure, EXIT_NUMERICAL, EXIT_PRECONDITION};

fn run(cli: &Cli) -> CliResult<i32> {
    match &cli.command {
        Command::Dims(a) => commands::emit(&commands::dims(a)?, None).map(|_| 0),
        Command::Source(a) => commands::emit(&commands::source(a)?, a.output.out.as_deref()).map(|_| 0),
        Command::Eigen(a) => commands::emit(&commands::eigen(a)?, a.output.out.as_deref()).map(|_| 0),
        Command::Verify(a) => {
            let (report, pass) = commands::verify(a)?;
            commands::emit(&report, a.out.as_deref())?;
            Ok(if pass { 0 } else { EXIT_NUMERICAL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let f = Failure { kind: "usage", message: e.to_string().trim_end().to_string(), code: EXIT_PRECONDITION };
            eprintln!("{}", f.to_json());
            return ExitCode::from(EXIT_PRECONDITION as u8);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.code as u8)
        }
    }
}
