use std::process::ExitCode;

use clap::Parser;
use potapprox_cli::{common, exit_code, run, Cli, EXIT_BOUND, EXIT_NUMERIC};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = common(&cli.command);
    let output = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let text = output.render(opts.format);
    let written = match &opts.out {
        Some(path) => std::fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_NUMERIC);
    }
    if output.bounds_hold() {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: a proved bound failed to hold");
        ExitCode::from(EXIT_BOUND)
    }
}
