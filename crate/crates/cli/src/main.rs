use std::process::ExitCode;

use caps_cli::{parse_config, run_command, CliError};

fn main() -> ExitCode {
    let result = parse_config(std::env::args_os()).and_then(|cfg| run_command(&cfg));
    match result {
        Ok(report) => {
            println!("{}", report.summary);
            ExitCode::SUCCESS
        }
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(if e.use_stderr() { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("caps: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
