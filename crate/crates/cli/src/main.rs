//! `pseudotwin`: runs one experiment and writes its result as CSV.
//!
//! Exit status is 0 on success, 1 when a checked property fails or a
//! computation cannot be certified, and 2 on usage errors.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::{AssertionFailed, Sheet};

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<AssertionFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<pseudotwin::Error>() {
        Some(
            pseudotwin::Error::Domain { .. }
            | pseudotwin::Error::InvalidParams(_)
            | pseudotwin::Error::InvertedRange { .. }
            | pseudotwin::Error::Budget { .. }
            | pseudotwin::Error::Overflow(_),
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    }
    let result = Sheet::open(cli.out.as_deref()).and_then(|mut sheet| {
        let r = commands::run(&cli.command, &mut sheet);
        // keep rows written before a failed check
        sheet.finish().and(r)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
