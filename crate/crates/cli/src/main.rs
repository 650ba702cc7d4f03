mod commands;
mod config;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use zb_core::Execution;

use config::RunConfig;

fn main() -> ExitCode {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if cfg.emit_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    let exec = match cfg.threads {
        Some(1) => Execution::Sequential,
        Some(n) => match zb_core::exec::set_threads(n) {
            Ok(()) => Execution::Parallel,
            Err(e) => return fail(e),
        },
        None => Execution::Parallel,
    };
    let out = match commands::run(&cfg.command, exec, cfg.digits) {
        Ok(out) => out,
        Err(e) => return fail(e),
    };
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = out.render(cfg.format, cfg.digits, &mut stdout).and_then(|_| stdout.flush()) {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn fail(e: zb_core::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::FAILURE
}
