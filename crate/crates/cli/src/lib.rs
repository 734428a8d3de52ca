//! The `carnot` command line: argument parsing, command dispatch and
//! deterministic run reports.

pub mod args;
pub mod commands;
pub mod report;

use std::time::Instant;

pub use args::Cli;
pub use report::{exit_code, CsvTable, RunReport};

use commands::{dispatch, Context};
use report::{error_payload, EXIT_IO, EXIT_OK};

/// A finished run: the report, the CSV table if any, and the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub csv: Option<CsvTable>,
    pub code: i32,
}

pub fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let mut ctx = Context::new(cli);
    let result = dispatch(&mut ctx);
    let (ok, outputs, csv, code) = match result {
        Ok((out, csv)) => (true, out, csv, EXIT_OK),
        Err(e) => (false, serde_json::json!({"error": error_payload(&e)}), None, exit_code(&e)),
    };
    let report = RunReport {
        command: cli.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: ctx.digest.finish(),
        seed: cli.seed,
        mode: format!("{:?}", cli.mode).to_lowercase(),
        ok,
        outputs,
        timing_ms: cli.timing.then(|| start.elapsed().as_secs_f64() * 1e3),
    };
    Outcome { report, csv, code }
}

/// Runs and writes the report and CSV; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let outcome = run(cli);
    if let Err(e) = report::write_report(&outcome.report, cli.out.as_deref()) {
        eprintln!("error: cannot write report: {e}");
        return EXIT_IO;
    }
    if let (Some(path), Some(table)) = (&cli.csv, &outcome.csv) {
        if let Err(e) = table.write_to(path) {
            eprintln!("error: cannot write csv: {e}");
            return EXIT_IO;
        }
    }
    if outcome.code != EXIT_OK {
        if let Some(msg) = outcome.report.outputs["error"]["message"].as_str() {
            eprintln!("error: {msg}");
        }
    }
    outcome.code
}
