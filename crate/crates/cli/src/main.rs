use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use simcli::manifest::SEED_ENV;
use simcli::{execute, parse_manifest_with, Campaign, CliError, Overrides};

/// Run a simulation campaign described by a TOML manifest.
#[derive(Debug, Parser)]
#[command(name = "simcli", version)]
struct Args {
    /// Campaign to run; must match `campaign` in the manifest.
    campaign: Campaign,
    /// Path to the TOML manifest.
    #[arg(long, short)]
    manifest: PathBuf,
    /// Output directory, overriding `output_dir` in the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of worker threads (default: one per core).
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    workers: Option<u16>,
    /// Write one trace CSV per replicate (run and time-course only).
    #[arg(long)]
    emit_traces: bool,
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            return fail("usage", first, 2);
        }
    };

    let text = match std::fs::read_to_string(&args.manifest) {
        Ok(t) => t,
        Err(e) => return fail("io", &format!("{}: {e}", args.manifest.display()), 2),
    };
    let overrides = Overrides {
        seed_env: std::env::var(SEED_ENV).ok(),
        output_dir: args.out.clone(),
        emit_traces: args.emit_traces,
    };

    let result = parse_manifest_with(&text, &overrides)
        .map_err(CliError::from)
        .and_then(|m| {
            if m.campaign != args.campaign {
                return Err(CliError::CampaignMismatch {
                    requested: args.campaign,
                    declared: m.campaign,
                });
            }
            execute(&m, &text, args.workers.map(usize::from))
        });

    match result {
        Ok(outcome) => {
            let mut line = format!(
                "{}: {} rows -> {}",
                args.campaign,
                outcome.rows.len(),
                outcome.output_dir.join(simcli::output::RESULT_FILE).display()
            );
            for t in &outcome.tuning {
                line.push_str(&format!("; best {} for {} = {}", t.parameter, t.policy, t.best_value));
            }
            if outcome.traces_written > 0 {
                line.push_str(&format!("; {} traces", outcome.traces_written));
            }
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
