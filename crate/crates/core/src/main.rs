use std::path::PathBuf;
use std::process::ExitCode;

use capillary::io::{parse_times, run_command, Command, Overrides};
use clap::{Parser, ValueEnum};
use serde_json::json;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Simulate,
    Calibrate,
    Retention,
    Sensitivity,
    Ingest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelKind {
    Cubic,
    Kp,
}

/// Capillary imbibition simulator and absorption-function calibration.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Sub,
    /// Run manifest (TOML).
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Grid spacing, cm.
    #[arg(long)]
    dz: Option<f64>,
    /// Time step, s.
    #[arg(long)]
    dt: Option<f64>,
    /// Snapshot times in seconds, comma separated.
    #[arg(long)]
    snapshots: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Simulate => Command::Simulate,
        Sub::Calibrate => Command::Calibrate,
        Sub::Retention => Command::Retention,
        Sub::Sensitivity => Command::Sensitivity,
        Sub::Ingest => Command::Ingest,
    };
    let result = cli
        .snapshots
        .as_deref()
        .map(parse_times)
        .transpose()
        .and_then(|snapshots| {
            let overrides = Overrides {
                seed: cli.seed,
                model: cli.model.map(|m| match m {
                    ModelKind::Cubic => "cubic".to_string(),
                    ModelKind::Kp => "kp".to_string(),
                }),
                dz: cli.dz,
                dt: cli.dt,
                snapshots,
            };
            run_command(command, &cli.manifest, &overrides, &cli.out)
        });
    match result {
        Ok(report) => {
            println!(
                "{}",
                json!({ "status": "ok", "summary": report.summary, "files": report.files })
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "status": "error", "kind": e.kind(), "message": e.to_string() })
            );
            ExitCode::FAILURE
        }
    }
}
