use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sintegral::pipeline::{format_text, parse_problem, run_pipeline, to_json, RunOptions};
use sintegral::Error;

/// Complete determination of S-integral points on rational elliptic curves
/// y^2 = x^3 + ax + b from a Mordell-Weil basis.
#[derive(Parser)]
#[command(name = "sintegral", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON file.
    Solve {
        /// Path to the problem document.
        file: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Stop after the initial height bounds; no logs, no reduction.
        #[arg(long)]
        bound_only: bool,
        /// Include the per-iteration reduction trace in the output.
        #[arg(long)]
        trace: bool,
        /// Worker threads for the final enumeration.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Override a config knob, e.g. --config t=250 (repeatable).
        #[arg(long, value_name = "KEY=VALUE")]
        config: Vec<String>,
        /// Write the document here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress stage progress lines on standard error.
        #[arg(long)]
        quiet: bool,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidSpec(_)
        | Error::PointNotOnCurve
        | Error::IdentityPoint
        | Error::DegenerateCurve
        | Error::NotIndependent => 2,
        Error::EvenCharacteristic | Error::BadReduction { .. } | Error::Unsupported(_) => 3,
        _ => 4,
    }
}

fn run() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { file, format, bound_only, trace, threads, config, out, quiet } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| (2, format!("cannot read {}: {e}", file.display())))?;
            let mut spec =
                parse_problem(&text).map_err(|e| (exit_code_for(&e), e.to_string()))?;
            for kv in &config {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| (2, format!("--config expects key=value, got {kv:?}")))?;
                spec.config.set(k, v).map_err(|e| (2, e.to_string()))?;
            }
            let opts = RunOptions { threads, bound_only, trace, verbose: !quiet };
            let result =
                run_pipeline(&spec, &opts).map_err(|e| (exit_code_for(&e), e.to_string()))?;
            let rendered = match format {
                Format::Text => format_text(&result),
                Format::Json => {
                    let mut s = to_json(&result);
                    s.push('\n');
                    s
                }
            };
            match out {
                Some(path) => fs::write(&path, rendered)
                    .map_err(|e| (4, format!("cannot write {}: {e}", path.display())))?,
                None => print!("{rendered}"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
