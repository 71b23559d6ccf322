//! Command-line driver: configuration layering, command bodies and
//! deterministic file output.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command};
use config::{ClassifyConfig, EffectiveConfig, FourierConfig, GreenConfig, SpectrumConfig};
use error::CliError;
use output::RunManifest;

fn flags<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("flags serialize")
}

/// Runs one parsed command.
pub fn dispatch(cli: Cli) -> Result<RunManifest, CliError> {
    match cli.command {
        Command::Spectrum(a) => {
            commands::execute("spectrum", SpectrumConfig::default(), &a.common, flags(&a), commands::spectrum)
        }
        Command::Classify(a) => {
            commands::execute("classify", ClassifyConfig::default(), &a.common, flags(&a), commands::classify)
        }
        Command::PhaseDiagram(a) => {
            let env = std::env::var("QLS_JOBS").ok();
            let base = commands::phase_base(env.as_deref())?;
            commands::execute("phase-diagram", base, &a.common, flags(&a), commands::phase)
        }
        Command::Fourier(a) => {
            commands::execute("fourier", FourierConfig::default(), &a.common, flags(&a), commands::fourier)
        }
        Command::Green(a) => commands::execute("green", GreenConfig::default(), &a.common, flags(&a), commands::green),
        Command::Effective(a) => {
            commands::execute("effective", EffectiveConfig::default(), &a.common, flags(&a), commands::effective)
        }
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
