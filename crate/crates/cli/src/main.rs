use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

mod commands;
mod config;
mod figures;
mod svg;

use commands::*;
use figures::FiguresArgs;

#[derive(Parser)]
#[command(name = "lienard", version, about = "Isochronous Liénard oscillator: classical runs, Hamiltonians and spectra")]
struct Cli {
    /// JSON file with parameter values; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (a directory for `figures`); stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; CSV `t,x,v`.
    Simulate(SimulateArgs),
    /// Period against amplitude, measured from upward zero crossings.
    PeriodScan(PeriodScanArgs),
    /// Class II or class I energy levels, closed form and/or finite differences.
    Spectrum(SpectrumArgs),
    /// Data grids and SVG plots of the Hamiltonian surfaces and effective potentials.
    Figures(FiguresArgs),
    /// Pick the denominator of the closed-form solution by its ODE residual.
    ResolveDenominator(ResolveArgs),
    /// Nonlocal map of the Levinson-Smith special case to a harmonic oscillator.
    Certificate(CertificateArgs),
    /// Roots ℓ of the Chiellini condition.
    Chiellini(ChielliniArgs),
    /// Hamilton flow of a class I or II model; CSV `t,x,ptilde,H`.
    Flow(FlowArgs),
    /// Closed-form class II eigenfunction; CSV `s,phi,psi`.
    Wavefunction(WavefunctionArgs),
    /// Class I bound states from the Hermite zero condition.
    BoundScan(BoundScanArgs),
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<lienard_core::Error> for CliError {
    fn from(e: lienard_core::Error) -> Self {
        if e.is_validation() {
            CliError::Validation(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn validation<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Validation(msg.into()))
}

/// Output destination and format shared by every subcommand.
pub struct Sink {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl Sink {
    pub fn format_or(&self, default: Format, allowed: &[Format], command: &str) -> CliResult<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return validation(format!("{command} does not support --format {f:?}").to_lowercase());
        }
        Ok(f)
    }

    pub fn write(&self, content: &str) -> CliResult<()> {
        match &self.out {
            Some(path) => std::fs::write(path, content)
                .or_else(|e| validation(format!("cannot write {}: {e}", path.display()))),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                // A closed pipe is not an error worth reporting.
                let _ = stdout.write_all(content.as_bytes());
                Ok(())
            }
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = config::load(cli.config.as_deref())?;
    let sink = Sink {
        out: cli.out,
        format: cli.format,
    };
    let cfg = cfg.as_ref();
    match cli.command {
        Command::Simulate(a) => simulate(config::merge(&a, cfg)?, &sink),
        Command::PeriodScan(a) => period_scan(config::merge(&a, cfg)?, &sink),
        Command::Spectrum(a) => spectrum(config::merge(&a, cfg)?, &sink),
        Command::Figures(a) => figures::run(config::merge(&a, cfg)?, &sink),
        Command::ResolveDenominator(a) => resolve_denominator(config::merge(&a, cfg)?, &sink),
        Command::Certificate(a) => certificate(config::merge(&a, cfg)?, &sink),
        Command::Chiellini(a) => chiellini(config::merge(&a, cfg)?, &sink),
        Command::Flow(a) => flow(config::merge(&a, cfg)?, &sink),
        Command::Wavefunction(a) => wavefunction(config::merge(&a, cfg)?, &sink),
        Command::BoundScan(a) => bound_scan(config::merge(&a, cfg)?, &sink),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
