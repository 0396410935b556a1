//! Command-line surface for the reference-frame-independent QKD library:
//! key-rate sweeps, Monte-Carlo protocol runs under frame drift, qutrit
//! C_3 evaluation, and photonic chip verification. All subcommands emit
//! CSV (schema header `#schema=1`) to stdout or `--out PATH`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 insufficient data.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "rfiqkd",
    version,
    about = "Reference-frame-independent QKD simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the secret key rate over a QBER grid and report the rate's
    /// zero crossing.
    Rates(RatesArgs),
    /// Monte-Carlo protocol run: sample a transcript, estimate Q and C,
    /// and bound Eve's information, next to the exact drift-free values.
    Simulate(SimulateArgs),
    /// Exact and sampled qutrit invariant C_3 under computational-phase
    /// drift.
    Qutrit(QutritArgs),
    /// Verify the photonic measurement circuits and exit nonzero on any
    /// residual beyond tolerance.
    ChipVerify(ChipVerifyArgs),
}

#[derive(Args)]
struct RatesArgs {
    /// Use the Werner relation C(Q) = 2(1-2Q)^2 (the default source).
    #[arg(long, conflicts_with = "cq")]
    werner: bool,
    /// Custom C(Q): `const:VALUE` for a constant C.
    #[arg(long)]
    cq: Option<String>,
    /// Largest QBER of the grid.
    #[arg(long, default_value_t = 0.15)]
    qmax: f64,
    /// Number of grid points from 0 to qmax inclusive.
    #[arg(long, default_value_t = 151)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of signals.
    #[arg(long, default_value_t = 1_000_000)]
    n: u64,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Source noise as a Werner QBER in [0, 0.5].
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Frame drift: `constant:B`, `ramp:B:RATE` or `walk:B:RATE[:SEED]`
    /// (without SEED the walk seed derives from the master seed).
    #[arg(long, default_value = "constant:0")]
    drift: String,
    /// Basis probabilities `pX:pY:pZ` per party (must sum to 1).
    #[arg(long)]
    bases: Option<String>,
    /// Also write the sampled transcript to this path.
    #[arg(long)]
    transcript_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QutritArgs {
    /// Number of signals.
    #[arg(long, default_value_t = 100_000)]
    n: u64,
    /// Master seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Computational-phase drift: `none`, `fixed:PHI1:PHI2`, `random`
    /// (fixed-but-unknown, drawn from the seed) or `jitter` (fresh per
    /// signal; smears C_3).
    #[arg(long, default_value = "none")]
    phase_drift: String,
    /// Isotropic mixing weight of the source, p*Bell + (1-p)*I/9.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChipVerifyArgs {
    /// Splitter reflectivities of the measurement cascade, `r1:r2:r3`.
    #[arg(long, default_value = "0.5:0.5:0.5")]
    splitters: String,
    /// Corrupt a component to exercise the failure path (`dc3` replaces
    /// the 1/sqrt(3) coefficient by 1/sqrt(2)).
    #[arg(long)]
    inject_fault: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Rates(args) => commands::rates(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Qutrit(args) => commands::qutrit(args),
        Command::ChipVerify(args) => commands::chip_verify(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

/// CLI-level error with its process exit code.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn exit_code(&self) -> u8 {
        self.code
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<rfiqkd::Error> for CliError {
    fn from(err: rfiqkd::Error) -> Self {
        let code = match err {
            rfiqkd::Error::InsufficientData { .. } => 3,
            _ => 2,
        };
        Self {
            message: err.to_string(),
            code,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self {
            message: err.to_string(),
            code: 2,
        }
    }
}
