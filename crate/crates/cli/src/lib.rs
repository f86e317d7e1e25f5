//! Command-line front end for `grassmann-morse`.
//!
//! [`run`] parses arguments and returns the exit code together with everything
//! that would be printed, so the binary is a thin wrapper and the behaviour is
//! testable in process.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use grassmann_morse::geometry::Spectrum;
use grassmann_morse::SignConvention;

mod commands;
mod report;

/// Largest `n` accepted by the combinatorial commands.
pub const MAX_N_COMBINATORIAL: usize = 12;
/// Largest `n` accepted by `verify-flow`.
pub const MAX_N_FLOW: usize = 6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MATH: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "grassmann-morse",
    version,
    about = "Integral homology of real Grassmann manifolds from a Witten-Morse complex"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Homology groups of G(n,m) with the closed-form comparison.
    Homology(Flags),
    /// Check d∘d = 0 on a grid of (n, m) or on a single pair.
    VerifyBoundary(Flags),
    /// Check gradient, Hessian and metric at the critical points.
    VerifyGeometry(Flags),
    /// Integrate the gradient flow between adjacent critical points.
    VerifyFlow(Flags),
    /// Number of critical points in each index.
    Census(Flags),
}

#[derive(clap::Args, Debug)]
struct Flags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// paper, corrected, mod2 or oriented.
    #[arg(long, default_value = "oriented")]
    convention: SignConvention,
    /// Comma-separated strictly increasing positive spectrum.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the sampled checks of verify-geometry.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper end of the verify-boundary grid.
    #[arg(long)]
    max_n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Homology,
    VerifyBoundary,
    VerifyGeometry,
    VerifyFlow,
    Census,
}

/// A validated invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    /// `(n, m)`; `None` only for a verify-boundary grid.
    pub size: Option<(usize, usize)>,
    pub convention: SignConvention,
    pub spectrum: Option<Spectrum>,
    pub format: Format,
    pub output_path: Option<PathBuf>,
    pub seed: u64,
    pub max_n: usize,
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Text of a finished command and whether any check failed.
pub struct Report {
    pub text: String,
    pub failed: bool,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, String> {
        let (command, f) = match cli.command {
            CommandArgs::Homology(f) => (Command::Homology, f),
            CommandArgs::VerifyBoundary(f) => (Command::VerifyBoundary, f),
            CommandArgs::VerifyGeometry(f) => (Command::VerifyGeometry, f),
            CommandArgs::VerifyFlow(f) => (Command::VerifyFlow, f),
            CommandArgs::Census(f) => (Command::Census, f),
        };
        let limit = if command == Command::VerifyFlow {
            MAX_N_FLOW
        } else {
            MAX_N_COMBINATORIAL
        };
        let size = match (f.n, f.m) {
            (Some(n), Some(m)) => {
                if m == 0 || m > n {
                    return Err(format!("need 1 <= m <= n, got n = {n}, m = {m}"));
                }
                if n > limit {
                    return Err(format!("n = {n} exceeds the limit {limit} for this command"));
                }
                Some((n, m))
            }
            (None, None) if command == Command::VerifyBoundary => None,
            _ => return Err("both --n and --m are required".into()),
        };
        let max_n = f.max_n.unwrap_or(10);
        if max_n == 0 || max_n > MAX_N_COMBINATORIAL {
            return Err(format!("--max-n must lie in 1..={MAX_N_COMBINATORIAL}"));
        }
        let spectrum = match f.lambdas {
            None => None,
            Some(l) => {
                if let Some((n, _)) = size {
                    if l.len() != n {
                        return Err(format!("--lambdas needs {n} values, got {}", l.len()));
                    }
                }
                Some(Spectrum::new(l).map_err(|e| e.to_string())?)
            }
        };
        Ok(RunConfig {
            command,
            size,
            convention: f.convention,
            spectrum,
            format: f.format,
            output_path: f.out,
            seed: f.seed,
            max_n,
        })
    }

    pub(crate) fn spectrum_for(&self, n: usize) -> Spectrum {
        self.spectrum.clone().unwrap_or_else(|| Spectrum::standard(n))
    }
}

/// Run the command described by `cfg`. Invalid parameters come back as
/// `Error::InvalidParameters`; every other error is a mathematical failure.
pub fn execute(cfg: &RunConfig) -> Result<Report, grassmann_morse::Error> {
    match cfg.command {
        Command::Homology => commands::homology(cfg),
        Command::Census => commands::census(cfg),
        Command::VerifyBoundary => commands::verify_boundary(cfg),
        Command::VerifyGeometry => commands::verify_geometry(cfg),
        Command::VerifyFlow => commands::verify_flow(cfg),
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let usage = |msg: String| Outcome {
        code: EXIT_USAGE,
        stdout: String::new(),
        stderr: msg,
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                usage(text)
            } else {
                Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let cfg = match RunConfig::from_cli(cli) {
        Ok(cfg) => cfg,
        Err(msg) => return usage(format!("error: {msg}\n")),
    };
    let report = match execute(&cfg) {
        Ok(r) => r,
        Err(grassmann_morse::Error::InvalidParameters(msg)) => return usage(format!("error: {msg}\n")),
        Err(e) => {
            return Outcome {
                code: EXIT_MATH,
                stdout: String::new(),
                stderr: format!("error: {e}\n"),
            }
        }
    };
    let code = if report.failed { EXIT_MATH } else { EXIT_OK };
    match &cfg.output_path {
        None => Outcome {
            code,
            stdout: report.text,
            stderr: String::new(),
        },
        Some(path) => match std::fs::write(path, &report.text) {
            Ok(()) => Outcome {
                code,
                stdout: String::new(),
                stderr: String::new(),
            },
            Err(e) => usage(format!("error: cannot write {}: {e}\n", path.display())),
        },
    }
}
