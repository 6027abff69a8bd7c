//! Command-line front end: flags, optional `key=value` config file, and the
//! subcommands that write CSV data.

mod commands;
mod config;

pub use commands::run;
pub use config::{load_config_file, Command, RunConfig, Settings};

use std::fmt;
use std::path::PathBuf;

use clap::Parser;

use crate::error::LchsError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LCHS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "lchs",
    version,
    about = "LCHS kernels, validation and kernel-quality metrics"
)]
pub struct Cli {
    /// tabulate | validate | min-k | cost | observable | unstable | figures
    pub command: String,
    /// Flat `key=value` file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long)]
    pub shift: Option<String>,
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Comma-separated target errors.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub t: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub dim: Option<String>,
    #[arg(long)]
    pub count: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long, conflicts_with = "diagnostic")]
    pub strict: bool,
    #[arg(long)]
    pub diagnostic: bool,
}

impl Cli {
    /// Flag values as settings, in the same key space as the config file.
    pub fn flag_settings(&self) -> Settings {
        let mut s = Settings::new();
        let pairs = [
            ("family", &self.family),
            ("beta", &self.beta),
            ("m", &self.m),
            ("delta", &self.delta),
            ("shift", &self.shift),
            ("K", &self.k),
            ("eps", &self.eps),
            ("t", &self.t),
            ("tol", &self.tol),
            ("dim", &self.dim),
            ("count", &self.count),
            ("seed", &self.seed),
            ("out", &self.out),
            ("which", &self.which),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                s.insert(k.to_string(), v.clone());
            }
        }
        if self.strict {
            s.insert("mode".into(), "strict".into());
        }
        if self.diagnostic {
            s.insert("mode".into(), "diagnostic".into());
        }
        s
    }
}

/// Failure of a CLI run, with its exit status.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute { stage: String, source: LchsError },
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute { source, .. } if source.is_convergence() => 3,
            CliError::Compute {
                source: LchsError::InvalidParameter { .. } | LchsError::Precondition(_),
                ..
            } => 2,
            CliError::Compute { .. } | CliError::Io(_) => 1,
        }
    }

    pub(crate) fn compute(stage: &str) -> impl FnOnce(LchsError) -> CliError + '_ {
        move |source| CliError::Compute {
            stage: stage.to_string(),
            source,
        }
    }
}

impl fmt::Display for CliError {
    /// One machine-parsable line: `error kind=<kind> [stage=<stage>] message=<text>`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "error kind=config message={m}"),
            CliError::Compute { stage, source } => {
                let kind = if source.is_convergence() {
                    "convergence"
                } else {
                    "compute"
                };
                write!(f, "error kind={kind} stage={stage} message={source}")
            }
            CliError::Io(m) => write!(f, "error kind=io message={m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
