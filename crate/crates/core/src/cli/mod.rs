//! Command-line entry point.
//!
//! Every subcommand is translated into an [`ExperimentConfig`] and handed to
//! [`run`]. Exit codes: 0 when every certificate passes, 2 for violated
//! preconditions and malformed input, 3 for failed certificates, 4 for I/O
//! failures. Errors are printed to stderr as a JSON record.

mod config;
mod report;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{
    load_spec, parse_element, parse_grid, parse_h_grid, parse_step, ExperimentConfig, ExperimentKind, LoadedSpec,
    OutputFormat, SpecFile,
};
pub use report::{emit_report, Certificate, Report, Table};
pub use run::run;

use crate::json::Cx;
use crate::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "qlevy", version, about = "Quantum stochastic convolution cocycles and quantum random walks")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Certification tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized witness searches.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the bialgebra axioms of a descriptor.
    Validate {
        #[arg(long)]
        algebra: PathBuf,
    },
    /// Write the descriptor of F(G) or ℂ[G].
    BuildAlgebra {
        /// `function` or `group`.
        #[arg(long, default_value = "function")]
        family: String,
        /// `cyclic:N`, `s3`, or a Cayley-table JSON file.
        #[arg(long)]
        group: String,
    },
    /// Convolution exponential of a functional.
    ConvExp {
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        /// JSON list of `[re, im]` coefficients.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        alg: Option<String>,
    },
    /// GNS triple and structure map of a generating functional.
    Schurmann {
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<String>,
    },
    /// Classify a stochastic generator.
    Classify {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Cocycle matrix element between exponential vectors.
    Evolve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<f64>,
        /// `start:stop:step` sweep instead of a single time.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Cocycle identity and, with `--b`, the differential equation.
    VerifyCocycle {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        h_fd: Option<f64>,
    },
    /// Gram-matrix positivity witness for the cocycle.
    CpWitness {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        /// Comma-separated step-function files; random search when absent.
        #[arg(long, value_delimiter = ',')]
        fs: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        elements: Option<Vec<String>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Walk unitary, one-step map and error identity.
    Walk {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Walk-versus-cocycle error over a grid of step sizes.
    WalkConverge {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "T", default_value_t = 1.0)]
        t_final: f64,
        /// `2^-a..2^-b` or a comma list.
        #[arg(long, default_value = "2^-2..2^-7")]
        hgrid: String,
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, value_delimiter = ',')]
        elements: Option<Vec<String>>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Axiom suite of the discrete Lévy process of the walk.
    LevyVerify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long = "N", default_value_t = 4)]
        n_steps: usize,
        #[arg(long, default_value_t = 0.25)]
        h: f64,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Convolution semigroup of states on a time grid.
    States {
        #[arg(long)]
        algebra: Option<PathBuf>,
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, default_value = "0:1:0.1")]
        grid: String,
    },
    /// Run an experiment config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_gamma(text: Option<String>) -> crate::Result<Option<Vec<Cx>>> {
    text.map(|t| serde_json::from_str(&t).map_err(|e| Error::Parse(format!("gamma: {e}")))).transpose()
}

impl Cli {
    /// The experiment this invocation describes.
    pub fn into_config(self) -> crate::Result<ExperimentConfig> {
        let mut cfg = match self.command {
            Command::Run { config } => ExperimentConfig::load(&config)?,
            command => from_command(command)?,
        };
        let g = self.global;
        cfg.tol = g.tol.or(cfg.tol);
        cfg.seed = g.seed.or(cfg.seed);
        cfg.out = g.out.or(cfg.out);
        cfg.format = g.format.or(cfg.format);
        Ok(cfg)
    }
}

fn from_command(command: Command) -> crate::Result<ExperimentConfig> {
    let mut c = ExperimentConfig::default();
    match command {
        Command::Validate { algebra } => {
            c.kind = Some(ExperimentKind::Validate);
            c.algebra = Some(algebra);
        }
        Command::BuildAlgebra { family, group } => {
            c.kind = Some(ExperimentKind::BuildAlgebra);
            c.family = Some(family);
            c.group = Some(group);
        }
        Command::ConvExp { algebra, spec, gamma, t, alg } => {
            c.kind = Some(ExperimentKind::ConvExp);
            (c.algebra, c.spec, c.gamma, c.t) = (algebra, spec, parse_gamma(gamma)?, Some(t));
            c.alg = alg.map(|a| a.parse()).transpose()?;
        }
        Command::Schurmann { algebra, spec, gamma } => {
            c.kind = Some(ExperimentKind::Schurmann);
            (c.algebra, c.spec, c.gamma) = (algebra, spec, parse_gamma(gamma)?);
        }
        Command::Classify { spec, algebra, phi, witness } => {
            c.kind = Some(ExperimentKind::Classify);
            (c.spec, c.algebra, c.phi, c.witness) = (spec, algebra, phi, witness);
        }
        Command::Evolve { spec, f, g, t, grid, b, t_max } => {
            c.kind = Some(ExperimentKind::Evolve);
            (c.spec, c.f, c.g, c.t, c.b, c.t_max) = (Some(spec), f, g, t, b, t_max);
            c.grid = grid.as_deref().map(parse_grid).transpose()?;
        }
        Command::VerifyCocycle { spec, f, g, s, t, b, h_fd } => {
            c.kind = Some(ExperimentKind::Verify);
            (c.spec, c.f, c.g, c.s, c.t, c.b, c.h_fd) = (Some(spec), f, g, s, Some(t), b, h_fd);
        }
        Command::CpWitness { spec, t, fs, elements, trials, t_max } => {
            c.kind = Some(ExperimentKind::CpWitness);
            (c.spec, c.t, c.fs, c.elements, c.trials, c.t_max) = (Some(spec), Some(t), fs, elements, trials, t_max);
        }
        Command::Walk { spec, h, steps, f, g, b, t_max } => {
            c.kind = Some(ExperimentKind::Walk);
            (c.spec, c.h, c.steps, c.f, c.g, c.b, c.t_max) = (Some(spec), Some(h), steps, f, g, b, t_max);
        }
        Command::WalkConverge { spec, t_final, hgrid, f, g, elements, t_max } => {
            c.kind = Some(ExperimentKind::WalkConverge);
            (c.spec, c.t_final, c.f, c.g, c.elements, c.t_max) = (Some(spec), Some(t_final), f, g, elements, t_max);
            c.h_grid = Some(parse_h_grid(&hgrid)?);
        }
        Command::LevyVerify { spec, n_steps, h, budget } => {
            c.kind = Some(ExperimentKind::LevyVerify);
            (c.spec, c.n_steps, c.h, c.budget) = (Some(spec), Some(n_steps), Some(h), budget);
        }
        Command::States { algebra, spec, gamma, grid } => {
            c.kind = Some(ExperimentKind::States);
            (c.algebra, c.spec, c.gamma) = (algebra, spec, parse_gamma(gamma)?);
            c.grid = Some(parse_grid(&grid)?);
        }
        Command::Run { .. } => unreachable!("handled by the caller"),
    }
    Ok(c)
}

/// Machine-readable error record.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub code: &'static str,
    pub exit: i32,
    pub message: String,
    pub residual: Option<f64>,
}

impl ErrorRecord {
    pub fn from_error(e: &Error) -> Self {
        let (code, exit) = match e {
            Error::Io(_) => ("IO", EXIT_IO),
            Error::NotCompletelyPositive { .. } => ("CERTIFICATION", EXIT_CERTIFICATION),
            _ => ("PRECONDITION", EXIT_PRECONDITION),
        };
        let residual = match e {
            Error::NotCharacter { residual }
            | Error::InconsistentPi { residual }
            | Error::NotStarHomomorphic { residual }
            | Error::NotIsometry { residual } => Some(*residual),
            Error::StepTooLarge { value } => Some(*value),
            Error::NotCompletelyPositive { min_eig } => Some(*min_eig),
            _ => None,
        };
        Self { code, exit, message: e.to_string(), residual }
    }
}

/// Runs a parsed config end to end and returns the exit code.
pub fn execute(cfg: &ExperimentConfig) -> i32 {
    let outcome = run(cfg).and_then(|report| {
        emit_report(&report, cfg.format.unwrap_or_default(), cfg.out.as_deref())?;
        Ok(report.pass)
    });
    match outcome {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CERTIFICATION,
        Err(e) => report_error(&e),
    }
}

fn report_error(e: &Error) -> i32 {
    let record = ErrorRecord::from_error(e);
    eprintln!("{}", serde_json::to_string(&record).expect("serializable"));
    record.exit
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PRECONDITION } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match cli.into_config() {
        Ok(cfg) => execute(&cfg),
        Err(e) => report_error(&e),
    }
}
