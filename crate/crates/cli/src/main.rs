//! `torusflow` command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use torusflow::flows::DEFAULT_RHO;
use torusflow::graph::BasisKind;
use torusflow::powerflow::DEFAULT_PTC_TOL;

/// Exit status: solutions found / command succeeded.
pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;
pub const EXIT_NO_SOLUTION: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "torusflow", version, about = "All solutions of flow and elastic network problems on the n-torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Fundamental,
    Minimum,
}

impl From<BasisArg> for BasisKind {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Fundamental => BasisKind::Fundamental,
            BasisArg::Minimum => BasisKind::Minimum,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Angle bound; overrides the input's.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Built-in case (ring12-sym, ring12-asym, pentagon, expo(s), rts24-mod)
    /// or a case file.
    #[arg(long)]
    pub case: Option<String>,
    /// Cycle basis; defaults to the case's own basis or fundamental.
    #[arg(long, value_enum)]
    pub basis: Option<BasisArg>,
    /// Stopping tolerance of the projection iteration.
    #[arg(long, default_value_t = DEFAULT_RHO, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(torusflow::Error::Input(format!("--rho {} must be positive", self.rho)).into());
        }
        if self.jobs == 0 {
            return Err(torusflow::Error::Input("--jobs must be at least 1".into()).into());
        }
        Ok(())
    }

    pub fn basis_kind(&self) -> Option<BasisKind> {
        self.basis.map(Into::into)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find and certify every solution.
    Solve {
        /// Problem, elastic problem, or power case JSON.
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// List the cycle basis, per-cycle winding bounds and candidates.
    Windings {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the cycle basis.
    Basis {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Transmission capacity and congestion per winding vector.
    Sweep {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// Bisection tolerance on the scale.
        #[arg(long, default_value_t = DEFAULT_PTC_TOL)]
        tol: f64,
    },
    /// Split flows into cutset and cycle parts.
    Decompose {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
        /// JSON array with one flow per edge; solves the problem when absent.
        #[arg(long)]
        flow: Option<PathBuf>,
    },
    /// Recompute residuals and winding vectors of stored solutions.
    Check {
        /// Solve report, solution object, or list of solutions.
        solutions: PathBuf,
        /// Problem file; defaults to the one embedded in a solve report.
        #[arg(long)]
        problem: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a random problem, or a built-in case with --case.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        nodes: usize,
        #[arg(long, default_value_t = 3)]
        extra_edges: usize,
        /// Largest |p_i|.
        #[arg(long, default_value_t = 0.1)]
        p_scale: f64,
        /// Random weights in [0.5, 2].
        #[arg(long)]
        weighted: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { input, common } => {
            common.validate()?;
            commands::solve(&common, input.as_deref())
        }
        Command::Windings { input, common } => {
            common.validate()?;
            commands::windings(&common, input.as_deref())
        }
        Command::Basis { input, common } => {
            common.validate()?;
            commands::basis(&common, input.as_deref())
        }
        Command::Sweep { input, common, tol } => {
            common.validate()?;
            commands::sweep(&common, input.as_deref(), tol)
        }
        Command::Decompose { input, common, flow } => {
            common.validate()?;
            commands::decompose(&common, input.as_deref(), flow.as_deref())
        }
        Command::Check { solutions, problem, common } => {
            common.validate()?;
            commands::check(&common, &solutions, problem.as_deref())
        }
        Command::Gen { seed, nodes, extra_edges, p_scale, weighted, common } => {
            let options = torusflow::gen::GenOptions {
                nodes,
                extra_edges,
                gamma: common.gamma.unwrap_or(1.4),
                p_scale,
                weighted,
            };
            commands::gen(&common, seed, &options)
        }
    }
}

/// Exit code for an error: bad input is 1, anything else 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<torusflow::Error>() {
        return if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERICAL };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_INPUT;
    }
    EXIT_NUMERICAL
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
