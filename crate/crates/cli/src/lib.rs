//! Command-line front end for `metapop-core`: argument parsing, commands and
//! table output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod table;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{exit_code, run};
pub use table::{Cell, Format, Table};

#[derive(Debug, Parser)]
#[command(name = "metapop-hj", version, about = "Two-habitat selection-mutation-migration model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report the migration regime and the dimorphism conditions.
    Check(Common),
    /// Solve for the evolutionarily stable strategy.
    Ess(Common),
    /// Viscosity solution u on a grid, plus its Taylor data at the maxima.
    Profile(GridArgs),
    /// First-order corrector chain at a monomorphic ESS.
    Correctors(Common),
    /// Asymptotic moments of the steady state for each eps.
    Moments(EpsArgs),
    /// Finite-difference steady state for each eps.
    Solve(FdArgs),
    /// Finite-difference moments against the asymptotic predictions.
    Compare(FdArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Ess(_) => "ess",
            Command::Profile(_) => "profile",
            Command::Correctors(_) => "correctors",
            Command::Moments(_) => "moments",
            Command::Solve(_) => "solve",
            Command::Compare(_) => "compare",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Check(c) | Command::Ess(c) | Command::Correctors(c) => c,
            Command::Profile(g) => &g.common,
            Command::Moments(e) => &e.common,
            Command::Solve(f) | Command::Compare(f) => &f.eps.common,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Parameter file with `key = value` lines (r1 r2 g1 g2 kappa1 kappa2 m1 m2 theta).
    #[arg(long, short = 'c')]
    pub config: Option<PathBuf>,
    /// Override a parameter, e.g. `--set m2=0`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (created if missing).
    #[arg(long, short = 'o', default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid covers [-L, L]; defaults to theta + 3.
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long, default_value_t = 4001)]
    pub n_pts: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EpsArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, conflicts_with = "eps_list")]
    pub eps: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    pub eps_list: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct FdArgs {
    #[command(flatten)]
    pub eps: EpsArgs,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long, default_value_t = 4001)]
    pub n_pts: usize,
    /// Initial Gaussian center: a number, `theta` or `-theta`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub init: String,
    /// Steady-state threshold on sup |dn/dt|.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000_000)]
    pub max_steps: usize,
}
