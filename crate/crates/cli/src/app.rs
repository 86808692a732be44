//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{self, Command, Format, Overrides, Player};
use crate::error::{CliError, Exit};
use crate::run;

/// Environment variable holding the worker-pool size.
pub const WORKERS_ENV: &str = "MU_AUDIT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "mu-audit", version, about = "Equilibrium solvers and sweeps for the unlearning audit game")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML parameter file.
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Parameter override, e.g. `--set p=30` (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Sweep grid: `name=v1,v2`, `name=a:b:n` or `name=log:a:b:n` (repeatable).
    #[arg(long = "grid", global = true, value_name = "NAME=SPEC")]
    pub grids: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PlayerArg {
    Auditor,
    Operator,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Continuous,
    Integer,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Best response of one player over a grid of the opponent's strategy.
    BestResponse {
        #[arg(long, value_enum)]
        player: PlayerArg,
    },
    /// Simultaneous-move (undisclosed auditing) equilibrium.
    SolveNe,
    /// Leader-follower (disclosed auditing) equilibrium, optionally over a
    /// `gamma_ratio` grid.
    SolveSpe,
    /// Regime map over an (eta, p) lattice.
    Regimes,
    /// Equilibrium over an eta grid.
    SweepEta,
    /// Equilibrium over an (eta, p) lattice.
    SweepP,
    /// Risk-based, undisclosed and disclosed auditing over an eta grid.
    CompareMechanisms {
        /// Risk-based auditor's belief about the certification level
        /// (default: eps0).
        #[arg(long)]
        belief: Option<f64>,
    },
    /// Monte Carlo audit at a given profile or at the equilibrium.
    Simulate {
        #[arg(long, requires = "m")]
        eps: Option<f64>,
        #[arg(long, requires = "eps")]
        m: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
}

impl Cli {
    pub fn into_parts(self) -> (Command, Overrides) {
        let mut mode = None;
        let command = match self.command {
            Sub::BestResponse { player } => Command::BestResponse {
                player: match player {
                    PlayerArg::Auditor => Player::Auditor,
                    PlayerArg::Operator => Player::Operator,
                },
            },
            Sub::SolveNe => Command::SolveNe,
            Sub::SolveSpe => Command::SolveSpe,
            Sub::Regimes => Command::Regimes,
            Sub::SweepEta => Command::SweepEta,
            Sub::SweepP => Command::SweepP,
            Sub::CompareMechanisms { belief } => Command::CompareMechanisms { belief },
            Sub::Simulate { eps, m, mode: md } => {
                mode = md.map(|m| match m {
                    ModeArg::Continuous => "continuous".to_string(),
                    ModeArg::Integer => "integer".to_string(),
                });
                Command::Simulate {
                    profile: eps.zip(m),
                }
            }
        };
        let c = self.common;
        let overrides = Overrides {
            params_file: c.params,
            sets: c.sets,
            grids: c.grids,
            out: c.out,
            format: c.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Jsonl => Format::Jsonl,
            }),
            seed: c.seed,
            trials: c.trials,
            mode,
        };
        (command, overrides)
    }
}

fn configure_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::validation(format!("{WORKERS_ENV} must be a positive integer, got `{raw}`")))?;
    // A pool may already exist when called twice in one process.
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("worker pool already initialised; {WORKERS_ENV} ignored");
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
/// Errors are printed to stderr as a one-line JSON record.
pub fn execute<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return Exit::Success as i32;
            }
            eprintln!("{}", CliError::validation(e.render().to_string().trim()).to_json());
            return Exit::Validation as i32;
        }
    };
    let (command, overrides) = cli.into_parts();
    let result = configure_workers()
        .and_then(|()| config::resolve(command, &overrides))
        .and_then(|spec| {
            log::info!("running {} with {:?}", spec.command.name(), spec.params);
            run::run(&spec)
        });
    match result {
        Ok(_) => Exit::Success as i32,
        Err(e) => {
            log::debug!("{e}");
            eprintln!("{}", e.to_json());
            e.exit() as i32
        }
    }
}
