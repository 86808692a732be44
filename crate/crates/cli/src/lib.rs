//! Experiment harness for the unlearning audit game: parameter files,
//! sweeps, and figure-ready CSV / JSON Lines tables.
//!
//! Equilibrium-style tables (`best-response`, `solve-ne`, `solve-spe`,
//! `sweep-eta`, `sweep-p`) share one frozen column order:
//!
//! ```text
//! <sweep keys…>, eps_star, m_star, detect, surplus, auditor_payoff,
//! operator_payoff, residual, method, error
//! ```

pub mod app;
pub mod config;
pub mod error;
pub mod grid;
pub mod run;
pub mod table;

pub use app::execute;
pub use config::{resolve, Command, Format, OutputSpec, Overrides, ParamFile, Player, RunSpec};
pub use error::{CliError, Exit};
pub use run::{build_table, render, run};
pub use table::{Cell, OutcomeRow, Table};
