//! Solvers for the machine-unlearning compliance auditing game.
//!
//! An AI operator picks an unlearning certification level `eps` and an
//! auditor picks an inspection intensity `m`. This crate computes both
//! best responses, the undisclosed-auditing Nash equilibrium, the
//! disclosed-auditing Stackelberg equilibrium, the comparative-statics
//! regimes, a non-strategic risk-based benchmark, and Monte Carlo estimates
//! of the zero-tolerance audit.

pub mod best_response;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod numeric;
pub mod params;
pub mod sim;
pub mod stackelberg;
pub mod statics;
pub mod tra;

pub use best_response::{
    auditor_best_response, operator_best_response, operator_best_response_numeric, thresholds,
    AuditorResponse, Thresholds,
};
pub use equilibrium::{
    auxiliary_j, ne_residual, solve_ne, solve_ne_numeric, Diagnostics, EquilibriumOutcome,
    FixedPointConfig, SolveMethod,
};
pub use error::{AuditError, Result};
pub use model::{
    auditor_payoff, detect_prob, miss_bound, model_utility, operator_payoff, regulatory_surplus,
};
pub use params::{CertLevel, GameParams, StrategyProfile};
pub use sim::{jensen_gap, mixture_detect_prob, simulate_audit, SimConfig, SimMode, SimResult};
pub use stackelberg::{
    committed_objective, compare_transparency, locate_gamma_threshold, solve_spe,
    stage2_response, with_gamma_ratio, GammaThreshold, SpeDiagnostics, SpeOutcome,
    TransparencyComparison,
};
pub use statics::{
    classify_regime, eta_threshold, fine_threshold, intensity_turning_point, sweep_eta,
    AuditDirection, Regime, RegimeReport, SweepRow,
};
pub use tra::{
    compare_mechanisms, solve_tra, Improvement, MechanismComparison, MechanismPoint,
    PairImprovement, TraConfig,
};
