//! How the equilibrium moves with the unlearning proportion `eta`.
//!
//! The equilibrium level rises with `eta`. The intensity rises with `eta`
//! while the level is below `e c / p` and falls after, which splits the
//! `(eta, p)` plane at
//!
//! ```text
//! p_th      = e c G eta_max^2 / ((2 G eta_max^2 - e c) eps0)
//! eta_th(p) = sqrt(p e c eps0 / ((2 p eps0 - e c) G))
//! ```

use std::f64::consts::E;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{solve_ne, EquilibriumOutcome};
use crate::error::{AuditError, Result};
use crate::params::GameParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `p > p_th`: intensity first rises, then falls in `eta`.
    HighFine,
    /// `p <= p_th`: intensity rises in `eta` throughout.
    LowFine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AuditDirection {
    Increasing,
    Decreasing,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::HighFine => "high_fine",
            Regime::LowFine => "low_fine",
        }
    }
}

impl AuditDirection {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditDirection::Increasing => "increasing",
            AuditDirection::Decreasing => "decreasing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub p_th: f64,
    /// Defined only in the high-fine regime.
    pub eta_th: Option<f64>,
    pub regime: Regime,
    /// Direction of the equilibrium intensity at the report's `eta`.
    pub direction: AuditDirection,
    pub assumption_ok: bool,
}

impl RegimeReport {
    pub fn direction_at(&self, eta: f64) -> AuditDirection {
        match (self.regime, self.eta_th) {
            (Regime::HighFine, Some(th)) if eta > th => AuditDirection::Decreasing,
            _ => AuditDirection::Increasing,
        }
    }
}

/// Fine threshold separating the two regimes. Requires
/// `2 G eta_max^2 > e c`.
pub fn fine_threshold(params: &GameParams) -> Result<f64> {
    let a_max = params.g * params.eta_max * params.eta_max;
    let (lhs, rhs) = (2.0 * a_max, E * params.c);
    if lhs <= rhs {
        return Err(AuditError::AssumptionViolated { lhs, rhs });
    }
    Ok(E * params.c * a_max / ((lhs - rhs) * params.eps0))
}

/// Unlearning proportion at which the equilibrium intensity peaks.
pub fn eta_threshold(params: &GameParams) -> Result<f64> {
    let ec = E * params.c;
    let denom = 2.0 * params.p * params.eps0 - ec;
    if denom <= 0.0 {
        return Err(AuditError::Domain("eta_th requires 2 p eps0 > e c"));
    }
    Ok((params.p * ec * params.eps0 / (denom * params.g)).sqrt())
}

pub fn classify_regime(params: &GameParams) -> Result<RegimeReport> {
    let p_th = fine_threshold(params)?;
    let (regime, eta_th) = if params.p > p_th {
        (Regime::HighFine, Some(eta_threshold(params)?))
    } else {
        (Regime::LowFine, None)
    };
    let mut report = RegimeReport {
        p_th,
        eta_th,
        regime,
        direction: AuditDirection::Increasing,
        assumption_ok: true,
    };
    report.direction = report.direction_at(params.eta);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub outcome: Result<EquilibriumOutcome>,
}

/// Solves the equilibrium at every `eta` in `grid`, in parallel, returning
/// rows in grid order. Failures stay in their row.
pub fn sweep_eta(params: &GameParams, grid: &[f64]) -> Vec<SweepRow> {
    grid.par_iter()
        .map(|&eta| {
            let local = GameParams { eta, ..*params };
            let outcome = if eta > 0.0 { solve_ne(&local) } else {
                Err(AuditError::InvalidParam {
                    name: "eta",
                    value: eta,
                    reason: "sweep values must lie in (0, eta_max]",
                })
            };
            SweepRow { eta, outcome }
        })
        .collect()
}

/// Grid location of the interior maximum of the equilibrium intensity, if
/// the intensity changes direction inside the sweep.
pub fn intensity_turning_point(rows: &[SweepRow]) -> Option<f64> {
    let solved: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|o| (r.eta, o.m_star)))
        .collect();
    let best = solved
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))?
        .0;
    (best > 0 && best + 1 < solved.len()).then(|| solved[best].0)
}
