//! Traditional risk-based auditing (TRA) baseline and the three-way
//! mechanism comparison against strategic undisclosed (SUA) and disclosed
//! (SDA) auditing.
//!
//! The TRA auditor ignores the operator's strategic response: it maximizes
//! surplus against a fixed belief about the certification level, and the
//! operator then best-responds to the resulting intensity. The default
//! belief is the mandated minimum `eps0`.

use serde::{Deserialize, Serialize};

use crate::best_response::{auditor_best_response, operator_best_response};
use crate::equilibrium::{solve_ne, Diagnostics, EquilibriumOutcome, SolveMethod};
use crate::error::{AuditError, Result};
use crate::params::{CertLevel, GameParams};
use crate::stackelberg::solve_spe;

/// Baselines smaller than this in magnitude are compared by absolute gap.
pub const NEAR_ZERO_BASELINE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraConfig {
    /// The auditor's non-strategic belief about the operator's level.
    pub eps_estimate: CertLevel,
}

impl TraConfig {
    pub fn default_for(params: &GameParams) -> Self {
        Self {
            eps_estimate: CertLevel::Finite(params.eps0),
        }
    }

    pub fn with_belief(eps: CertLevel) -> Self {
        Self { eps_estimate: eps }
    }
}

pub fn solve_tra(params: &GameParams, config: &TraConfig) -> Result<EquilibriumOutcome> {
    params.validate()?;
    if params.p <= 0.0 {
        return Err(AuditError::DegenerateFine);
    }
    let belief = config.eps_estimate;
    if belief.is_infinite() {
        return Err(AuditError::InvalidParam {
            name: "eps_estimate",
            value: f64::INFINITY,
            reason: "belief must be finite",
        });
    }
    let m = auditor_best_response(params, belief)?.m;
    let eps = operator_best_response(params, m)?;
    EquilibriumOutcome::evaluate(
        params,
        eps,
        m,
        Diagnostics {
            residual: 0.0,
            iterations: 0,
            bracket: (belief.value(), belief.value()),
            method: SolveMethod::RiskBased,
            sign_changes: 0,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismPoint {
    pub auditor_payoff: f64,
    pub operator_payoff: f64,
    pub eps: CertLevel,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Improvement {
    /// `100 (new - old) / |old|`
    Percent(f64),
    /// `new - old`, used when the baseline is near zero or infinite.
    AbsoluteGap(f64),
}

impl Improvement {
    pub fn between(old: f64, new: f64) -> Self {
        if !old.is_finite() || old.abs() < NEAR_ZERO_BASELINE {
            Improvement::AbsoluteGap(new - old)
        } else {
            Improvement::Percent(100.0 * (new - old) / old.abs())
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Improvement::Percent(v) | Improvement::AbsoluteGap(v) => v,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Improvement::Percent(_) => "percent",
            Improvement::AbsoluteGap(_) => "absolute",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairImprovement {
    pub auditor: Improvement,
    pub operator: Improvement,
}

impl PairImprovement {
    fn between(old: &MechanismPoint, new: &MechanismPoint) -> Self {
        Self {
            auditor: Improvement::between(old.auditor_payoff, new.auditor_payoff),
            operator: Improvement::between(old.operator_payoff, new.operator_payoff),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismComparison {
    pub tra: MechanismPoint,
    pub sua: MechanismPoint,
    pub sda: MechanismPoint,
    pub sua_vs_tra: PairImprovement,
    pub sda_vs_tra: PairImprovement,
    pub sda_vs_sua: PairImprovement,
}

impl From<&EquilibriumOutcome> for MechanismPoint {
    fn from(o: &EquilibriumOutcome) -> Self {
        Self {
            auditor_payoff: o.auditor_payoff,
            operator_payoff: o.operator_payoff,
            eps: o.eps_star,
            m: o.m_star,
        }
    }
}

pub fn compare_mechanisms(params: &GameParams, config: &TraConfig) -> Result<MechanismComparison> {
    let tra = MechanismPoint::from(&solve_tra(params, config)?);
    let sua = MechanismPoint::from(&solve_ne(params)?);
    let spe = solve_spe(params)?;
    let sda = MechanismPoint {
        auditor_payoff: spe.auditor_payoff_d,
        operator_payoff: spe.operator_payoff_d,
        eps: spe.eps_d,
        m: spe.m_d,
    };
    Ok(MechanismComparison {
        sua_vs_tra: PairImprovement::between(&tra, &sua),
        sda_vs_tra: PairImprovement::between(&tra, &sda),
        sda_vs_sua: PairImprovement::between(&sua, &sda),
        tra,
        sua,
        sda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ideal() -> GameParams {
        GameParams {
            xi: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn default_belief_composition() {
        let p = ideal();
        let out = solve_tra(&p, &TraConfig::default_for(&p)).unwrap();
        assert_relative_eq!(out.m_star, 10.0 * 2f64.ln(), max_relative = 1e-13);
        assert_eq!(out.eps_star, operator_best_response(&p, out.m_star).unwrap());
        assert_eq!(out.diagnostics.method, SolveMethod::RiskBased);
    }

    #[test]
    fn low_belief_means_no_audit() {
        let p = ideal();
        let out = solve_tra(&p, &TraConfig::with_belief(CertLevel::Finite(0.04))).unwrap();
        assert_eq!(out.m_star, 0.0);
        assert_eq!(out.eps_star, CertLevel::Infinite);
        assert_eq!(out.auditor_payoff, f64::NEG_INFINITY);
        assert!(solve_tra(&p, &TraConfig::with_belief(CertLevel::Infinite)).is_err());
    }

    #[test]
    fn self_consistent_belief_reproduces_nash() {
        for xi in [1.0, 0.99] {
            let p = GameParams { xi, ..ideal() };
            let ne = solve_ne(&p).unwrap();
            let cmp = compare_mechanisms(&p, &TraConfig::with_belief(ne.eps_star)).unwrap();
            assert_eq!(cmp.tra, cmp.sua);
            assert_eq!(cmp.sua_vs_tra.auditor.value(), 0.0);
            assert_eq!(cmp.sua_vs_tra.operator.value(), 0.0);
        }
    }

    #[test]
    fn improvement_is_sign_safe() {
        assert_eq!(Improvement::between(-2.0, -1.0), Improvement::Percent(50.0));
        assert_eq!(Improvement::between(2.0, 3.0), Improvement::Percent(50.0));
        assert_eq!(Improvement::between(1e-9, 1.0).kind(), "absolute");
        assert_eq!(
            Improvement::between(f64::NEG_INFINITY, 1.0),
            Improvement::AbsoluteGap(f64::INFINITY)
        );
    }

    #[test]
    fn disclosed_beats_undisclosed() {
        let p = ideal();
        let cmp = compare_mechanisms(&p, &TraConfig::default_for(&p)).unwrap();
        assert!(cmp.sda.auditor_payoff >= cmp.sua.auditor_payoff);
    }
}
