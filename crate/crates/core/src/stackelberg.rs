//! Disclosed auditing: the auditor commits to `m` first and the operator
//! best-responds, so the auditor maximizes
//! `Q(m) = gamma1 (p Detect(m, eps(m)) - m c) - gamma2 eps(m)`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::best_response::operator_best_response;
use crate::equilibrium::{solve_ne, EquilibriumOutcome};
use crate::error::{AuditError, Result};
use crate::model::{self, detect_prob};
use crate::numeric::{argmax, bisect, golden_section_max, log_grid};
use crate::params::{CertLevel, GameParams, StrategyProfile};

pub const SPE_GRID_LO: f64 = 1e-6;
pub const SPE_GRID_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeDiagnostics {
    /// Central finite-difference estimate of `dQ/dm` at the maximizer.
    pub foc_residual: f64,
    pub bracket: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeOutcome {
    pub m_d: f64,
    pub eps_d: CertLevel,
    pub q_value: f64,
    pub surplus_d: f64,
    pub auditor_payoff_d: f64,
    pub operator_payoff_d: f64,
    pub diagnostics: SpeDiagnostics,
}

/// The operator's stage-two choice; identical to the simultaneous-move
/// best response.
pub fn stage2_response(params: &GameParams, m_d: f64) -> Result<CertLevel> {
    operator_best_response(params, m_d)
}

pub fn committed_objective(params: &GameParams, m_d: f64) -> Result<f64> {
    if m_d.is_nan() || m_d < 0.0 {
        return Err(AuditError::NegativeIntensity(m_d));
    }
    let eps = stage2_response(params, m_d)?;
    let e = eps.finite().ok_or(AuditError::UnboundedSocialCost)?;
    let surplus = params.p * detect_prob(params, StrategyProfile { eps, m: m_d }) - m_d * params.c;
    Ok(params.gamma1 * surplus - params.gamma2 * e)
}

/// Upper end of the intensity search, `100 max(1, p / (e c))`.
pub fn spe_upper_bound(params: &GameParams) -> f64 {
    100.0 * (params.p / (E * params.c)).max(1.0)
}

pub fn solve_spe(params: &GameParams) -> Result<SpeOutcome> {
    params.validate()?;
    if params.p <= 0.0 {
        return Err(AuditError::DegenerateFine);
    }
    let upper = spe_upper_bound(params);
    let q = |m: f64| committed_objective(params, m).unwrap_or(f64::NEG_INFINITY);
    let grid = log_grid(SPE_GRID_LO, upper, SPE_GRID_POINTS);
    let values: Vec<f64> = grid.iter().map(|&m| q(m)).collect();
    let best = argmax(&values).ok_or(AuditError::BoundaryMaximum { at: upper })?;
    if best + 1 == grid.len() {
        return Err(AuditError::BoundaryMaximum { at: upper });
    }
    if best == 0 {
        return Err(AuditError::BoundaryMaximum { at: SPE_GRID_LO });
    }
    let (lo, hi) = (grid[best - 1], grid[best + 1]);
    let golden = golden_section_max(|x| q(x.exp()), lo.ln(), hi.ln(), 1e-12, 500);
    let mut m_d = golden.arg.exp();
    let mut q_value = golden.value;
    if values[best] > q_value {
        m_d = grid[best];
        q_value = values[best];
    }
    let h = 1e-6 * m_d.max(1.0);
    let foc_residual = (q(m_d + h) - q((m_d - h).max(f64::MIN_POSITIVE))) / (2.0 * h);

    let eps_d = stage2_response(params, m_d)?;
    let profile = StrategyProfile { eps: eps_d, m: m_d };
    Ok(SpeOutcome {
        m_d,
        eps_d,
        q_value,
        surplus_d: model::regulatory_surplus(params, profile),
        auditor_payoff_d: model::auditor_payoff(params, profile)?,
        operator_payoff_d: model::operator_payoff(params, profile)?,
        diagnostics: SpeDiagnostics {
            foc_residual,
            bracket: (lo, hi),
        },
    })
}

/// Undisclosed (Nash) versus disclosed (Stackelberg) auditing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransparencyComparison {
    pub ne: EquilibriumOutcome,
    pub spe: SpeOutcome,
    /// `eps_d - eps*`
    pub eps_gap: f64,
    /// `m_d - m*`
    pub m_gap: f64,
    pub surplus_gap: f64,
    pub payoff_gap: f64,
    pub gamma_ratio: f64,
    /// Disclosure raises the level and lowers the intensity simultaneously.
    pub laxer_under_disclosure: bool,
}

pub fn compare_transparency(params: &GameParams) -> Result<TransparencyComparison> {
    let ne = solve_ne(params)?;
    let spe = solve_spe(params)?;
    let eps_gap = spe.eps_d.value() - ne.eps_star.value();
    let m_gap = spe.m_d - ne.m_star;
    Ok(TransparencyComparison {
        ne,
        spe,
        eps_gap,
        m_gap,
        surplus_gap: spe.surplus_d - ne.surplus,
        payoff_gap: spe.auditor_payoff_d - ne.auditor_payoff,
        gamma_ratio: params.gamma1 / params.gamma2,
        laxer_under_disclosure: eps_gap > 0.0 && m_gap < 0.0,
    })
}

/// Copy of `params` with `gamma1 / gamma2 = ratio` and `gamma1 + gamma2 = 1`.
pub fn with_gamma_ratio(params: &GameParams, ratio: f64) -> GameParams {
    GameParams {
        gamma1: ratio / (1.0 + ratio),
        gamma2: 1.0 / (1.0 + ratio),
        ..*params
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaThreshold {
    pub ratio: f64,
    pub bracket: (f64, f64),
}

/// Weight ratio `gamma1 / gamma2` at which disclosure starts to raise the
/// regulatory surplus, located by bisection in `ln ratio` on the sign of the
/// surplus gap. `None` if the gap has the same sign at both ends.
pub fn locate_gamma_threshold(params: &GameParams, lo: f64, hi: f64) -> Result<Option<GammaThreshold>> {
    let gap = |ln_r: f64| -> Result<f64> {
        Ok(compare_transparency(&with_gamma_ratio(params, ln_r.exp()))?.surplus_gap)
    };
    let (flo, fhi) = (gap(lo.ln())?, gap(hi.ln())?);
    if flo.signum() == fhi.signum() {
        return Ok(None);
    }
    let mut failure = None;
    let root = bisect(
        |x| match gap(x) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo.ln(),
        hi.ln(),
        0.0,
        60,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(root.map(|r| GammaThreshold {
        ratio: r.root.exp(),
        bracket: (r.bracket.0.exp(), r.bracket.1.exp()),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal() -> GameParams {
        GameParams {
            xi: 1.0,
            ..Default::default()
        }
    }

    #[test]
    fn stage2_delegates() {
        let p = ideal();
        assert_eq!(stage2_response(&p, 0.0).unwrap(), CertLevel::Infinite);
        assert_eq!(
            stage2_response(&p, 7.3535).unwrap(),
            operator_best_response(&p, 7.3535).unwrap()
        );
    }

    #[test]
    fn committed_objective_matches_ne_payoff_at_ne_intensity() {
        let p = ideal();
        let ne = solve_ne(&p).unwrap();
        let q = committed_objective(&p, ne.m_star).unwrap();
        assert!((q - ne.auditor_payoff).abs() < 1e-12);
        assert!((q - 2.695).abs() < 5e-3);
    }

    #[test]
    fn committed_objective_edges() {
        let p = ideal();
        assert_eq!(committed_objective(&p, 0.0), Err(AuditError::UnboundedSocialCost));
        let tiny = committed_objective(&p, 1e-6).unwrap();
        let eps = stage2_response(&p, 1e-6).unwrap().value();
        assert!(eps > 100.0);
        assert!(tiny < -0.4 * eps);
        let pure = GameParams { gamma1: 1.0, gamma2: 1e-12, ..p };
        assert!(committed_objective(&pure, 1e6).unwrap() < -1e5);
    }

    #[test]
    fn disclosure_never_hurts_auditor() {
        let p = ideal();
        let cmp = compare_transparency(&p).unwrap();
        assert!(cmp.payoff_gap >= -1e-9);
        assert!(cmp.spe.diagnostics.foc_residual.abs() <= 1e-6 * cmp.spe.q_value.abs().max(1.0));
        assert!(committed_objective(&p, cmp.ne.m_star).unwrap() <= cmp.spe.q_value);
        assert_eq!(cmp, compare_transparency(&p).unwrap());
    }

    #[test]
    fn weight_extremes() {
        let surplus_heavy = with_gamma_ratio(&ideal(), 1e3);
        let cmp = compare_transparency(&surplus_heavy).unwrap();
        assert!(cmp.eps_gap > 0.0 && cmp.m_gap < 0.0 && cmp.surplus_gap > 0.0);
        assert!(cmp.laxer_under_disclosure);

        let social_heavy = with_gamma_ratio(&GameParams { p: 5.0, ..ideal() }, 0.1);
        let cmp = compare_transparency(&social_heavy).unwrap();
        assert!(cmp.eps_gap < 0.0);
        assert!(!cmp.laxer_under_disclosure);
    }

    #[test]
    fn gamma_threshold_located() {
        let p = GameParams { p: 5.0, ..ideal() };
        let t = locate_gamma_threshold(&p, 0.1, 0.5).unwrap().unwrap();
        assert!(t.ratio > 0.1 && t.ratio < 0.5);
        let below = compare_transparency(&with_gamma_ratio(&p, t.bracket.0 * 0.99)).unwrap();
        let above = compare_transparency(&with_gamma_ratio(&p, t.bracket.1 * 1.01)).unwrap();
        assert!(below.surplus_gap <= 0.0);
        assert!(above.surplus_gap > 0.0);
    }
}
