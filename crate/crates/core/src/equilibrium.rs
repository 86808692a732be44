//! Nash equilibrium of the undisclosed-auditing game.
//!
//! With `xi = 1` the equilibrium level is the unique root on `(c/p, inf)` of
//!
//! ```text
//! ((p + a/eps0) eps - a) ln(p eps / c) = a,        a = G eta^2
//! ```
//!
//! and the intensity is the auditor's best response to it. For `xi < 1` a
//! damped alternating best-response iteration is used instead.

use serde::{Deserialize, Serialize};

use crate::best_response::{auditor_best_response, operator_best_response};
use crate::error::{AuditError, Result};
use crate::model::{self, detect_prob};
use crate::numeric::{bisect, log_grid};
use crate::params::{CertLevel, GameParams, StrategyProfile};

/// Upper end of the root scan.
pub const SCAN_UPPER: f64 = 1e9;
/// Ratio between consecutive scan points.
const SCAN_RATIO: f64 = 1.25;
const POLISH_STEPS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveMethod {
    ClosedFormNE,
    NumericFixedPoint,
    /// Non-strategic risk-based benchmark; see [`crate::tra`].
    RiskBased,
}

impl SolveMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveMethod::ClosedFormNE => "closed_form_ne",
            SolveMethod::NumericFixedPoint => "numeric_fixed_point",
            SolveMethod::RiskBased => "risk_based",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Equilibrium-condition residual at the returned level. For the closed
    /// form this is the root residual; for the fixed point it is the relative
    /// best-response mismatch.
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub method: SolveMethod,
    /// Sign changes seen while scanning for the root; `1` certifies
    /// uniqueness on the scan grid.
    pub sign_changes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOutcome {
    pub eps_star: CertLevel,
    pub m_star: f64,
    pub detect: f64,
    pub surplus: f64,
    /// `-inf` when the operator ignores deletion (only possible off the
    /// equilibrium path, e.g. in the risk-based benchmark).
    pub auditor_payoff: f64,
    pub operator_payoff: f64,
    pub diagnostics: Diagnostics,
}

impl EquilibriumOutcome {
    pub(crate) fn evaluate(params: &GameParams, eps: CertLevel, m: f64, diagnostics: Diagnostics) -> Result<Self> {
        let profile = StrategyProfile::new(eps, m)?;
        let auditor_payoff = match model::auditor_payoff(params, profile) {
            Ok(v) => v,
            Err(AuditError::UnboundedSocialCost) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        Ok(Self {
            eps_star: eps,
            m_star: m,
            detect: detect_prob(params, profile),
            surplus: model::regulatory_surplus(params, profile),
            auditor_payoff,
            operator_payoff: model::operator_payoff(params, profile)?,
            diagnostics,
        })
    }

    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile {
            eps: self.eps_star,
            m: self.m_star,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    /// Weight on the new best response when averaging `ln eps`.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Initial `(eps, m)`.
    pub start: (f64, f64),
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            tol: 1e-10,
            max_iter: 10_000,
            start: (1.0, 1.0),
        }
    }
}

/// Left side minus right side of the equilibrium condition.
pub fn ne_residual(params: &GameParams, eps: f64) -> f64 {
    let a = params.loss_scale();
    ((params.p + a / params.eps0) * eps - a) * (params.p * eps / params.c).ln() - a
}

/// `Detect(m*(eps), eps) - Detect(m, eps*(m))`: the gap between detection
/// probabilities under each player's best response.
pub fn auxiliary_j(params: &GameParams, eps: CertLevel, m: f64) -> Result<f64> {
    let e = eps.finite().filter(|e| *e > 0.0).ok_or(AuditError::NonPositiveCert(eps.value()))?;
    let m_resp = auditor_best_response(params, eps)?.m;
    let eps_resp = operator_best_response(params, m)?;
    let lhs = detect_prob(params, StrategyProfile { eps: CertLevel::Finite(e), m: m_resp });
    let rhs = detect_prob(params, StrategyProfile { eps: eps_resp, m });
    Ok(lhs - rhs)
}

/// [`auxiliary_j`] along the auditor's response curve, `m = m*(eps)`.
pub fn auxiliary_j_on_response(params: &GameParams, eps: f64) -> Result<f64> {
    let level = CertLevel::new(eps)?;
    let m = auditor_best_response(params, level)?.m;
    auxiliary_j(params, level, m)
}

/// Unique Nash equilibrium. Dispatches to [`solve_ne_numeric`] when `xi < 1`.
pub fn solve_ne(params: &GameParams) -> Result<EquilibriumOutcome> {
    params.validate()?;
    if params.p <= 0.0 {
        return Err(AuditError::DegenerateFine);
    }
    if !params.is_ideal_detection() {
        return solve_ne_numeric(params, &FixedPointConfig::default());
    }
    let a = params.loss_scale();
    let lo = params.c / params.p * (1.0 + 1e-9);
    let f = |e: f64| ne_residual(params, e);

    let mut bracket = None;
    let mut sign_changes = 0;
    let (mut prev_x, mut prev_f) = (lo, f(lo));
    let mut x = lo;
    while x < SCAN_UPPER {
        x = (x * SCAN_RATIO).min(SCAN_UPPER);
        let fx = f(x);
        if fx.signum() != prev_f.signum() {
            sign_changes += 1;
            bracket.get_or_insert((prev_x, x));
        }
        prev_x = x;
        prev_f = fx;
    }
    let (blo, bhi) = bracket.ok_or(AuditError::NoRoot { upper: SCAN_UPPER })?;
    let root = bisect(f, blo, bhi, 1e-12 * a, 400).ok_or(AuditError::NoRoot { upper: SCAN_UPPER })?;
    let eps = polish_fixed_point(params, root.root, |e| f(e).abs() <= 1e-10 * a)?;
    let m = auditor_best_response(params, CertLevel::Finite(eps))?.m;
    EquilibriumOutcome::evaluate(
        params,
        CertLevel::Finite(eps),
        m,
        Diagnostics {
            residual: f(eps),
            iterations: root.iterations,
            bracket: (blo, bhi),
            method: SolveMethod::ClosedFormNE,
            sign_changes,
        },
    )
}

/// Damped alternating best responses, averaging in `ln eps`.
pub fn solve_ne_numeric(params: &GameParams, config: &FixedPointConfig) -> Result<EquilibriumOutcome> {
    params.validate()?;
    if params.p <= 0.0 {
        return Err(AuditError::DegenerateFine);
    }
    let w = config.damping;
    let (mut eps, mut m) = config.start;
    let mut previous = (eps, m);
    let mut converged = None;
    for k in 1..=config.max_iter {
        let m_next = auditor_best_response(params, CertLevel::Finite(eps))?.m;
        let eps_next = match operator_best_response(params, m_next)? {
            CertLevel::Finite(t) => ((1.0 - w) * eps.ln() + w * t.ln()).exp(),
            CertLevel::Infinite => eps * std::f64::consts::E,
        };
        previous = (eps, m);
        let done = (eps_next - eps).abs() <= config.tol * eps
            && (m_next - m).abs() <= config.tol * m_next.max(f64::MIN_POSITIVE);
        eps = eps_next;
        m = m_next;
        if done {
            converged = Some(k);
            break;
        }
    }
    let iterations = converged.ok_or(AuditError::NonConvergence {
        iterations: config.max_iter,
        last: (eps, m),
        previous,
    })?;
    let eps = polish_fixed_point(params, eps, |_| true)?;
    let m = auditor_best_response(params, CertLevel::Finite(eps))?.m;
    let back = operator_best_response(params, m)?.value();
    let eff_hat = params.c / params.p + params.xi.ln();
    let scan_lo = eff_hat.max(0.0) + params.c / params.p * 1e-9;
    let sign_changes = count_fixed_point_crossings(params, &log_grid(scan_lo.max(1e-12), 1e6, 128))?;
    EquilibriumOutcome::evaluate(
        params,
        CertLevel::Finite(eps),
        m,
        Diagnostics {
            residual: (back - eps).abs() / eps,
            iterations,
            bracket: (previous.0.min(eps), previous.0.max(eps)),
            method: SolveMethod::NumericFixedPoint,
            sign_changes,
        },
    )
}

/// Sign changes of `eps*(m*(eps)) - eps` over `grid`.
pub fn count_fixed_point_crossings(params: &GameParams, grid: &[f64]) -> Result<usize> {
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for &e in grid {
        let m = auditor_best_response(params, CertLevel::Finite(e))?.m;
        let g = operator_best_response(params, m)?.value() - e;
        if let Some(p) = prev {
            if p.signum() != g.signum() {
                changes += 1;
            }
        }
        prev = Some(g);
    }
    Ok(changes)
}

/// Iterates `eps <- eps*(m*(eps))` from a converged estimate until it is an
/// exact floating-point fixed point, so that re-deriving either player's
/// response reproduces the equilibrium bit for bit. Falls back to the input
/// if the iteration drifts or leaves `accept`.
///
/// Rounding in the two responses means such a float need not exist; the
/// map then cycles between neighbouring floats and the last iterate is
/// kept, within an ulp or two of the true equilibrium.
fn polish_fixed_point(params: &GameParams, eps: f64, accept: impl Fn(f64) -> bool) -> Result<f64> {
    let mut current = eps;
    for _ in 0..POLISH_STEPS {
        let m = auditor_best_response(params, CertLevel::Finite(current))?.m;
        let next = match operator_best_response(params, m)? {
            CertLevel::Finite(v) => v,
            CertLevel::Infinite => return Ok(eps),
        };
        if next == current {
            return Ok(current);
        }
        if (next - eps).abs() > 1e-9 * eps || !accept(next) {
            return Ok(eps);
        }
        current = next;
    }
    Ok(current)
}
