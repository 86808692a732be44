//! Primitive formulas of the auditing game: model utility, detection
//! probability and both players' payoffs.

use crate::error::{AuditError, Result};
use crate::params::{CertLevel, GameParams, StrategyProfile};

/// Model utility `-G eta^2 / eps`; zero when the operator skips unlearning.
pub fn model_utility(params: &GameParams, eps: CertLevel) -> Result<f64> {
    match eps {
        CertLevel::Infinite => Ok(0.0),
        CertLevel::Finite(e) if e > 0.0 => Ok(-params.loss_scale() / e),
        CertLevel::Finite(e) => Err(AuditError::NonPositiveCert(e)),
    }
}

/// Lower bound `xi * exp(-eps)` on the per-inspection missed-detection
/// probability of an `(eps, delta)`-certified unlearning test.
pub fn miss_bound(params: &GameParams, eps: CertLevel) -> f64 {
    match eps {
        CertLevel::Infinite => 0.0,
        CertLevel::Finite(e) => params.xi * (-e).exp(),
    }
}

/// Zero-tolerance detection probability `1 - xi^m exp(-m eps)`.
pub fn detect_prob(params: &GameParams, profile: StrategyProfile) -> f64 {
    let m = profile.m;
    if m == 0.0 {
        return 0.0;
    }
    match profile.eps {
        CertLevel::Infinite => 1.0,
        // 1 - exp(-m (eps - ln xi)), written with expm1 to keep precision
        // for small products.
        CertLevel::Finite(e) => -(-m * (e - params.xi.ln())).exp_m1(),
    }
}

/// Expected fine revenue minus inspection cost.
pub fn regulatory_surplus(params: &GameParams, profile: StrategyProfile) -> f64 {
    params.p * detect_prob(params, profile) - profile.m * params.c
}

/// `gamma1 * surplus - gamma2 * eps`. Undefined for an infinite level.
pub fn auditor_payoff(params: &GameParams, profile: StrategyProfile) -> Result<f64> {
    let eps = profile.eps.finite().ok_or(AuditError::UnboundedSocialCost)?;
    Ok(params.gamma1 * regulatory_surplus(params, profile) - params.gamma2 * eps)
}

/// Operator payoff: utility minus the expected fine and corrective loss.
pub fn operator_payoff(params: &GameParams, profile: StrategyProfile) -> Result<f64> {
    let u = model_utility(params, profile.eps)?;
    let u0 = -params.loss_scale() / params.eps0;
    let detect = detect_prob(params, profile);
    if detect == 0.0 {
        return Ok(u);
    }
    Ok(u - (params.p + u - u0) * detect)
}

/// Derivative of the operator payoff with respect to a finite `eps`.
///
/// Factors as `xi^m e^{-m eps} [a/eps^2 - m (p + a/eps0 - a/eps)]` with
/// `a = G eta^2`; the bracket alone decides the sign.
pub(crate) fn operator_marginal_sign_term(params: &GameParams, eps: f64, m: f64) -> f64 {
    let a = params.loss_scale();
    a / (eps * eps) - m * (params.p + a / params.eps0 - a / eps)
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
    fn utility_values() {
        let p = ideal();
        assert_relative_eq!(model_utility(&p, CertLevel::Finite(1.0)).unwrap(), -5.0);
        assert_eq!(model_utility(&p, CertLevel::Infinite).unwrap(), 0.0);
        let p2 = GameParams { eta: 0.02, ..p };
        assert_relative_eq!(
            model_utility(&p2, CertLevel::Finite(0.5)).unwrap(),
            -1.6,
            max_relative = 1e-14
        );
        assert!(model_utility(&p, CertLevel::Finite(0.0)).is_err());
        assert!(model_utility(&p, CertLevel::Finite(-2.0)).is_err());
    }

    #[test]
    fn miss_bound_values() {
        assert_eq!(miss_bound(&ideal(), CertLevel::Finite(0.0)), 1.0);
        let p = GameParams::default().with_hypothesis_test(1e-9, 0.05);
        // 0.949999999 * e^-1
        assert_relative_eq!(
            miss_bound(&p, CertLevel::Finite(1.0)),
            0.349_485_468_744_990_76,
            max_relative = 1e-12
        );
        let p = GameParams { xi: 0.99, ..ideal() };
        assert_eq!(miss_bound(&p, CertLevel::Infinite), 0.0);
    }

    #[test]
    fn detect_values() {
        let p = ideal();
        assert_eq!(detect_prob(&p, StrategyProfile::finite(2.0, 0.0)), 0.0);
        assert_eq!(detect_prob(&p, StrategyProfile { eps: CertLevel::Infinite, m: 0.0 }), 0.0);
        assert_eq!(detect_prob(&p, StrategyProfile { eps: CertLevel::Infinite, m: 0.5 }), 1.0);
        assert_relative_eq!(
            detect_prob(&p, StrategyProfile::finite(0.14055, 7.3535)),
            1.0 - (-7.3535f64 * 0.14055).exp(),
            max_relative = 1e-14
        );
        let q = GameParams { xi: 0.99, ..p };
        // 1 - 0.99^10 e^-1
        assert_relative_eq!(
            detect_prob(&q, StrategyProfile::finite(0.1, 10.0)),
            0.667_296_427_640_291_5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn surplus_and_auditor_payoff() {
        let p = GameParams {
            gamma1: 0.5,
            gamma2: 0.5,
            ..ideal()
        };
        assert_eq!(regulatory_surplus(&p, StrategyProfile::finite(3.0, 0.0)), 0.0);
        let peak = StrategyProfile::finite(std::f64::consts::E / 20.0, 20.0 / std::f64::consts::E);
        assert_relative_eq!(
            regulatory_surplus(&p, peak),
            20.0 * (1.0 - (-1.0f64).exp()) - 20.0 / std::f64::consts::E,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            auditor_payoff(&p, StrategyProfile::finite(1.0, 0.0)).unwrap(),
            -0.5
        );
        assert_eq!(
            auditor_payoff(&p, StrategyProfile { eps: CertLevel::Infinite, m: 1.0 }),
            Err(AuditError::UnboundedSocialCost)
        );
        let pure = GameParams {
            gamma1: 1.0,
            gamma2: 0.0,
            ..p
        };
        let prof = StrategyProfile::finite(0.2, 4.0);
        assert_eq!(
            auditor_payoff(&pure, prof).unwrap(),
            regulatory_surplus(&pure, prof)
        );
    }

    #[test]
    fn operator_payoff_values() {
        let p = ideal();
        let inf0 = StrategyProfile { eps: CertLevel::Infinite, m: 0.0 };
        assert_eq!(operator_payoff(&p, inf0).unwrap(), 0.0);
        assert_relative_eq!(operator_payoff(&p, StrategyProfile::finite(1.0, 0.0)).unwrap(), -5.0);
        let inf1 = StrategyProfile { eps: CertLevel::Infinite, m: 1.0 };
        assert_relative_eq!(operator_payoff(&p, inf1).unwrap(), -20.0 - 50.0);
        let prof = StrategyProfile::finite(0.14055, 7.3535);
        let u = -5.0 / 0.14055;
        let d = 1.0 - (-7.3535f64 * 0.14055).exp();
        assert_relative_eq!(
            operator_payoff(&p, prof).unwrap(),
            u - (20.0 + u + 50.0) * d,
            max_relative = 1e-13
        );
        assert!((operator_payoff(&p, prof).unwrap() + 57.76).abs() < 0.01);
    }

    #[test]
    fn corrective_loss_nonnegative_above_eps0() {
        let p = ideal();
        let u0 = model_utility(&p, CertLevel::Finite(p.eps0)).unwrap();
        for k in 0..50 {
            let e = p.eps0 * (1.0 + k as f64 * 0.3);
            assert!(model_utility(&p, CertLevel::Finite(e)).unwrap() - u0 >= 0.0);
        }
    }
}
