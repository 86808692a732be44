//! Exogenous game parameters and the strategy types shared by every solver.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Absolute tolerance used for equality tests on parameters.
pub const PARAM_TOL: f64 = 1e-12;

/// All exogenous constants of the auditing game.
///
/// Defaults follow the reference experiment: `G = 2000`, `xi = 0.99`,
/// `eps0 = 0.1`, `c = 1`, `gamma1 = gamma2 = 0.5`, with `eta = 0.05`,
/// `p = 20` and `eta_max = 0.25`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Consolidated model characteristic.
    #[serde(rename = "G")]
    pub g: f64,
    /// Unlearning data proportion (deleted / total samples).
    pub eta: f64,
    pub eta_max: f64,
    /// Non-compliance fine.
    pub p: f64,
    /// Unit cost per inspection.
    pub c: f64,
    /// Minimum deletion level enforced by corrective unlearning.
    pub eps0: f64,
    /// Composite detection-confidence parameter `1 - delta - pfa`.
    pub xi: f64,
    pub delta: Option<f64>,
    pub pfa: Option<f64>,
    /// Weight on regulatory surplus.
    pub gamma1: f64,
    /// Weight on social concern.
    pub gamma2: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            g: 2000.0,
            eta: 0.05,
            eta_max: 0.25,
            p: 20.0,
            c: 1.0,
            eps0: 0.1,
            xi: 0.99,
            delta: None,
            pfa: None,
            gamma1: 0.5,
            gamma2: 0.5,
        }
    }
}

impl GameParams {
    /// Sets `xi = 1 - delta - pfa` from the hypothesis-testing constants.
    pub fn with_hypothesis_test(mut self, delta: f64, pfa: f64) -> Self {
        self.delta = Some(delta);
        self.pfa = Some(pfa);
        self.xi = 1.0 - delta - pfa;
        self
    }

    /// `G * eta^2`, the scale of the utility loss from unlearning.
    #[inline]
    pub fn loss_scale(&self) -> f64 {
        self.g * self.eta * self.eta
    }

    /// True when the closed forms (which assume `xi = 1`) apply.
    #[inline]
    pub fn is_ideal_detection(&self) -> bool {
        (1.0 - self.xi).abs() <= PARAM_TOL
    }

    /// The `xi` actually used by the model. A directly given `xi` wins over
    /// `(delta, pfa)` when the two disagree.
    pub fn resolved_xi(&self) -> f64 {
        if let (Some(delta), Some(pfa)) = (self.delta, self.pfa) {
            let derived = 1.0 - delta - pfa;
            if (derived - self.xi).abs() > PARAM_TOL {
                log::warn!(
                    "xi = {} disagrees with 1 - delta - pfa = {}; using xi",
                    self.xi,
                    derived
                );
            }
        }
        self.xi
    }

    pub fn validate(&self) -> Result<()> {
        fn check(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(AuditError::InvalidParam {
                    name,
                    value,
                    reason,
                })
            }
        }
        let finite = |v: f64| v.is_finite();
        check(finite(self.g) && self.g > 0.0, "G", self.g, "must be positive")?;
        check(
            finite(self.eta_max) && self.eta_max > 0.0 && self.eta_max <= 1.0,
            "eta_max",
            self.eta_max,
            "must lie in (0, 1]",
        )?;
        check(
            finite(self.eta) && self.eta >= 0.0 && self.eta <= self.eta_max + PARAM_TOL,
            "eta",
            self.eta,
            "must lie in [0, eta_max]",
        )?;
        check(finite(self.p) && self.p >= 0.0, "p", self.p, "must be nonnegative")?;
        check(finite(self.c) && self.c > 0.0, "c", self.c, "must be positive")?;
        check(finite(self.eps0) && self.eps0 > 0.0, "eps0", self.eps0, "must be positive")?;
        check(
            finite(self.xi) && self.xi > 0.0 && self.xi <= 1.0,
            "xi",
            self.xi,
            "must lie in (0, 1]",
        )?;
        if let Some(delta) = self.delta {
            check((0.0..=1.0).contains(&delta), "delta", delta, "must lie in [0, 1]")?;
        }
        if let Some(pfa) = self.pfa {
            check((0.0..1.0).contains(&pfa), "pfa", pfa, "must lie in [0, 1)")?;
        }
        check(
            finite(self.gamma1) && self.gamma1 > 0.0,
            "gamma1",
            self.gamma1,
            "must be positive",
        )?;
        check(
            finite(self.gamma2) && self.gamma2 > 0.0,
            "gamma2",
            self.gamma2,
            "must be positive",
        )?;
        Ok(())
    }
}

/// Unlearning certification level on the extended positive reals.
///
/// `Infinite` encodes an operator that ignores deletion requests.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub enum CertLevel {
    Finite(f64),
    Infinite,
}

impl CertLevel {
    /// Builds a finite level, rejecting `eps <= 0` and NaN. `+inf` maps to
    /// [`CertLevel::Infinite`].
    pub fn new(eps: f64) -> Result<Self> {
        if eps == f64::INFINITY {
            Ok(CertLevel::Infinite)
        } else if eps > 0.0 && eps.is_finite() {
            Ok(CertLevel::Finite(eps))
        } else {
            Err(AuditError::NonPositiveCert(eps))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, CertLevel::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            CertLevel::Finite(v) => Some(v),
            CertLevel::Infinite => None,
        }
    }

    /// The value as an `f64`, with `Infinite` mapped to `+inf`.
    pub fn value(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for CertLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertLevel::Finite(v) => write!(f, "{v}"),
            CertLevel::Infinite => f.write_str("inf"),
        }
    }
}

/// One `(eps, m)` action pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    pub eps: CertLevel,
    pub m: f64,
}

impl StrategyProfile {
    pub fn new(eps: CertLevel, m: f64) -> Result<Self> {
        if m.is_nan() || m < 0.0 {
            return Err(AuditError::NegativeIntensity(m));
        }
        Ok(Self { eps, m })
    }

    /// Shorthand for a finite profile; panics on invalid input, so it is only
    /// meant for literals.
    pub fn finite(eps: f64, m: f64) -> Self {
        Self::new(CertLevel::new(eps).expect("positive eps"), m).expect("nonnegative m")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        GameParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let p = GameParams {
            eta: 0.3,
            ..Default::default()
        };
        assert!(matches!(
            p.validate(),
            Err(AuditError::InvalidParam { name: "eta", .. })
        ));
        let p = GameParams {
            xi: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = GameParams {
            gamma2: 0.0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn xi_from_hypothesis_test() {
        let p = GameParams::default().with_hypothesis_test(1e-9, 0.05);
        assert!((p.xi - 0.949999999).abs() < 1e-15);
        assert_eq!(p.resolved_xi(), p.xi);
    }

    #[test]
    fn direct_xi_wins() {
        let p = GameParams {
            xi: 0.99,
            delta: Some(0.0),
            pfa: Some(0.05),
            ..Default::default()
        };
        assert_eq!(p.resolved_xi(), 0.99);
    }

    #[test]
    fn cert_level_domain() {
        assert!(CertLevel::new(0.0).is_err());
        assert!(CertLevel::new(-1.0).is_err());
        assert!(CertLevel::new(f64::NAN).is_err());
        assert_eq!(CertLevel::new(f64::INFINITY).unwrap(), CertLevel::Infinite);
        assert_eq!(CertLevel::new(0.5).unwrap().value(), 0.5);
        assert!(StrategyProfile::new(CertLevel::Infinite, -1.0).is_err());
    }
}
