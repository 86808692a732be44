//! Monte Carlo simulation of the zero-tolerance audit.
//!
//! Trial `i` draws from its own ChaCha8 stream (`seed`, stream `i`), and the
//! parallel reduction only sums integer counts, so a result depends on
//! `(params, profile, config)` alone and not on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::model::{detect_prob, miss_bound, model_utility};
use crate::params::{CertLevel, GameParams, StrategyProfile};

const Z95: f64 = 1.96;
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SimMode {
    /// `floor(m)` inspections plus one more with probability `m - floor(m)`,
    /// each detecting independently.
    IntegerRandomized,
    /// One Bernoulli draw per trial at the closed-form detection probability.
    ContinuousFormula,
}

impl SimMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SimMode::IntegerRandomized => "integer_randomized",
            SimMode::ContinuousFormula => "continuous_formula",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub trials: u64,
    pub mode: SimMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100_000,
            mode: SimMode::ContinuousFormula,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub detect_hat: f64,
    pub surplus_hat: f64,
    pub operator_payoff_hat: f64,
    /// `1.96 sqrt(d (1 - d) / n)` for the detection estimate.
    pub half_width_95: f64,
    pub surplus_half_width_95: f64,
    pub operator_payoff_half_width_95: f64,
    pub trials_used: u64,
    pub mode: SimMode,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    detections: u64,
    inspections: u64,
    detected_inspections: u64,
    inspections_sq: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            detections: self.detections + o.detections,
            inspections: self.inspections + o.inspections,
            detected_inspections: self.detected_inspections + o.detected_inspections,
            inspections_sq: self.inspections_sq + o.inspections_sq,
        }
    }
}

pub fn simulate_audit(params: &GameParams, profile: StrategyProfile, config: &SimConfig) -> Result<SimResult> {
    if config.trials == 0 {
        return Err(AuditError::ZeroTrials);
    }
    let eps = profile.eps.finite().ok_or(AuditError::InfiniteCertSimulation)?;
    let m = profile.m;
    if m.is_nan() || m < 0.0 {
        return Err(AuditError::NegativeIntensity(m));
    }
    let per_test_detect = 1.0 - miss_bound(params, CertLevel::Finite(eps));
    let closed_form = detect_prob(params, profile);
    let base = m.floor();
    let frac = m - base;
    let base = base as u64;
    let mode = config.mode;
    let root = ChaCha8Rng::seed_from_u64(config.seed);

    let trial = |i: u64| -> Tally {
        let mut rng = root.clone();
        rng.set_stream(i);
        match mode {
            SimMode::ContinuousFormula => Tally {
                detections: u64::from(rng.random::<f64>() < closed_form),
                ..Tally::default()
            },
            SimMode::IntegerRandomized => {
                let extra = frac > 0.0 && rng.random::<f64>() < frac;
                let k = base + u64::from(extra);
                let detected = (0..k).any(|_| rng.random::<f64>() < per_test_detect);
                let d = u64::from(detected);
                Tally {
                    detections: d,
                    inspections: k,
                    detected_inspections: d * k,
                    inspections_sq: k * k,
                }
            }
        }
    };

    let chunks = config.trials.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(config.trials);
            (c * CHUNK..end).map(trial).fold(Tally::default(), Tally::merge)
        })
        .reduce(Tally::default, Tally::merge);

    let n = config.trials as f64;
    let d = tally.detections as f64 / n;
    let var_d = d * (1.0 - d);
    let (mean_cost, var_surplus) = match mode {
        SimMode::ContinuousFormula => (params.c * m, params.p * params.p * var_d),
        SimMode::IntegerRandomized => {
            let mean_k = tally.inspections as f64 / n;
            let var_k = tally.inspections_sq as f64 / n - mean_k * mean_k;
            let cov = tally.detected_inspections as f64 / n - d * mean_k;
            let var = params.p * params.p * var_d + params.c * params.c * var_k
                - 2.0 * params.p * params.c * cov;
            (params.c * mean_k, var.max(0.0))
        }
    };
    let u = model_utility(params, CertLevel::Finite(eps))?;
    let u0 = -params.loss_scale() / params.eps0;
    let stake = params.p + u - u0;
    let half_width_95 = Z95 * (var_d / n).sqrt();
    Ok(SimResult {
        detect_hat: d,
        surplus_hat: params.p * d - mean_cost,
        operator_payoff_hat: u - stake * d,
        half_width_95,
        surplus_half_width_95: Z95 * (var_surplus / n).sqrt(),
        operator_payoff_half_width_95: stake.abs() * half_width_95,
        trials_used: config.trials,
        mode,
    })
}

/// Exact detection probability under randomized integer inspection counts.
pub fn mixture_detect_prob(params: &GameParams, profile: StrategyProfile) -> f64 {
    let q = miss_bound(params, profile.eps);
    let lo = profile.m.floor();
    let f = profile.m - lo;
    let hit = |k: f64| 1.0 - q.powf(k);
    (1.0 - f) * hit(lo) + f * hit(lo + 1.0)
}

/// Mixture detection probability minus the continuous formula; never
/// positive because `1 - q^m` is concave in `m`.
pub fn jensen_gap(params: &GameParams, profile: StrategyProfile) -> f64 {
    let q = miss_bound(params, profile.eps);
    mixture_detect_prob(params, profile) - (1.0 - q.powf(profile.m))
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
    fn zero_intensity_never_detects() {
        for mode in [SimMode::ContinuousFormula, SimMode::IntegerRandomized] {
            let r = simulate_audit(
                &ideal(),
                StrategyProfile::finite(0.3, 0.0),
                &SimConfig { seed: 1, trials: 1000, mode },
            )
            .unwrap();
            assert_eq!(r.detect_hat, 0.0);
            assert_eq!(r.surplus_hat, 0.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let p = ideal();
        let inf = StrategyProfile { eps: CertLevel::Infinite, m: 1.0 };
        assert_eq!(
            simulate_audit(&p, inf, &SimConfig::default()),
            Err(AuditError::InfiniteCertSimulation)
        );
        let cfg = SimConfig { trials: 0, ..SimConfig::default() };
        assert_eq!(
            simulate_audit(&p, StrategyProfile::finite(0.5, 1.0), &cfg),
            Err(AuditError::ZeroTrials)
        );
    }

    #[test]
    fn continuous_mode_matches_formula() {
        let p = ideal();
        let prof = StrategyProfile::finite(0.5, 3.0);
        let r = simulate_audit(&p, prof, &SimConfig { seed: 7, trials: 100_000, mode: SimMode::ContinuousFormula })
            .unwrap();
        let exact = 1.0 - (-1.5f64).exp();
        assert!((r.detect_hat - exact).abs() <= 3.0 * r.half_width_95);
    }

    #[test]
    fn integer_mode_matches_mixture() {
        let p = ideal();
        let prof = StrategyProfile::finite(0.5, 2.5);
        let mix = mixture_detect_prob(&p, prof);
        assert_relative_eq!(
            mix,
            0.5 * (1.0 - (-1.0f64).exp()) + 0.5 * (1.0 - (-1.5f64).exp()),
            max_relative = 1e-14
        );
        let r = simulate_audit(&p, prof, &SimConfig { seed: 11, trials: 100_000, mode: SimMode::IntegerRandomized })
            .unwrap();
        assert!((r.detect_hat - mix).abs() <= 3.0 * r.half_width_95);
    }

    #[test]
    fn jensen_gap_values() {
        let p = ideal();
        assert_eq!(jensen_gap(&p, StrategyProfile::finite(0.5, 3.0)), 0.0);
        let g = jensen_gap(&p, StrategyProfile::finite(0.5, 2.5));
        assert!((g + 0.00897).abs() < 5e-5, "{g}");
        assert!(jensen_gap(&p, StrategyProfile::finite(1e-12, 0.5)).abs() < 1e-12);
    }

    #[test]
    fn seed_determinism() {
        let p = GameParams::default();
        let prof = StrategyProfile::finite(0.14, 7.35);
        let cfg = SimConfig { seed: 42, trials: 50_000, mode: SimMode::IntegerRandomized };
        let a = simulate_audit(&p, prof, &cfg).unwrap();
        let b = simulate_audit(&p, prof, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate_audit(&p, prof, &SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.detect_hat, c.detect_hat);
    }
}
