use thiserror::Error;

pub type Result<T> = std::result::Result<T, AuditError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("certification level must be positive, got {0}")]
    NonPositiveCert(f64),

    #[error("inspection intensity must be nonnegative, got {0}")]
    NegativeIntensity(f64),

    /// The auditor's social term `-eps` has no finite value when the
    /// operator ignores deletion requests entirely.
    #[error("social cost is unbounded for an infinite certification level")]
    UnboundedSocialCost,

    #[error("non-compliance fine is zero; auditing is never profitable")]
    DegenerateFine,

    #[error("no sign change of the equilibrium residual below eps = {upper}")]
    NoRoot { upper: f64 },

    #[error(
        "fixed point did not converge after {iterations} iterations \
         (last (eps, m) = ({:.6e}, {:.6e}), previous = ({:.6e}, {:.6e}))",
        last.0, last.1, previous.0, previous.1
    )]
    NonConvergence {
        iterations: usize,
        last: (f64, f64),
        previous: (f64, f64),
    },

    #[error("operator payoff has {} separated local maxima on the bracketing grid: {maxima:?}", maxima.len())]
    NonUnimodal { maxima: Vec<f64> },

    #[error("maximizer sits on the search boundary at {at}")]
    BoundaryMaximum { at: f64 },

    #[error("regime assumption 2*G*eta_max^2 > e*c violated ({lhs} <= {rhs})")]
    AssumptionViolated { lhs: f64, rhs: f64 },

    #[error("threshold undefined: {0}")]
    Domain(&'static str),

    #[error("simulation requires a finite certification level")]
    InfiniteCertSimulation,

    #[error("trial count must be at least 1")]
    ZeroTrials,
}
