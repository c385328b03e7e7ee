use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource cap exceeded: {what} needs {needed} items, cap is {cap}")]
    ResourceCap {
        what: String,
        needed: u128,
        cap: u128,
    },

    #[error("power iteration did not converge after {iterations} iterations (last relative change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("variance estimators disagree: orbit {orbit:e}, finite difference {finite_difference:e}")]
    CrossCheck { orbit: f64, finite_difference: f64 },

    #[error("nonpositive denominator {0:e} in pressure norm")]
    NonpositiveDenominator(f64),

    #[error("normal form denominator vanishes at index {0}")]
    DenominatorZero(usize),

    #[error("point is not on the Blaschke locus")]
    NotBlaschke,

    #[error("ambiguous pairing: two assignments of conjugate coordinates tie")]
    AmbiguousPairing,

    #[error("cycle tracking failed at t = {t_fail:e}; last good t = {last_good:e}: {reason}")]
    Tracking {
        t_fail: f64,
        last_good: f64,
        reason: String,
    },

    #[error("log-multiplier branch jumps between nodes")]
    BranchJump,

    #[error("fixed points collide along the path near t = {0:e}")]
    Collision(f64),

    #[error("Bowen bracket failure: pressure has the same sign at both ends ({lo:e}, {hi:e})")]
    Bracket { lo: f64, hi: f64 },

    #[error("data error: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
