use alloc::string::String;

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature did not converge on [{a}, {b}] (estimated error {error:e})")]
    QuadratureNonConvergence { a: f64, b: f64, error: f64 },

    #[error("phonon correlations have not decayed by tau = {tau_max} ns (|G| ratio {ratio:e})")]
    InsufficientDecay { tau_max: f64, ratio: f64 },

    #[error("transition frequency {omega} ns^-1 is outside the tabulated bath range +/-{limit} ns^-1")]
    FrequencyOutOfRange { omega: f64, limit: f64 },

    #[error("Hermitian eigendecomposition failed to converge")]
    EigenFailure,

    #[error("time step {dt} ns exceeds the stability limit {dt_max} ns")]
    StepSizeViolation { dt: f64, dt_max: f64 },

    #[error("cavity has not decayed by the end of the run (<a^dag a> = {remaining:e})")]
    NotDecayed { remaining: f64 },

    #[error("no emission: the indistinguishability denominator vanishes")]
    NoEmission,

    #[error("tau coverage too short: time-averaged g1 still at {ratio:e} of its peak")]
    InsufficientTauCoverage { ratio: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
