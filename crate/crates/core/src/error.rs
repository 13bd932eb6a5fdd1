use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// `kp`, `kd` and `T` must all be strictly positive and finite.
    #[error("auxiliary parameters out of domain: kp={kp}, kd={kd}, T={time_constant} (all must be > 0)")]
    AuxDomain { kp: f64, kd: f64, time_constant: f64 },

    #[error("leading coefficient is zero: not a cubic")]
    DegenerateCubic,

    /// The inverse mapping needs `KI > 0` for a positive root of the gain polynomial to exist.
    #[error("integral gain KI={ki} must be positive for a (kp, kd, T) decomposition to exist")]
    NonPositiveIntegralGain { ki: f64 },

    /// `1 + b > 0` is required for the control direction to be known.
    #[error("input coefficient b={b} violates the assumption b in (-1, 1)")]
    InputCoefficient { b: f64 },

    #[error("matrix is not Hurwitz")]
    NotHurwitz,

    #[error("theta={theta} must lie in (0, 1)")]
    Theta { theta: f64 },

    #[error("no stable T found in [{lo}, {hi}]")]
    NoStableT { lo: f64, hi: f64 },

    #[error("state escaped at t={t} (non-finite or magnitude above threshold)")]
    InstabilityEscape { t: f64 },

    #[error("ultimate bound not settled: tail window {last} vs previous window {previous}")]
    NotSettled { last: f64, previous: f64 },

    #[error("invalid signal: {0}")]
    Signal(&'static str),

    #[error("invalid configuration: {0}")]
    Config(&'static str),
}
