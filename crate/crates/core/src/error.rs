use thiserror::Error;

/// Errors raised by the exact and numeric engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("series is not a unit: {0}")]
    NonUnit(String),
    #[error("q-slice {q} is not divisible by (1 - zeta)^{order}")]
    NotDivisible { q: String, order: u32 },
    #[error("infinite product cannot be truncated: {0}")]
    Divergent(String),
    #[error("phase e({0}) is not a fourth root of unity")]
    NonGaussianPhase(String),
    #[error("no finite Appell cutoff certifies precision {0}")]
    PrecisionUnreachable(String),
    #[error("q-slice {q} needs zeta-exponent {exponent}, outside window {window}")]
    WindowTooSmall { q: String, exponent: String, window: i64 },
    #[error("no consistent fit: {0}")]
    NoConsistentFit(String),
    #[error("jet leading coefficient at order {0} is zero")]
    OrderMismatch(i64),
    #[error("point lies within {radius:e} of a pole")]
    NearPole { radius: f64 },
    #[error("series tail bound not reached within cutoff {0}")]
    TailBoundFailure(usize),
    #[error("quadrature did not stabilise: last two estimates differ by {0:e}")]
    NonConvergent(f64),
    #[error("extrapolation unstable: last two extrapolants differ by {0:e}")]
    NonStable(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
