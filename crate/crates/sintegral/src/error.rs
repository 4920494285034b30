use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate curve: 4a^3 + 27b^2 = 0")]
    DegenerateCurve,
    #[error("point is not on the curve")]
    PointNotOnCurve,
    #[error("operation undefined for the identity point")]
    IdentityPoint,
    #[error("bad reduction at {q}: {q} divides the discriminant and the curve cannot be handled there")]
    BadReduction { q: u64 },
    #[error("q = 2 is not supported as a finite place")]
    EvenCharacteristic,
    #[error("basis points are not independent (regulator not positive definite)")]
    NotIndependent,
    #[error("requested precision unreachable: {0}")]
    PrecisionUnreachable(String),
    #[error("q-adic precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by a value indistinguishable from zero at the working precision")]
    DivisionByIndistinguishableZero,
    #[error("point is not in the kernel of reduction E_1(Q_q)")]
    NotInKernel,
    #[error("insufficient log precision for the reduction step: {0}")]
    InsufficientPrecision(String),
    #[error("all q-adic logarithms vanish at q = {q}; degenerate basis/place pairing")]
    AllLogsVanish { q: u64 },
    #[error("reduction did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
