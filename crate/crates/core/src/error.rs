use thiserror::Error;

use crate::model::Qubit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operator does not commute with the parity operator (max |[h,K]| = {norm:e})")]
    NotParitySymmetric { norm: f64 },

    #[error("matrix is not Hermitian (max |h - h^dagger| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("expected a {expected} matrix/vector, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("density matrix invalid: {0}")]
    InvalidDensityMatrix(String),

    #[error("label {0} is not in the odd-parity basis")]
    InvalidLabel(String),

    #[error("qubit block {0} is degenerate: epsilon_j = |gamma_j| = 0")]
    DegenerateBlock(Qubit),

    #[error("state has even-parity amplitude {max_even:e}")]
    NotInOddSubspace { max_even: f64 },

    #[error("state is not a product of two effective qubits (second singular value {sigma2:e})")]
    NotFactorizable { sigma2: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    #[error("the closed-form five-dimensional spectrum requires gamma_z = 0 (got {0})")]
    RequiresGammaZZero(f64),

    #[error("parameter conditions not met: {0}")]
    ConditionsNotMet(String),

    #[error("gamma_{0} vanishes")]
    GammaZero(Qubit),

    #[error("rho must be positive (got {0})")]
    NonPositiveRho(f64),

    #[error("invalid state family: {0}")]
    InvalidFamily(String),

    #[error("bad coefficients: {0}")]
    BadCoefficients(String),

    #[error("sinusoid fit disagrees with closed form: {0}")]
    FitMismatch(String),

    #[error("unknown figure {0} (expected 1..=11)")]
    UnknownFigure(u32),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
