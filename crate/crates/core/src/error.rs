use thiserror::Error;

/// Errors raised by the dicke-critic library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown spin operator label `{0}` (expected x, y, z, plus or minus)")]
    UnknownAxis(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("hamiltonian is not hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("negative or non-finite rate {0}")]
    InvalidRate(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("steady state is degenerate (null space dimension {nullity}) and no initial <sz> was given")]
    MissingInitialSz { nullity: usize },

    #[error("initial <sz> given but the steady state is unique")]
    UnexpectedInitialSz,

    #[error("degenerate steady state: {0}")]
    DegenerateSteadyState(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),

    #[error("correlator tail does not decay and is resonant with omega = {omega}; integral diverges")]
    NonIntegrable { omega: f64 },

    #[error("static susceptibility has an imaginary part {0:e}")]
    ComplexStatic(f64),

    #[error("susceptibility not tabulated at omega = {0}")]
    MissingFrequency(f64),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("ensemble weights invalid: {0}")]
    InvalidWeights(String),

    #[error("frequency grids of ensemble members differ")]
    MismatchedGrids,

    #[error("no closed form available for {0}")]
    NoClosedForm(String),

    #[error("root finder did not converge after {iterations} iterations (|residual| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("no sign change of the leading stability exponent between g = {g_lo} and g = {g_hi}")]
    NoSignChange { g_lo: f64, g_hi: f64 },

    #[error("integrator step size underflow at t = {0}")]
    StepSizeUnderflow(f64),

    #[error("hilbert space dimension {0} exceeds the limit of 128")]
    DimensionGuard(usize),

    #[error("empty sweep grid")]
    EmptyGrid,

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
