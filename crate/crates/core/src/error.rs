use thiserror::Error;

/// Errors raised by the projection operators, their oracles and the solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is below the zero threshold")]
    ZeroVector { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("point lies outside the domain: {0}")]
    DomainError(String),
    #[error("no subgradient available: {0}")]
    EmptySubdifferential(String),
    #[error("function is not twice differentiable here: {0}")]
    NotTwiceDifferentiable(String),
    #[error("function is not differentiable here: {0}")]
    NotDifferentiableHere(String),
    #[error("power composition requires a nonnegative base, got {value:e}")]
    NegativeBaseError { value: f64 },
    #[error("scalar map is not increasing at t = {t:e} (derivative {derivative:e})")]
    NonMonotonePhi { t: f64, derivative: f64 },
    #[error("inf-convolution minimizer failed the optimality audit (gap {gap:e})")]
    InconsistentMinimizer { gap: f64 },
    #[error("joint selection is undefined at this point")]
    JointSelectionUnavailable,
    #[error("unsupported atom: {0}")]
    UnsupportedAtom(String),
    #[error("subgradient vanishes at a point with positive function value {value:e}")]
    ZeroSubgradient { value: f64 },
    #[error("relaxation parameter {lambda} lies outside [{lo}, {hi}]")]
    RelaxationOutOfRange { lambda: f64, lo: f64, hi: f64 },
    #[error("witness is not feasible: f(y) = {value:e} > 0")]
    InfeasibleWitness { value: f64 },
    #[error("matrix is not scaled orthogonal (residual {residual:e})")]
    NotScaledOrthogonal { residual: f64 },
    #[error("Moreau envelope is positive but the proximal residual vanishes")]
    DegenerateMoreau,
    #[error("function value {value:e} is not positive here")]
    NotPositiveHere { value: f64 },
    #[error("derivative is undefined where f(x) = 0")]
    ZeroFunctionValue,
    #[error("sample set is empty")]
    EmptySample,
    #[error("no closed-form projection onto the level set of {0}")]
    NoLevelSetOracle(String),
    #[error("control sequence violates coverage: {0}")]
    InvalidControl(String),
    #[error("step size {step:e} underflowed at iteration {iteration}")]
    StalledStep { iteration: usize, step: f64 },
}

impl Error {
    /// Stable variant name, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroVector { .. } => "ZeroVector",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DomainError(_) => "DomainError",
            Error::EmptySubdifferential(_) => "EmptySubdifferential",
            Error::NotTwiceDifferentiable(_) => "NotTwiceDifferentiable",
            Error::NotDifferentiableHere(_) => "NotDifferentiableHere",
            Error::NegativeBaseError { .. } => "NegativeBaseError",
            Error::NonMonotonePhi { .. } => "NonMonotonePhi",
            Error::InconsistentMinimizer { .. } => "InconsistentMinimizer",
            Error::JointSelectionUnavailable => "JointSelectionUnavailable",
            Error::UnsupportedAtom(_) => "UnsupportedAtom",
            Error::ZeroSubgradient { .. } => "ZeroSubgradient",
            Error::RelaxationOutOfRange { .. } => "RelaxationOutOfRange",
            Error::InfeasibleWitness { .. } => "InfeasibleWitness",
            Error::NotScaledOrthogonal { .. } => "NotScaledOrthogonal",
            Error::DegenerateMoreau => "DegenerateMoreau",
            Error::NotPositiveHere { .. } => "NotPositiveHere",
            Error::ZeroFunctionValue => "ZeroFunctionValue",
            Error::EmptySample => "EmptySample",
            Error::NoLevelSetOracle(_) => "NoLevelSetOracle",
            Error::InvalidControl(_) => "InvalidControl",
            Error::StalledStep { .. } => "StalledStep",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
