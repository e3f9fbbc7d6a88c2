use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M_ij - conj(M_ji)| = {deviation:e})")]
    HermiticityViolation { deviation: f64 },

    #[error("invalid cut: {0}")]
    InvalidCut(String),

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    #[error("circuit constant C = {c} outside (0, {lambda_min}]")]
    CircuitConstantError { c: f64, lambda_min: f64 },

    #[error("spectrum not positive definite (smallest eigenvalue {lambda_min})")]
    SpectrumError { lambda_min: f64 },

    #[error(
        "scaled eigenvalue {scaled} is not an integer; rescale A (or t) so that 2^n·λ·t/2π is integral"
    )]
    EigenvalueScalingError { scaled: f64 },

    #[error("unknown stage '{0}' (expected psi_in, psi_0, psi_1, psi_2 or psi_3)")]
    StageError(String),

    #[error("degenerate spectrum: closed-form expressions assume distinct eigenvalues")]
    DegeneracyWarning,

    #[error("size limit exceeded: {0}")]
    SizeError(String),

    #[error("value out of range: {0}")]
    RangeError(String),

    #[error("all post-selection amplitudes vanish")]
    ZeroPostselection,

    #[error("reference solution vector is zero")]
    DegenerateReference,

    #[error("{skipped} of {total} realizations failed (more than 1%)")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}

impl Error {
    /// Stable variant name, used for CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::HermiticityViolation { .. } => "HermiticityViolation",
            Error::InvalidCut(_) => "InvalidCut",
            Error::ShapeError(_) => "ShapeError",
            Error::CircuitConstantError { .. } => "CircuitConstantError",
            Error::SpectrumError { .. } => "SpectrumError",
            Error::EigenvalueScalingError { .. } => "EigenvalueScalingError",
            Error::StageError(_) => "StageError",
            Error::DegeneracyWarning => "DegeneracyWarning",
            Error::SizeError(_) => "SizeError",
            Error::RangeError(_) => "RangeError",
            Error::ZeroPostselection => "ZeroPostselection",
            Error::DegenerateReference => "DegenerateReference",
            Error::TooManySkipped { .. } => "TooManySkipped",
            Error::Numerical(_) => "Numerical",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
