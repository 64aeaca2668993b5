use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("jacobi pair is already mass-scaled")]
    AlreadyScaled,

    #[error("jacobi pair must be mass-scaled for this operation")]
    NotScaled,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("collinear equilibrium (I2 = {i2:e}); the Eckart frame needs two independent equilibrium vectors")]
    CollinearEquilibrium { i2: f64 },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("frame singularity: Eckart vectors are collinear (|f1 x f2| / (f1 f2) = {ratio:e})")]
    FrameSingularity { ratio: f64 },

    #[error(
        "equilibrium moments are degenerate (|I1 - I2| / (I1 + I2) = {relative_gap:e}); use the equal-moment branch"
    )]
    DegenerateBranch { relative_gap: f64 },

    #[error("equal-moment branch used on a non-degenerate equilibrium: {0}")]
    BranchMisuse(String),

    #[error("numerical inconsistency: {quantity} = {value:e}")]
    NumericalInconsistency { quantity: &'static str, value: f64 },

    #[error("singular coordinate: {coordinate} = {value:e}")]
    SingularCoordinate { coordinate: &'static str, value: f64 },

    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("potential is not finite at ({q1}, {q2}, {tau})")]
    UnboundedPotential { q1: f64, q2: f64, tau: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NoConvergence { iterations: usize, worst_residual: f64, residuals: Vec<f64> },
}

impl Error {
    /// Stable kebab-case name used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::InvalidConfig(_) => "invalid-config",
            Error::AlreadyScaled => "already-scaled",
            Error::NotScaled => "not-scaled",
            Error::DegenerateGeometry(_) => "degenerate-geometry",
            Error::CollinearEquilibrium { .. } => "collinear-equilibrium",
            Error::DegenerateConfiguration(_) => "degenerate-configuration",
            Error::FrameSingularity { .. } => "frame-singularity",
            Error::DegenerateBranch { .. } => "degenerate-branch",
            Error::BranchMisuse(_) => "branch-misuse",
            Error::NumericalInconsistency { .. } => "numerical-inconsistency",
            Error::SingularCoordinate { .. } => "singular-coordinate",
            Error::OracleFailure(_) => "oracle-failure",
            Error::InvalidGrid(_) => "invalid-grid",
            Error::UnboundedPotential { .. } => "unbounded-potential",
            Error::NoConvergence { .. } => "no-convergence",
        }
    }
}
