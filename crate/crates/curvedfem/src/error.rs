use crate::linalg::SolveStats;
use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("degenerate triangle (area {area:.3e})")]
    DegenerateTriangle { area: f64 },

    #[error("nonpositive correction Jacobian (det = {det:.3e}){}", element.map(|e| format!(" in element {e}")).unwrap_or_default())]
    NonpositiveJacobian { det: f64, element: Option<usize> },

    #[error(
        "Newton iteration for the inverse correction did not converge (residual {residual:.3e})"
    )]
    NewtonDivergence { residual: f64 },

    #[error("empty mesh")]
    EmptyMesh,

    #[error("unsupported degree {degree}")]
    UnsupportedDegree { degree: u32 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver did not converge: {iterations} iterations, residual {final_residual:.3e}",
        iterations = stats.iterations, final_residual = stats.final_residual)]
    NotConverged { stats: SolveStats },

    #[error("invalid rate input: errors and mesh sizes must be positive with h_old > h_new")]
    InvalidRateInput,

    #[error("degenerate bound-check right-hand side in element {element}")]
    DegenerateRhs { element: usize },

    #[error("mesh is not conforming: {reason}")]
    NonConforming { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
