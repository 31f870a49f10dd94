use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix size {rows}x{cols} exceeds the {max}x{max} limit")]
    Size { rows: usize, cols: usize, max: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("eigen-solver did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NotConverged { sweeps: usize, residual: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("not an X-state: entry ({row},{col}) has magnitude {magnitude:e}")]
    Shape { row: usize, col: usize, magnitude: f64 },

    #[error("outside the formula domain: {0}")]
    Domain(String),

    #[error("eigenvalue crossing inside the difference stencil at phi={phi}; retry with a smaller step")]
    Crossing { phi: f64 },

    #[error("Bloch vector length {norm} exceeds 1")]
    InvalidBloch { norm: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("degenerate run: {0}")]
    DegenerateRun(String),
}
