use thiserror::Error;

/// Errors raised by the library. Variants carry enough context to be shown
/// verbatim to a CLI user.
#[derive(Debug, Error)]
pub enum NeelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field parameter h = {0}: must lie in [0, 1]")]
    InvalidField(f64),

    #[error("degree {0} is not representable for h = {1}")]
    UnrepresentableDegree(String, f64),

    #[error("degree value {value} is not within 1e-9 of any k ± {{0, α/π}} (α/π = {alpha_over_pi})")]
    DegreeDecomposition { value: f64, alpha_over_pi: f64 },

    #[error("wall layout rejected: {0}")]
    WallLayout(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("padding factor {0} rejected: must be at least 4")]
    Padding(usize),

    #[error("extension slab: {0}")]
    Slab(String),

    #[error("extension energy did not converge: truncated-top remainder {remainder:.3e} is {fraction:.2}% of the total")]
    ExtensionNotConverged { remainder: f64, fraction: f64 },

    #[error("localisation precondition violated: {0}")]
    Localisation(String),

    #[error("invalid solver configuration: {0}")]
    SolverConfig(String),

    #[error("non-finite energy at iteration {iteration}; last finite state has {} samples", .last_phi.len())]
    NonFinite { iteration: usize, last_phi: Vec<f64> },

    #[error("experiment precondition: {0}")]
    Precondition(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, NeelError>;
