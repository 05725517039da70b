use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix is not Hermitian (max |A - A^H| = {violation:.3e})")]
    NotHermitian { violation: f64 },

    #[error("density matrix has zero trace")]
    ZeroTrace,

    #[error("result would have {rows} rows, above the cap of {cap}")]
    TooLarge { rows: usize, cap: usize },

    #[error("unsupported port count {ports}; supported: {supported:?}")]
    UnsupportedPortCount {
        ports: usize,
        supported: &'static [usize],
    },

    #[error("degenerate pair (alpha = {alpha}, beta = {beta}): linear polarizations cannot be split by a geometric phase")]
    DegeneratePair { alpha: f64, beta: f64 },

    #[error("meta-atom solve did not converge (residual {residual:.3e})")]
    NoSolution { residual: f64 },

    #[error("target phase {target:.6} rad is not reachable for any orientation")]
    UnreachablePhase { target: f64 },

    #[error("underdetermined system: rank {rank} < {parameters} free parameters")]
    UnderdeterminedSystem { rank: usize, parameters: usize },

    #[error("histogram fit diverged after {iterations} iterations")]
    FitDiverged { iterations: usize },

    #[error(
        "degenerate histogram: peak contrast {contrast:.3} below twice the bin noise {noise:.3}"
    )]
    DegenerateHistogram { contrast: f64, noise: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
