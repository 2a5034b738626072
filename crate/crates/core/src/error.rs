use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("size bound exceeded: {what} = {value} (limit {limit})")]
    SizeBound {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid feature: {0}")]
    InvalidFeature(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error at row {row}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: u64,
        column: Option<usize>,
        message: String,
    },

    #[error("layout/angle mismatch: {0}")]
    LayoutMismatch(String),

    #[error("residual amplitude {amplitude:e} on basis state {index} in the omega=0 subspace")]
    ResidualAmplitude { index: usize, amplitude: f64 },

    #[error("target subspace has zero weight")]
    NoTarget,

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("numerator and denominator runs used different scales")]
    ScaleMismatch,

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
