use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel value {value} at y = {point:?}")]
    InvalidKernel { point: Vec<f64>, value: f64 },

    #[error("numeric failure in {context}")]
    Numeric { context: String },

    #[error("unsupported exterior data: {0}")]
    UnsupportedExterior(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("monotonicity (CFL) violated: dt * row_sum = {product} > 1")]
    Cfl { product: f64 },

    #[error("insufficient resolution: finest usable scale index is {finest_usable}")]
    InsufficientResolution { finest_usable: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn numeric(context: impl Into<String>) -> Error {
    Error::Numeric { context: context.into() }
}
