use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid resolution {0}: must be even and at least 8")]
    InvalidGrid(usize),

    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("field data has {got} values, expected {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("curve needs at least 2 samples, got {0}")]
    DegenerateCurve(usize),

    #[error("curve samples {0} and {1} differ by more than pi in a lifted coordinate")]
    CurveAliasing(usize, usize),

    #[error("form is not closed: sup|d alpha| = {defect:e} > tol {tol:e}")]
    NotClosed { defect: f64, tol: f64 },

    #[error("hodge reconstruction residual {residual:e} exceeds tol {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("integration step moved a point by {0} (> pi); increase substeps")]
    StepTooCoarse(f64),

    #[error("time {0} outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("the 1-form is zero")]
    ZeroForm,

    #[error("empty generator list")]
    EmptyList,

    #[error("inverse map data missing for d0")]
    MissingInverse,

    #[error("grid N = {n} does not resolve cutoff index i = {i} (need N >= 8 i)")]
    ResolutionTooCoarse { n: usize, i: usize },

    #[error("base length {length} is not below the budget E = {budget}")]
    LengthBudgetExceeded { length: f64, budget: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
