use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),

    #[error("degenerate cell {cell}: area {area:e} after coordinate transform")]
    DegenerateCell { cell: usize, area: f64 },

    #[error("unsupported Lagrange degree {0} (expected 1..=4)")]
    UnsupportedDegree(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sparsity pattern mismatch: {0}")]
    PatternMismatch(String),

    #[error("{method} breakdown after {iterations} iterations")]
    Breakdown { method: &'static str, iterations: usize },

    #[error("{method} did not converge in {iterations} iterations (residual {residual:e}, target {target:e})")]
    NotConverged {
        method: &'static str,
        iterations: usize,
        residual: f64,
        target: f64,
        history: Vec<f64>,
    },

    #[error("singular matrix at pivot {0}")]
    Singular(usize),

    #[error("inconsistent boundary conditions: {0}")]
    BoundaryConditions(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown parameter `{key}`; valid keys: {valid}")]
    UnknownParameter { key: String, valid: String },

    #[error("non-finite value in `{field}` at step {step} (t = {time})")]
    NonFinite { field: String, step: usize, time: f64 },

    #[error("step {step} (t = {time}): {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn at_step(self, step: usize, time: f64) -> Self {
        match self {
            e @ (Error::Step { .. } | Error::NonFinite { .. }) => e,
            other => Error::Step { step, time, source: alloc::boxed::Box::new(other) },
        }
    }
}
