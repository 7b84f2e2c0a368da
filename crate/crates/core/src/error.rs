use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the routine.
    #[error("domain error: {what} = {value} ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {panels} panels")]
    Quadrature { estimate: f64, error: f64, panels: usize },

    /// A series or continued fraction exhausted its iteration budget.
    #[error("{routine} did not converge within {iterations} iterations")]
    NotConverged { routine: &'static str, iterations: usize },

    /// A problem instance exceeds a hard size cap.
    #[error("size limit exceeded: {what} = {value} (max {max})")]
    SizeLimit {
        what: &'static str,
        value: usize,
        max: usize,
    },

    /// Input was structurally invalid.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Text input failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A function that must take values in the unit sphere did not.
    #[error("function is not sphere-valued: |f(x)| = {norm} at x = {point:?}")]
    NotSphereValued { norm: f64, point: [f64; 3] },

    /// A linear-algebra fit hit a rank-deficient moment matrix.
    #[error("degenerate cross-moment: singular values {singular_values:?}")]
    Degenerate { singular_values: [f64; 3] },

    /// An iterative search blew up; carries a serialized state dump.
    #[error("search diverged at iteration {iteration}: {reason}")]
    Divergence {
        iteration: usize,
        reason: String,
        state: String,
    },

    /// A value that should be finite was not.
    #[error("evaluation failed: {0}")]
    Evaluation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain { what, value, expected }
}
