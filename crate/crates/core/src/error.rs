use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the hyperbolic regime or another domain
    /// restriction was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// The principal square root was asked for a value on (-inf, 0].
    #[error("branch cut: z - c = {0} lies on (-inf, 0]")]
    BranchCut(Complex64),

    #[error("{what} did not converge within {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    #[error("requested length {requested} exceeds the maximum order {max}")]
    Capacity { requested: usize, max: usize },

    #[error("words {w} and {v} are related (w ~ v); separation is undefined")]
    Relation { w: String, v: String },

    #[error("no sign change of the approximant on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("argument-principle integral {value} is not integral after {attempts} attempts")]
    Contour { value: Complex64, attempts: usize },

    #[error(
        "weight identity violated for multiplier {multiplier}: relative error {relative_error:e}"
    )]
    WeightIdentity {
        multiplier: f64,
        relative_error: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
