//! Exact polynomial algebra over the integers and rationals.

mod multipoly;
mod resultant;
mod roots;
mod unipoly;

pub use multipoly::{Exponents, MultiPoly};
pub use resultant::resultant;
pub use roots::{
    default_precision, isolate_real_roots, precision_digits, solve_quartic_exact, IsolatedRoot,
    QuarticRoot, SturmSequence,
};
pub use unipoly::UniPoly;

pub(crate) use multipoly::rational_to_f64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` still occurs and cannot be dropped")]
    VariableInUse(String),
    #[error("polynomial is not even in `{0}`")]
    NotEven(String),
    #[error("polynomial involves variables other than `{0}`")]
    NotUnivariate(String),
    #[error("polynomial has degree zero in `{0}`")]
    ZeroDegree(String),
    #[error("the zero polynomial has no isolated roots")]
    ZeroPolynomial,
    #[error("bracket precision must be positive")]
    BadPrecision,
    #[error("closed-form solver needs degree 1..=4, got {0}")]
    QuarticDegree(usize),
    #[error("polynomial is not divisible")]
    NotDivisible,
    #[error("non-integer coefficient")]
    NonIntegerCoefficient,
    #[error("parse error: {0}")]
    Parse(String),
}
