use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    UnsupportedDimension(u32),
    InvalidInput(String),
    /// Adaptive quadrature ran out of subdivisions before reaching the tolerance.
    Quadrature { achieved: f64, requested: f64 },
    /// Closed form and quadrature disagree beyond tolerance.
    ConstantMismatch { name: &'static str, closed: f64, quadrature: f64 },
    UnderResolved { spacing: f64, required: f64 },
    SingularMatrix { row: usize },
    NotOdd,
    NoConvergence { iterations: usize, residual: f64 },
    PeakOffTarget { rho: f64, theta: f64 },
    OutOfHull { rho: f64, theta: f64 },
    FitConditioning,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDimension(n) => write!(f, "dimension {n} not supported (use 4, 5 or 6)"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::Quadrature { achieved, requested } => {
                write!(f, "quadrature stalled at error {achieved:e} (requested {requested:e})")
            }
            Error::ConstantMismatch { name, closed, quadrature } => {
                write!(f, "constant {name}: closed form {closed:e} vs quadrature {quadrature:e}")
            }
            Error::UnderResolved { spacing, required } => {
                write!(f, "grid spacing {spacing:e} near the peak exceeds {required:e}")
            }
            Error::SingularMatrix { row } => write!(f, "zero pivot in row {row}"),
            Error::NotOdd => write!(f, "field is not odd across the equator"),
            Error::NoConvergence { iterations, residual } => {
                write!(f, "Newton stopped after {iterations} iterations at residual {residual:e}")
            }
            Error::PeakOffTarget { rho, theta } => {
                write!(f, "solution peak drifted to (rho, theta) = ({rho}, {theta})")
            }
            Error::OutOfHull { rho, theta } => write!(f, "point ({rho}, {theta}) outside the grid"),
            Error::FitConditioning => write!(f, "least-squares fit is ill-conditioned"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn invalid(msg: &str) -> Error {
    Error::InvalidInput(String::from(msg))
}
