use core::fmt;

use alloc::string::String;

/// Errors raised by mesh generation, assembly and the flow solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid numeric or structural input.
    InvalidInput(String),
    /// The crease polyline cannot be resolved by the generated grid.
    CreaseNotRepresentable(String),
    /// A triangle with (numerically) zero area.
    DegenerateTriangle { triangle: usize, area: f64 },
    /// A linear system could not be factorized; `pivot` is the failing
    /// position in elimination order.
    SingularMatrix { pivot: usize, context: &'static str },
    /// Duplicate or otherwise dependent rows in a constraint block.
    RankDeficientConstraints(String),
    /// Step size halving went below the underflow threshold.
    StepSizeUnderflow { iteration: usize, tau: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::CreaseNotRepresentable(msg) => {
                write!(f, "crease not representable on the grid: {msg}")
            }
            Error::DegenerateTriangle { triangle, area } => {
                write!(f, "triangle {triangle} is degenerate (area {area:e})")
            }
            Error::SingularMatrix { pivot, context } => {
                write!(f, "singular {context} matrix (zero pivot at position {pivot})")
            }
            Error::RankDeficientConstraints(msg) => {
                write!(f, "rank-deficient constraint block: {msg}")
            }
            Error::StepSizeUnderflow { iteration, tau } => write!(
                f,
                "flow stuck at iteration {iteration}: step size {tau:e} below underflow threshold"
            ),
        }
    }
}

impl core::error::Error for Error {}
