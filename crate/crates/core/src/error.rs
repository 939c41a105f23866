use std::fmt;

/// Error type shared by all solver and verification entry points.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Grid construction rejected the requested resolution.
    InvalidGrid(String),
    /// Two fields from different grids were combined.
    GridMismatch { left: usize, right: usize },
    /// An iterative solve stopped above its residual target.
    NonConvergence {
        what: &'static str,
        achieved: f64,
        target: f64,
        iterations: usize,
    },
    /// The coercivity constant came out non-positive; the decay theory
    /// does not apply to this steady state.
    Gamma1NotPositive(f64),
    /// Rate fitting had too few usable samples in the window.
    DegenerateWindow { remaining: usize, needed: usize },
    /// A parameter failed its admissibility constraint.
    InvalidParameter(String),
    /// A trajectory ended before the requested horizon.
    IncompleteRun(String),
    /// Artifact input was missing or failed to parse.
    Artifact(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidGrid(msg) => write!(f, "invalid grid: {msg}"),
            Error::GridMismatch { left, right } => {
                write!(f, "grid mismatch: {left}x{left} vs {right}x{right}")
            }
            Error::NonConvergence {
                what,
                achieved,
                target,
                iterations,
            } => write!(
                f,
                "{what} did not converge: residual {achieved:.3e} > {target:.3e} after {iterations} iterations"
            ),
            Error::Gamma1NotPositive(g) => {
                write!(f, "coercivity constant gamma1 = {g:.6e} is not positive")
            }
            Error::DegenerateWindow { remaining, needed } => write!(
                f,
                "degenerate fit window: {remaining} usable samples, need {needed}"
            ),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::IncompleteRun(msg) => write!(f, "incomplete run: {msg}"),
            Error::Artifact(msg) => write!(f, "artifact error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
