use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Messages are stable; the CLI prints them verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("outside domain: point ({x}, {y})")]
    OutsideDomain { x: f64, y: f64 },
    #[error("degenerate projection: point ({x}, {y}) lies on the boundary")]
    DegenerateProjection { x: f64, y: f64 },
    #[error("grid too coarse: h = {h} exceeds {limit}")]
    GridTooCoarse { h: f64, limit: f64 },
    #[error("outside grid hull: point ({x}, {y})")]
    OutsideHull { x: f64, y: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("epsilon too large: A_eps is empty for eps = {0}")]
    EpsilonTooLarge(f64),
    #[error("starting in critical set: |grad f| = {0} at the start point")]
    CriticalStart(f64),
    #[error("hypothesis violated: b_eps = {0} >= 1")]
    HypothesisViolated(f64),
    #[error("schedule failure: Lambda_p = {lambda_p} at p = {p} is too far from Lambda_inf = {lambda_inf}")]
    ScheduleFailure { p: f64, lambda_p: f64, lambda_inf: f64 },
    #[error("no convergence at p = {p} after {iterations} iterations (relative decrease {last_decrease:e})")]
    NoConvergence {
        p: f64,
        iterations: usize,
        last_decrease: f64,
        /// Best iterate reached, as node values of the solver grid.
        best: Vec<f64>,
        /// Rooted Rayleigh quotient of `best`.
        best_lambda: f64,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
