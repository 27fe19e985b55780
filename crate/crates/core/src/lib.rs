//! Variational infinity ground states of planar convex domains.
//!
//! Ground states are computed as limits of discrete p-Laplacian first
//! eigenfunctions and then probed with the distance function, supremal
//! convolutions and normalized gradient flows.
//!
//! Every numerical routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

mod error;
pub mod eigensolver;
pub mod field;
pub mod geometry;
pub mod gradflow;
mod point;
mod report;
mod scalar;
pub mod supconv;
pub mod verify;

pub use error::{Error, Result};
pub use point::Point2;
pub use report::{Measurement, Report, REPORT_CSV_HEADER};
pub use scalar::Scalar;

pub type Point = Point2<f64>;
pub type Domain = geometry::ConvexDomain<f64>;
pub type Grid = field::Grid<f64>;
pub type Field = field::ScalarField<f64>;
pub type Vector = field::VectorField<f64>;
pub type GroundState = eigensolver::GroundState<f64>;
pub type SolverOptions = eigensolver::SolverOptions<f64>;
pub type SupConv = supconv::SupConvResult<f64>;
pub type Trajectory = gradflow::Trajectory<f64>;
