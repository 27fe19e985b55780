//! Uniform-grid fields: rasterization, finite differences, interpolation, IO.

mod calculus;
mod grid;
mod io;
mod values;

pub use calculus::{gradient, hessian, infinity_laplacian, Sym2};
pub use grid::{rasterize, Grid, NodeKind, MARGIN};
pub use io::mask_pgm;
pub use values::{ScalarField, VectorField};
