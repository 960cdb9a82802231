//! Discretized probability measures on [0,1] and [0,1]^2.

mod bl;
mod cdf;
mod grid;
pub mod transport;

pub use bl::bl_distance;
pub use cdf::{Cdf1D, CdfKind};
pub use grid::{marginals, Grid1D, Grid2D, DEFAULT_CELLS, MASS_TOL};
