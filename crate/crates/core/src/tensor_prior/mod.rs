//! Random densities `f(x,y) = 1 + sum_n U_n g_n(x) h_n(y)` on the unit square.
//!
//! Each pair `(g_n, h_n)` is bounded by one and centered under the marginals,
//! and `sum |U_n| <= 1`, so every realization has marginals exactly `mu` and `nu`.

mod basis;
mod brownian;
mod coeff;
mod density;

pub use basis::{haar_basis, haar_functions, Basis1D, BasisPair, MEAN_TOL};
pub use brownian::{
    brownian_density, check_phi_range, BrownianDraw, BrownianPrior, Clip, Constant, HalfSin, HalfTanh, Indicator,
    OccupationFunctional, Phi, PhiRegistry, MIN_STEPS,
};
pub use coeff::{CoeffDist, CoeffLaw, Coupling};
pub use density::{TensorDensity, TensorPrior, MIN_ACCEPTANCE};
