//! Priors on Fréchet classes of bivariate probability measures.
//!
//! The crate builds random probability measures whose realizations have
//! prescribed marginals (couplings of `mu` and `nu`, or measures with a fixed
//! first marginal `mu`), draws exchangeable data from them and computes
//! posteriors and predictive probabilities:
//!
//! * [`measures`]: piecewise-uniform measures on the unit interval and square,
//!   distribution functions and the bounded-Lipschitz distance.
//! * [`tensor_prior`]: densities `1 + sum U_n g_n(x) h_n(y)`, including the
//!   Brownian-path construction.
//! * [`checkerboard_prior`]: mixtures of permutation densities and checkerboard
//!   approximations of couplings.
//! * [`posterior`]: exact Dirichlet-mixture posteriors for checkerboard priors,
//!   importance-sampled posteriors for any [`PriorFamily`], predictive probabilities.
//! * [`gamma_mu`]: `mu x Q` priors with a Dirichlet `Q` and copula-composed
//!   random distribution functions.
//!
//! Prior families and copulas are trait objects looked up by name in a
//! [`PriorRegistry`] / [`gamma_mu::CopulaRegistry`].

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkerboard_prior;
pub mod error;
pub mod family;
pub mod gamma_mu;
pub mod geometry;
pub mod measures;
pub mod posterior;
pub mod rng;
pub mod stats;
pub mod tensor_prior;

pub use error::{Error, Result};
pub use family::{PriorFamily, PriorRegistry, RandomDensity};
pub use geometry::{IntervalSet, Observation, Rect};

/// Library version, embedded in every output of the command-line tool.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
