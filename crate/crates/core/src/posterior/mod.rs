//! Posteriors of prior families given exchangeable observations.
//!
//! Checkerboard priors with a fixed permutation list have an exact posterior,
//! a finite mixture of Dirichlet laws on the weights. Every other family goes
//! through a single-batch importance sampler that draws particles from the
//! prior and weights them by the likelihood `prod_i f(Z_i)`.

mod exact;
mod exchangeable;
mod importance;

pub use exact::{exact_checkerboard_posterior, DirichletComponent, DirichletMixturePosterior, MAX_COMPONENTS};
pub use exchangeable::sample_exchangeable;
pub use importance::{is_posterior, Particle, WeightedPosterior, MIN_PARTICLES};

use crate::geometry::Rect;

/// Posterior mean of `P(H)` for a rectangle `H`.
pub trait Predictive {
    fn predictive(&self, rect: &Rect) -> f64;
}
