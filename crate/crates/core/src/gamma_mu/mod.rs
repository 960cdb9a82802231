//! Priors on measures with a fixed first marginal `mu`.
//!
//! `P = mu x Q` with `Q` a Dirichlet random measure realized by truncated
//! stick-breaking, and the copula-composed random distribution function
//! `F(x, y) = C[F_mu(x), G(y)]` with `G` the cdf of `Q`.

mod composed;
mod copula;
mod partition;
mod stick_breaking;

pub use composed::{
    composed_cdf_law, composed_cdf_posterior, posterior_beta_parameters, product_prior_predictive,
    random_copula_law, section_level, ComposedCdf, SECTION_TOL,
};
pub use copula::{
    CheckerboardCopulaLaw, Comonotone, Copula, CopulaRegistry, CopulaSampler, Countermonotone, FiniteCopulaLaw,
    FixedCopula, GridCopula, Product, COPULA_TOL,
};
pub use partition::{posterior_fdd, product_prior_fdd, SectionPartition, MIN_DRAWS};
pub use stick_breaking::{DPStickBreaking, PosteriorBaseMeasure, RESIDUAL_TOL};
