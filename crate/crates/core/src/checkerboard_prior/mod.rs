//! Mixtures of permutation densities on `[0,1]^2` with uniform marginals.
//!
//! Cells are 0-based: `I_j = [j/k, (j+1)/k)`, the last one closed at 1, and a
//! permutation `sigma` pairs row cell `j` with column cell `sigma[j]`.

mod mixture;
mod perm;
mod prior;
mod projection;

pub use mixture::{
    exact_density_matrix, matrix_rect_prob_exact, CheckerboardDensity, CheckerboardMixture, PermDensity,
    DOUBLY_STOCHASTIC_TOL, SIMPLEX_TOL,
};
pub use perm::{all_permutations, random_distinct, Permutation, MAX_ENUMERATED_K};
pub use prior::{dirichlet, sample_mixture, AlphaSpec, CheckerboardPrior, PermSource, Resolution};
pub use projection::{approximation_bound, project_coupling, MARGINAL_TOL};
