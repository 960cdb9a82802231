use std::sync::Arc;

use rand::RngCore;
use rayon::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF};

use super::copula::{Copula, CopulaSampler};
use super::partition::MIN_DRAWS;
use super::stick_breaking::{DPStickBreaking, PosteriorBaseMeasure};
use crate::error::{Error, Result};
use crate::geometry::IntervalSet;
use crate::measures::{Cdf1D, Grid1D};
use crate::rng::stream;
use crate::stats::Estimate;

/// Required agreement `|C(u, r) - a|` at the located level.
pub const SECTION_TOL: f64 = 1e-10;

/// `r = sup{v : C(u, v) = a}`: the rightmost `v` with `C(u, v) <= a`, by bisection.
pub fn section_level(copula: &dyn Copula, u: f64, a: f64) -> Result<f64> {
    if !(0.0..=u).contains(&a) {
        return Err(Error::OutOfRange { value: a, range: "[0, F_mu(x)]" });
    }
    if copula.cdf(u, 1.0) <= a {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if copula.cdf(u, mid) <= a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let err = (copula.cdf(u, lo) - a).abs();
    if err > SECTION_TOL {
        return Err(Error::Solver(format!("section of {} at u = {u} misses a = {a} by {err:e}", copula.name())));
    }
    Ok(lo)
}

fn interior(value: f64, what: &'static str) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::OutOfRange { value, range: what })
    }
}

/// `F(x, y) = C[F_mu(x), G(y)]` for one realized `G`.
#[derive(Debug, Clone)]
pub struct ComposedCdf {
    copula: Arc<dyn Copula>,
    f_mu: Cdf1D,
    g: Cdf1D,
}

impl ComposedCdf {
    pub fn new(copula: Arc<dyn Copula>, f_mu: Cdf1D, g: Cdf1D) -> Self {
        Self { copula, f_mu, g }
    }

    /// `G` drawn as the cdf of `Q ~ DP(c nu)`.
    pub fn sample(
        copula: Arc<dyn Copula>,
        mu: &Grid1D,
        base: &PosteriorBaseMeasure,
        rng: &mut dyn RngCore,
    ) -> Self {
        Self::new(copula, mu.cdf(), DPStickBreaking::sample(base, rng).cdf())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.copula.cdf(self.f_mu.eval(x), self.g.eval(y))
    }

    pub fn g(&self) -> &Cdf1D {
        &self.g
    }
}

/// `P(F(x,y) <= a) = B[r(x,a)]` with `B` the Beta cdf of the given parameters.
fn beta_law(copula: &dyn Copula, u: f64, a: f64, alpha: f64, beta: f64) -> Result<f64> {
    let r = section_level(copula, u, a)?;
    if r >= 1.0 {
        return Ok(1.0);
    }
    let dist = Beta::new(alpha, beta).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(dist.cdf(r))
}

/// `P(C[F_mu(x), G(y)] <= a)` for `G` the cdf of `Q ~ DP(c nu)`.
pub fn composed_cdf_law(copula: &dyn Copula, mu: &Grid1D, c: f64, nu: &Grid1D, x: f64, y: f64, a: f64) -> Result<f64> {
    composed_cdf_posterior(copula, mu, c, nu, &[], x, y, a)
}

/// The same law given `Y_1..Y_n`: Beta parameters gain the counts of `Y_i <= y` and `Y_i > y`.
#[allow(clippy::too_many_arguments)]
pub fn composed_cdf_posterior(
    copula: &dyn Copula,
    mu: &Grid1D,
    c: f64,
    nu: &Grid1D,
    y_data: &[f64],
    x: f64,
    y: f64,
    a: f64,
) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("concentration c = {c} must be positive")));
    }
    let u = interior(mu.cdf_at(x), "(0,1) for F_mu(x)")?;
    let p = interior(nu.cdf_at(y), "(0,1) for F_nu(y)")?;
    let below = y_data.iter().filter(|v| **v <= y).count() as f64;
    let above = y_data.len() as f64 - below;
    beta_law(copula, u, a, c * p + below, c * (1.0 - p) + above)
}

/// Beta parameters of `G(y)` given the data.
pub fn posterior_beta_parameters(c: f64, nu: &Grid1D, y_data: &[f64], y: f64) -> (f64, f64) {
    let p = nu.cdf_at(y);
    let below = y_data.iter().filter(|v| **v <= y).count() as f64;
    (c * p + below, c * (1.0 - p) + y_data.len() as f64 - below)
}

/// Average of [`composed_cdf_law`] over copulas drawn from `sampler`.
#[allow(clippy::too_many_arguments)]
pub fn random_copula_law(
    sampler: &dyn CopulaSampler,
    mu: &Grid1D,
    c: f64,
    nu: &Grid1D,
    x: f64,
    y: f64,
    a: f64,
    n_mc: usize,
    seed: u64,
) -> Result<Estimate> {
    if n_mc < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!("{n_mc} draws; at least {MIN_DRAWS} needed")));
    }
    let values: Vec<f64> = (0..n_mc as u64)
        .into_par_iter()
        .map(|i| {
            let copula = sampler.sample(&mut stream(seed, i))?;
            composed_cdf_law(copula.as_ref(), mu, c, nu, x, y, a)
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&values))
}

/// `P(X_{n+1} in A, Y_{n+1} in B | Z_1..Z_n) = mu(A) nu_n(B) / (c + n)`.
pub fn product_prior_predictive(
    c: f64,
    nu: &Grid1D,
    mu: &Grid1D,
    y_data: &[f64],
    a: &IntervalSet,
    b: &IntervalSet,
) -> Result<f64> {
    let base = PosteriorBaseMeasure::new(c, nu.clone(), y_data.to_vec())?;
    Ok(mu.set_mass(a) * base.mass(b) / base.total_mass())
}
