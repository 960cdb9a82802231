use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde_json::{json, Value};

use super::basis::{haar_basis, BasisPair};
use super::coeff::{CoeffLaw, Coupling};
use crate::error::{Error, Result};
use crate::family::{opt_field, PriorFamily, RandomDensity};
use crate::geometry::{Observation, Rect};
use crate::measures::{Grid1D, DEFAULT_CELLS};

/// Rejection sampling gives up when fewer than this fraction of proposals are accepted.
pub const MIN_ACCEPTANCE: f64 = 0.1;
const WARM_UP: usize = 1000;

/// `f(x,y) = 1 + sum_n U_n g_n(x) h_n(y)`, a density with respect to `mu x nu`.
#[derive(Debug, Clone)]
pub struct TensorDensity {
    family: &'static str,
    mu: Grid1D,
    nu: Grid1D,
    basis: Arc<Vec<BasisPair>>,
    coeffs: Vec<f64>,
}

impl TensorDensity {
    pub fn new(mu: Grid1D, nu: Grid1D, basis: Arc<Vec<BasisPair>>, coeffs: Vec<f64>) -> Result<Self> {
        Self::with_family("tensor", mu, nu, basis, coeffs)
    }

    pub(crate) fn with_family(
        family: &'static str,
        mu: Grid1D,
        nu: Grid1D,
        basis: Arc<Vec<BasisPair>>,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if basis.len() != coeffs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} basis pairs but {} coefficients",
                basis.len(),
                coeffs.len()
            )));
        }
        let l1: f64 = coeffs.iter().map(|u| u.abs()).sum();
        if l1 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!("sum |U_n| = {l1} > 1")));
        }
        Ok(Self { family, mu, nu, basis, coeffs })
    }

    /// The constant density 1.
    pub fn uniform(mu: Grid1D, nu: Grid1D) -> Self {
        Self { family: "tensor", mu, nu, basis: Arc::new(Vec::new()), coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &[BasisPair] {
        &self.basis
    }

    pub fn mu(&self) -> &Grid1D {
        &self.mu
    }

    pub fn nu(&self) -> &Grid1D {
        &self.nu
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        1.0 + self
            .basis
            .iter()
            .zip(&self.coeffs)
            .map(|(p, u)| u * p.g().eval(x) * p.h().eval(y))
            .sum::<f64>()
    }

    /// `P_f(H) = lambda(H) + sum_n a_n(H) U_n` with `a_n(H)` factorized over the rectangle.
    pub fn rectangle_prob(&self, rect: &Rect) -> f64 {
        let lambda = self.mu.interval_mass(rect.x0, rect.x1) * self.nu.interval_mass(rect.y0, rect.y1);
        let tail: f64 = self
            .basis
            .iter()
            .zip(&self.coeffs)
            .map(|(p, u)| u * p.integral_g(rect.x0, rect.x1) * p.integral_h(rect.y0, rect.y1))
            .sum();
        lambda + tail
    }

    /// Rejection sampling from the envelope `2 (mu x nu)`; valid because `f <= 2`.
    pub fn sample_points_rejection(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Observation>> {
        let mut out = Vec::with_capacity(n);
        let (mut proposed, mut accepted) = (0usize, 0usize);
        while out.len() < n {
            let x = self.mu.sample(rng);
            let y = self.nu.sample(rng);
            proposed += 1;
            if 2.0 * rng.random::<f64>() < self.eval(x, y) {
                accepted += 1;
                out.push(Observation { x, y });
            }
            if proposed >= WARM_UP {
                let rate = accepted as f64 / proposed as f64;
                if rate < MIN_ACCEPTANCE {
                    return Err(Error::LowAcceptance { rate, floor: MIN_ACCEPTANCE });
                }
            }
        }
        Ok(out)
    }
}

impl RandomDensity for TensorDensity {
    fn family(&self) -> &'static str {
        self.family
    }

    fn density(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y)
    }

    fn rect_prob(&self, rect: &Rect) -> f64 {
        self.rectangle_prob(rect)
    }

    fn sample_points(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Observation>> {
        self.sample_points_rejection(n, rng)
    }

    fn parameters(&self) -> Vec<f64> {
        self.coeffs.clone()
    }

    fn to_json(&self) -> Value {
        json!({ "family": self.family, "coeffs": self.coeffs })
    }
}

/// Law of `f = 1 + sum U_n g_n h_n` for a fixed basis and coefficient law.
#[derive(Debug, Clone)]
pub struct TensorPrior {
    mu: Grid1D,
    nu: Grid1D,
    basis: Arc<Vec<BasisPair>>,
    law: CoeffLaw,
    levels: Option<u32>,
}

impl TensorPrior {
    pub fn new(mu: Grid1D, nu: Grid1D, basis: Vec<BasisPair>, law: CoeffLaw) -> Result<Self> {
        if basis.len() != law.len() {
            return Err(Error::InvalidParameter(format!(
                "{} basis pairs but {} coefficient laws",
                basis.len(),
                law.len()
            )));
        }
        Ok(Self { mu, nu, basis: Arc::new(basis), law, levels: None })
    }

    /// Haar basis with `2^levels - 1` pairs and `U_n = V_n 2^-n`, `V_n` uniform on [-1,1].
    pub fn haar(levels: u32, mu: Grid1D, nu: Grid1D) -> Result<Self> {
        let basis = haar_basis(levels, &mu, &nu)?;
        let law = CoeffLaw::geometric_uniform(basis.len());
        let mut prior = Self::new(mu, nu, basis, law)?;
        prior.levels = Some(levels);
        Ok(prior)
    }

    pub fn with_law(mut self, law: CoeffLaw) -> Result<Self> {
        if law.len() != self.basis.len() {
            return Err(Error::InvalidParameter("law length does not match basis".into()));
        }
        self.law = law;
        Ok(self)
    }

    pub fn law(&self) -> &CoeffLaw {
        &self.law
    }

    pub fn basis(&self) -> &[BasisPair] {
        &self.basis
    }

    pub fn mu(&self) -> &Grid1D {
        &self.mu
    }

    pub fn nu(&self) -> &Grid1D {
        &self.nu
    }

    /// Draws the coefficients and assembles the density.
    pub fn sample_density(&self, rng: &mut dyn RngCore) -> TensorDensity {
        let coeffs = self.law.sample(rng);
        TensorDensity::new(self.mu.clone(), self.nu.clone(), self.basis.clone(), coeffs)
            .expect("coefficient law enforces the l1 bound")
    }

    /// `a_n(H)` for every basis pair.
    pub fn rect_coefficients(&self, rect: &Rect) -> Vec<f64> {
        self.basis
            .iter()
            .map(|p| p.integral_g(rect.x0, rect.x1) * p.integral_h(rect.y0, rect.y1))
            .collect()
    }

    /// `E exp(i t P_f(H)) = exp(i lambda(H) t) prod_n phi_n(a_n(H) t)`.
    pub fn char_function(&self, rect: &Rect, t: f64) -> Result<Complex64> {
        if !self.law.is_independent() {
            return Err(Error::DependentCoefficients);
        }
        let lambda = self.mu.interval_mass(rect.x0, rect.x1) * self.nu.interval_mass(rect.y0, rect.y1);
        let base = Complex64::new(0.0, lambda * t).exp();
        Ok(self
            .rect_coefficients(rect)
            .iter()
            .zip(self.law.dists())
            .fold(base, |acc, (a, d)| acc * d.char_fn(a * t)))
    }

    /// Config: `{"family":"tensor","levels":3,"cells":256,"mu":{..},"nu":{..},"law":"uniform"}`.
    ///
    /// `law` is `uniform`, `rademacher` or `shared-sign`; `mu`/`nu` default to Lebesgue.
    pub fn from_config(config: &Value) -> Result<Box<dyn PriorFamily>> {
        let levels: u32 = opt_field(config, "levels")?.unwrap_or(3);
        if levels > 12 {
            return Err(Error::Config(format!("levels = {levels} is too fine")));
        }
        let cells: usize = opt_field(config, "cells")?.unwrap_or(DEFAULT_CELLS);
        let mu: Grid1D = opt_field(config, "mu")?.unwrap_or_else(|| Grid1D::uniform(cells));
        let nu: Grid1D = opt_field(config, "nu")?.unwrap_or_else(|| Grid1D::uniform(cells));
        let prior = Self::haar(levels, mu, nu)?;
        let n = prior.basis.len();
        let law = match opt_field::<String>(config, "law")?.as_deref().unwrap_or("uniform") {
            "uniform" => CoeffLaw::geometric_uniform(n),
            "rademacher" => CoeffLaw::geometric_rademacher(n),
            "shared-sign" => {
                CoeffLaw::new(CoeffLaw::geometric_uniform(n).dists().to_vec(), Coupling::SharedSign)?
            }
            other => return Err(Error::Config(format!("unknown coefficient law `{other}`"))),
        };
        Ok(Box::new(prior.with_law(law)?))
    }
}

impl PriorFamily for TensorPrior {
    fn name(&self) -> &'static str {
        "tensor"
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<Box<dyn RandomDensity>> {
        Ok(Box::new(self.sample_density(rng)))
    }

    fn describe(&self) -> Value {
        json!({
            "family": "tensor",
            "levels": self.levels,
            "basis_pairs": self.basis.len(),
            "mu_cells": self.mu.n_cells(),
            "nu_cells": self.nu.n_cells(),
            "law": self.law,
        })
    }
}
