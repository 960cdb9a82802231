use num_complex::Complex64;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of a single coefficient, supported in `[-radius, radius]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoeffDist {
    Zero,
    Uniform { radius: f64 },
    Rademacher { radius: f64 },
}

impl CoeffDist {
    pub fn radius(&self) -> f64 {
        match *self {
            CoeffDist::Zero => 0.0,
            CoeffDist::Uniform { radius } | CoeffDist::Rademacher { radius } => radius,
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> f64 {
        match *self {
            CoeffDist::Zero => 0.0,
            CoeffDist::Uniform { radius } => radius * rng.random_range(-1.0..=1.0),
            CoeffDist::Rademacher { radius } => {
                if rng.random::<bool>() {
                    radius
                } else {
                    -radius
                }
            }
        }
    }

    /// Characteristic function `E exp(i t U)`.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        match *self {
            CoeffDist::Zero => Complex64::new(1.0, 0.0),
            CoeffDist::Uniform { radius } => {
                let s = radius * t;
                Complex64::new(if s == 0.0 { 1.0 } else { s.sin() / s }, 0.0)
            }
            CoeffDist::Rademacher { radius } => Complex64::new((radius * t).cos(), 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    Independent,
    /// `U_n = S |V_n|` with one sign `S` shared by all coefficients.
    SharedSign,
}

/// Joint law of the coefficients `U_1, U_2, ...`.
///
/// The radii sum to at most one, so every draw satisfies `sum |U_n| <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffLaw {
    dists: Vec<CoeffDist>,
    coupling: Coupling,
}

impl CoeffLaw {
    pub fn new(dists: Vec<CoeffDist>, coupling: Coupling) -> Result<Self> {
        if dists.iter().any(|d| !(d.radius() >= 0.0 && d.radius().is_finite())) {
            return Err(Error::InvalidParameter("coefficient radius must be finite and >= 0".into()));
        }
        let total: f64 = dists.iter().map(CoeffDist::radius).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "coefficient radii sum to {total}; sum |U_n| <= 1 would not hold"
            )));
        }
        Ok(Self { dists, coupling })
    }

    /// `U_n = V_n 2^-n` with `V_n` i.i.d. uniform on [-1,1].
    pub fn geometric_uniform(n: usize) -> Self {
        let dists = (1..=n).map(|i| CoeffDist::Uniform { radius: 0.5f64.powi(i as i32) }).collect();
        Self { dists, coupling: Coupling::Independent }
    }

    /// `U_n = V_n 2^-n` with `V_n` i.i.d. uniform on {-1, 1}.
    pub fn geometric_rademacher(n: usize) -> Self {
        let dists = (1..=n).map(|i| CoeffDist::Rademacher { radius: 0.5f64.powi(i as i32) }).collect();
        Self { dists, coupling: Coupling::Independent }
    }

    pub fn len(&self) -> usize {
        self.dists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dists.is_empty()
    }

    pub fn dists(&self) -> &[CoeffDist] {
        &self.dists
    }

    pub fn is_independent(&self) -> bool {
        self.coupling == Coupling::Independent
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        match self.coupling {
            Coupling::Independent => self.dists.iter().map(|d| d.sample(rng)).collect(),
            Coupling::SharedSign => {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                self.dists.iter().map(|d| sign * d.sample(rng).abs()).collect()
            }
        }
    }
}
