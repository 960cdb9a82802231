use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::checkerboard_prior::{CheckerboardDensity, CheckerboardMixture, CheckerboardPrior};
use crate::error::{Error, Result};
use crate::measures::Grid2D;

/// Tolerance of the uniform-marginal and 2-increasing checks on grid copulas.
pub const COPULA_TOL: f64 = 1e-10;

/// A bivariate distribution function with uniform marginals on `[0,1]^2`.
pub trait Copula: Send + Sync + Debug {
    fn name(&self) -> &str;

    fn cdf(&self, u: f64, v: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Product;

impl Copula for Product {
    fn name(&self) -> &str {
        "product"
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        u.clamp(0.0, 1.0) * v.clamp(0.0, 1.0)
    }
}

/// `min(u, v)`.
#[derive(Debug, Clone, Copy)]
pub struct Comonotone;

impl Copula for Comonotone {
    fn name(&self) -> &str {
        "comonotone"
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        u.clamp(0.0, 1.0).min(v.clamp(0.0, 1.0))
    }
}

/// `max(u + v - 1, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct Countermonotone;

impl Copula for Countermonotone {
    fn name(&self) -> &str {
        "countermonotone"
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        (u.clamp(0.0, 1.0) + v.clamp(0.0, 1.0) - 1.0).max(0.0)
    }
}

/// Bilinear interpolation of copula values on the `(k+1) x (k+1)` nodes `(i/k, j/k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridCopulaRepr", into = "GridCopulaRepr")]
pub struct GridCopula {
    k: usize,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridCopulaRepr {
    k: usize,
    values: Vec<Vec<f64>>,
}

impl TryFrom<GridCopulaRepr> for GridCopula {
    type Error = Error;
    fn try_from(r: GridCopulaRepr) -> Result<Self> {
        if r.values.len() != r.k + 1 || r.values.iter().any(|row| row.len() != r.k + 1) {
            return Err(Error::InvalidParameter(format!("copula grid must be {0}x{0}", r.k + 1)));
        }
        GridCopula::new(r.k, r.values.concat())
    }
}

impl From<GridCopula> for GridCopulaRepr {
    fn from(c: GridCopula) -> Self {
        GridCopulaRepr { k: c.k, values: c.values.chunks(c.k + 1).map(<[f64]>::to_vec).collect() }
    }
}

impl GridCopula {
    /// `values[i * (k+1) + j] = C(i/k, j/k)`.
    pub fn new(k: usize, values: Vec<f64>) -> Result<Self> {
        let n = k + 1;
        if k == 0 || values.len() != n * n {
            return Err(Error::InvalidParameter(format!("{} node values for k = {k}", values.len())));
        }
        let at = |i: usize, j: usize| values[i * n + j];
        for i in 0..n {
            let t = i as f64 / k as f64;
            let errs = [at(i, 0), at(0, i), at(i, k) - t, at(k, i) - t];
            if errs.iter().any(|e| e.abs() > COPULA_TOL) {
                return Err(Error::InvalidMeasure(format!("grid copula marginals fail at node {i}")));
            }
        }
        for i in 0..k {
            for j in 0..k {
                let vol = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
                if vol < -COPULA_TOL {
                    return Err(Error::InvalidMeasure(format!("negative mass {vol} in cell ({i},{j})")));
                }
            }
        }
        Ok(Self { k, values })
    }

    /// Exact, since a checkerboard cdf is bilinear on every cell.
    pub fn from_checkerboard(d: &CheckerboardDensity) -> Result<Self> {
        let k = d.k();
        let n = k + 1;
        let k2 = (k * k) as f64;
        let mut values = vec![0.0; n * n];
        for i in 1..n {
            for j in 1..n {
                values[i * n + j] = values[(i - 1) * n + j] + values[i * n + j - 1] - values[(i - 1) * n + j - 1]
                    + d.at(i - 1, j - 1) / k2;
            }
        }
        Self::new(k, values)
    }

    /// The cdf of a square grid measure, which must have uniform marginals.
    pub fn from_grid(p: &Grid2D) -> Result<Self> {
        let k = p.k_x();
        if p.k_y() != k {
            return Err(Error::GridMismatch { left: format!("{k} rows"), right: format!("{} columns", p.k_y()) });
        }
        let d: Vec<f64> = p.mass().iter().map(|m| m * (k * k) as f64).collect();
        Self::from_checkerboard(&CheckerboardDensity::new(k, d)?)
    }

    /// A JSON document holding a grid copula (`k`, `values`), a checkerboard
    /// mixture (`k`, `perms`, `weights`) or a grid measure (`k_x`, `k_y`, `mass`).
    pub fn from_json(v: &Value) -> Result<Self> {
        if v.get("values").is_some() {
            Ok(serde_json::from_value(v.clone())?)
        } else if v.get("perms").is_some() {
            let mix: CheckerboardMixture = serde_json::from_value(v.clone())?;
            Self::from_checkerboard(&mix.to_matrix())
        } else if v.get("mass").is_some() {
            Self::from_grid(&serde_json::from_value(v.clone())?)
        } else {
            Err(Error::Config("copula file needs `values`, `perms` or `mass`".into()))
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl Copula for GridCopula {
    fn name(&self) -> &str {
        "grid"
    }

    fn cdf(&self, u: f64, v: f64) -> f64 {
        let k = self.k;
        let n = k + 1;
        let (su, sv) = (u.clamp(0.0, 1.0) * k as f64, v.clamp(0.0, 1.0) * k as f64);
        let (i, j) = ((su as usize).min(k - 1), (sv as usize).min(k - 1));
        let (fu, fv) = (su - i as f64, sv - j as f64);
        let at = |i: usize, j: usize| self.values[i * n + j];
        at(i, j) * (1.0 - fu) * (1.0 - fv)
            + at(i + 1, j) * fu * (1.0 - fv)
            + at(i, j + 1) * (1.0 - fu) * fv
            + at(i + 1, j + 1) * fu * fv
    }
}

/// Named copulas; files are handled by [`GridCopula::from_json`].
pub struct CopulaRegistry {
    copulas: BTreeMap<&'static str, Arc<dyn Copula>>,
}

impl CopulaRegistry {
    pub fn standard() -> Self {
        let mut r = Self { copulas: BTreeMap::new() };
        r.register("product", Arc::new(Product));
        r.register("comonotone", Arc::new(Comonotone));
        r.register("countermonotone", Arc::new(Countermonotone));
        r
    }

    pub fn register(&mut self, name: &'static str, copula: Arc<dyn Copula>) {
        self.copulas.insert(name, copula);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.copulas.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Copula>> {
        self.copulas.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "copula",
            name: name.to_string(),
            known: self.names().join(", "),
        })
    }
}

impl Default for CopulaRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

/// A law on copulas.
pub trait CopulaSampler: Send + Sync {
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Arc<dyn Copula>>;
}

/// A point mass at one copula.
#[derive(Debug, Clone)]
pub struct FixedCopula(pub Arc<dyn Copula>);

impl CopulaSampler for FixedCopula {
    fn sample(&self, _rng: &mut dyn RngCore) -> Result<Arc<dyn Copula>> {
        Ok(self.0.clone())
    }
}

/// Finitely many copulas with probabilities.
#[derive(Debug, Clone)]
pub struct FiniteCopulaLaw {
    atoms: Vec<(Arc<dyn Copula>, f64)>,
}

impl FiniteCopulaLaw {
    pub fn new(atoms: Vec<(Arc<dyn Copula>, f64)>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if atoms.is_empty() || atoms.iter().any(|a| !(a.1 >= 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("copula probabilities must form a probability vector".into()));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(Arc<dyn Copula>, f64)] {
        &self.atoms
    }
}

impl CopulaSampler for FiniteCopulaLaw {
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Arc<dyn Copula>> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (c, w) in &self.atoms {
            acc += w;
            if u < acc {
                return Ok(c.clone());
            }
        }
        let last = self.atoms.iter().rev().find(|a| a.1 > 0.0).unwrap();
        Ok(last.0.clone())
    }
}

/// The cdf of a random checkerboard mixture.
pub struct CheckerboardCopulaLaw(pub CheckerboardPrior);

impl CopulaSampler for CheckerboardCopulaLaw {
    fn sample(&self, rng: &mut dyn RngCore) -> Result<Arc<dyn Copula>> {
        let mix = self.0.sample_mixture(rng)?;
        Ok(Arc::new(GridCopula::from_checkerboard(&mix.to_matrix())?))
    }
}
