//! Random densities driven by two independent Brownian paths.
//!
//! With `g(t) = phi(W_1(t)) - int_0^1 phi(W_1)` and `h` built the same way from
//! `W_2`, the density `f = 1 + g(x) h(y)` satisfies
//! `P_f([0,a] x [0,b]) = ab + 4 U_1(a) U_2(b)` where
//! `U_i(t) = (int_0^t phi(W_i) - t int_0^1 phi(W_i)) / 2`.
//! Paths use Euler increments on a uniform time grid and time integrals use
//! the trapezoid rule on the same grid.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use super::basis::{Basis1D, BasisPair};
use super::density::TensorDensity;
use crate::error::{Error, Result};
use crate::family::{opt_field, PriorFamily, RandomDensity};
use crate::measures::Grid1D;

pub const MIN_STEPS: usize = 1000;

/// A bounded map applied to the Brownian paths.
pub trait Phi: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn eval(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub struct Indicator;

impl Phi for Indicator {
    fn name(&self) -> &str {
        "indicator"
    }
    fn eval(&self, x: f64) -> f64 {
        if x > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HalfTanh;

impl Phi for HalfTanh {
    fn name(&self) -> &str {
        "half-tanh"
    }
    fn eval(&self, x: f64) -> f64 {
        0.5 * x.tanh()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct HalfSin;

impl Phi for HalfSin {
    fn name(&self) -> &str {
        "half-sin"
    }
    fn eval(&self, x: f64) -> f64 {
        0.5 * x.sin()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Clip;

impl Phi for Clip {
    fn name(&self) -> &str {
        "clip"
    }
    fn eval(&self, x: f64) -> f64 {
        x.clamp(-0.5, 0.5)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl Phi for Constant {
    fn name(&self) -> &str {
        "constant"
    }
    fn eval(&self, _x: f64) -> f64 {
        self.0
    }
}

/// Named `phi` maps.
pub struct PhiRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Phi>>,
}

impl PhiRegistry {
    pub fn standard() -> Self {
        let mut entries: BTreeMap<&'static str, Arc<dyn Phi>> = BTreeMap::new();
        entries.insert("indicator", Arc::new(Indicator));
        entries.insert("half-tanh", Arc::new(HalfTanh));
        entries.insert("half-sin", Arc::new(HalfSin));
        entries.insert("clip", Arc::new(Clip));
        entries.insert("constant", Arc::new(Constant(0.25)));
        Self { entries }
    }

    pub fn register(&mut self, name: &'static str, phi: Arc<dyn Phi>) {
        self.entries.insert(name, phi);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Phi>> {
        self.entries.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "phi",
            name: name.to_string(),
            known: self.entries.keys().copied().collect::<Vec<_>>().join(", "),
        })
    }
}

/// Checks `-1/2 <= phi <= 1/2` or `0 <= phi <= 1` on a probe grid over [-10, 10].
pub fn check_phi_range(phi: &dyn Phi) -> Result<()> {
    let probes = (0..=20_000).map(|i| -10.0 + i as f64 * 1e-3);
    let (lo, hi) = probes
        .map(|x| phi.eval(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let centered = lo >= -0.5 && hi <= 0.5;
    let unit = lo >= 0.0 && hi <= 1.0;
    if centered || unit {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "phi `{}` ranges over [{lo}, {hi}], outside [-1/2, 1/2] and [0, 1]",
            phi.name()
        )))
    }
}

/// `t -> (int_0^t phi(W) ds - t int_0^1 phi(W) ds) / 2` on one sampled path.
#[derive(Debug, Clone)]
pub struct OccupationFunctional {
    /// `phi(W(k / n))`, `k = 0..=n`.
    values: Vec<f64>,
    /// Trapezoid integral up to each grid time.
    cumulative: Vec<f64>,
}

impl OccupationFunctional {
    fn new(values: Vec<f64>) -> Self {
        let n = values.len() - 1;
        let dt = 1.0 / n as f64;
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in values.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * dt;
            cumulative.push(acc);
        }
        Self { values, cumulative }
    }

    fn steps(&self) -> usize {
        self.values.len() - 1
    }

    /// `int_0^t phi(W(s)) ds` with the path values linearly interpolated.
    pub fn time_integral(&self, t: f64) -> f64 {
        let n = self.steps();
        let s = t.clamp(0.0, 1.0) * n as f64;
        let k = (s.floor() as usize).min(n - 1);
        let frac = s - k as f64;
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        let vt = v0 + (v1 - v0) * frac;
        self.cumulative[k] + 0.5 * (v0 + vt) * frac / n as f64
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        0.5 * (self.time_integral(t) - t * self.total())
    }

    /// The centered map `g(t) = phi(W(t)) - int_0^1 phi(W)`, linear between grid times.
    pub fn centered(&self) -> Basis1D {
        let mean = self.total();
        if self.values.iter().all(|v| *v == self.values[0]) {
            return Basis1D::Linear(vec![0.0; self.values.len()]);
        }
        Basis1D::Linear(self.values.iter().map(|v| v - mean).collect())
    }
}

/// One draw of the Brownian construction.
#[derive(Debug, Clone)]
pub struct BrownianDraw {
    pub density: TensorDensity,
    pub u1: OccupationFunctional,
    pub u2: OccupationFunctional,
}

impl BrownianDraw {
    /// `ab + 4 U_1(a) U_2(b)`.
    pub fn occupation_identity(&self, a: f64, b: f64) -> f64 {
        a * b + 4.0 * self.u1.eval(a) * self.u2.eval(b)
    }
}

fn brownian_values(phi: &dyn Phi, n_steps: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let sd = (1.0 / n_steps as f64).sqrt();
    let mut w = 0.0;
    let mut values = Vec::with_capacity(n_steps + 1);
    values.push(phi.eval(w));
    for _ in 0..n_steps {
        let z: f64 = StandardNormal.sample(rng);
        w += sd * z;
        values.push(phi.eval(w));
    }
    values
}

/// Simulates `W_1`, `W_2` and returns `f = 1 + g h` with the occupation functionals.
pub fn brownian_density(phi: &dyn Phi, n_steps: usize, rng: &mut dyn RngCore) -> Result<BrownianDraw> {
    check_phi_range(phi)?;
    if n_steps < MIN_STEPS {
        return Err(Error::InvalidParameter(format!("n_steps = {n_steps} < {MIN_STEPS}")));
    }
    let u1 = OccupationFunctional::new(brownian_values(phi, n_steps, rng));
    let u2 = OccupationFunctional::new(brownian_values(phi, n_steps, rng));
    let m = Grid1D::uniform(1);
    let pair = BasisPair::new(u1.centered(), u2.centered(), &m, &m)?;
    let density = TensorDensity::with_family("brownian", m.clone(), m, Arc::new(vec![pair]), vec![1.0])?;
    Ok(BrownianDraw { density, u1, u2 })
}

/// Prior whose draws are Brownian densities for a fixed `phi`.
#[derive(Debug, Clone)]
pub struct BrownianPrior {
    phi: Arc<dyn Phi>,
    n_steps: usize,
}

impl BrownianPrior {
    pub fn new(phi: Arc<dyn Phi>, n_steps: usize) -> Result<Self> {
        check_phi_range(phi.as_ref())?;
        if n_steps < MIN_STEPS {
            return Err(Error::InvalidParameter(format!("n_steps = {n_steps} < {MIN_STEPS}")));
        }
        Ok(Self { phi, n_steps })
    }

    pub fn draw(&self, rng: &mut dyn RngCore) -> Result<BrownianDraw> {
        brownian_density(self.phi.as_ref(), self.n_steps, rng)
    }

    /// Config: `{"family":"brownian","phi":"half-tanh","n_steps":10000}`.
    pub fn from_config(config: &Value) -> Result<Box<dyn PriorFamily>> {
        let name: String = opt_field(config, "phi")?.unwrap_or_else(|| "half-tanh".into());
        let n_steps: usize = opt_field(config, "n_steps")?.unwrap_or(MIN_STEPS);
        let phi = PhiRegistry::standard().get(&name)?;
        Ok(Box::new(Self::new(phi, n_steps)?))
    }
}

impl PriorFamily for BrownianPrior {
    fn name(&self) -> &'static str {
        "brownian"
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<Box<dyn RandomDensity>> {
        Ok(Box::new(self.draw(rng)?.density))
    }

    fn describe(&self) -> Value {
        json!({ "family": "brownian", "phi": self.phi.name(), "n_steps": self.n_steps })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    #[test]
    fn constant_phi_gives_the_uniform_density() {
        let draw = brownian_density(&Constant(0.3), 2000, &mut crate::rng::stream(5, 0)).unwrap();
        for t in [0.0, 0.2, 0.75, 1.0] {
            assert!(draw.u1.eval(t).abs() < 1e-14);
            assert!(draw.u2.eval(t).abs() < 1e-14);
            assert_eq!(draw.density.eval(t, 1.0 - t), 1.0);
        }
    }

    #[test]
    fn out_of_range_phi_is_rejected() {
        #[derive(Debug)]
        struct Wide;
        impl Phi for Wide {
            fn name(&self) -> &str {
                "wide"
            }
            fn eval(&self, x: f64) -> f64 {
                x.tanh()
            }
        }
        assert!(brownian_density(&Wide, 2000, &mut crate::rng::stream(0, 0)).is_err());
        assert!(brownian_density(&HalfTanh, 100, &mut crate::rng::stream(0, 0)).is_err());
    }

    #[test]
    fn full_range_edges_reduce_to_marginals() {
        let draw = brownian_density(&Indicator, 4000, &mut crate::rng::stream(8, 0)).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let pa = draw.density.rectangle_prob(&Rect::lower_left(t, 1.0).unwrap());
            let pb = draw.density.rectangle_prob(&Rect::lower_left(1.0, t).unwrap());
            assert!((pa - t).abs() < 1e-12, "{pa} vs {t}");
            assert!((pb - t).abs() < 1e-12);
            assert!((draw.occupation_identity(t, 1.0) - t).abs() < 1e-15);
        }
    }

    #[test]
    fn registry_lookup() {
        let reg = PhiRegistry::standard();
        assert_eq!(reg.get("clip").unwrap().eval(3.0), 0.5);
        assert!(reg.get("cubic").is_err());
    }
}
