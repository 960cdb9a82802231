//! Prior families behind a common trait, registered by name.

use std::collections::BTreeMap;
use std::fmt::Debug;

use rand::RngCore;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{Observation, Rect};

/// One realization of a random density on [0,1]^2.
///
/// Densities are taken with respect to the product of the family's marginals.
pub trait RandomDensity: Send + Sync + Debug {
    fn family(&self) -> &'static str;

    fn density(&self, x: f64, y: f64) -> f64;

    fn rect_prob(&self, rect: &Rect) -> f64;

    /// `n` i.i.d. points from the realized measure.
    fn sample_points(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Observation>>;

    /// The random coefficients of this draw (mixture weights, tensor coefficients).
    fn parameters(&self) -> Vec<f64>;

    fn to_json(&self) -> Value;
}

/// A law on random densities.
pub trait PriorFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn sample(&self, rng: &mut dyn RngCore) -> Result<Box<dyn RandomDensity>>;

    /// Parameters, echoed into run reports.
    fn describe(&self) -> Value;
}

pub type PriorBuilder = fn(&Value) -> Result<Box<dyn PriorFamily>>;

/// Name-indexed constructors of prior families from JSON configs.
pub struct PriorRegistry {
    builders: BTreeMap<&'static str, PriorBuilder>,
}

impl PriorRegistry {
    pub fn empty() -> Self {
        Self { builders: BTreeMap::new() }
    }

    /// `tensor`, `brownian` and `checkerboard`.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register("tensor", crate::tensor_prior::TensorPrior::from_config);
        r.register("brownian", crate::tensor_prior::BrownianPrior::from_config);
        r.register("checkerboard", crate::checkerboard_prior::CheckerboardPrior::from_config);
        r
    }

    pub fn register(&mut self, name: &'static str, builder: PriorBuilder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    /// Builds the family named by the config's `"family"` field.
    pub fn build(&self, config: &Value) -> Result<Box<dyn PriorFamily>> {
        let name = config
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("prior config needs a string field `family`".into()))?;
        let builder = self.builders.get(name).ok_or_else(|| Error::UnknownName {
            kind: "prior family",
            name: name.to_string(),
            known: self.names().join(", "),
        })?;
        builder(config)
    }
}

impl Default for PriorRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

/// Reads an optional field of a JSON config.
pub(crate) fn opt_field<T: serde::de::DeserializeOwned>(config: &Value, key: &str) -> Result<Option<T>> {
    match config.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| Error::Config(format!("field `{key}`: {e}"))),
    }
}
