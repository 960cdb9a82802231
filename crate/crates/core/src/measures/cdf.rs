use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CdfKind {
    /// Right-continuous step function with atoms at the knots.
    Step,
    /// Continuous, linear between knots; `values[0]` is the mass left of `knots[0]`.
    Linear,
}

/// A distribution function stored on a knot grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cdf1D {
    knots: Vec<f64>,
    values: Vec<f64>,
    kind: CdfKind,
}

impl Cdf1D {
    pub fn from_parts(knots: Vec<f64>, values: Vec<f64>, kind: CdfKind) -> Result<Self> {
        if knots.is_empty() || knots.len() != values.len() {
            return Err(Error::InvalidMeasure("knots and values must be non-empty and aligned".into()));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidMeasure("knots must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) || values[0] < 0.0 {
            return Err(Error::InvalidMeasure("cdf values must be non-decreasing and >= 0".into()));
        }
        let last = *values.last().unwrap();
        if (last - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMeasure(format!("cdf ends at {last}, expected 1")));
        }
        if kind == CdfKind::Linear && values[0] != 0.0 {
            return Err(Error::InvalidMeasure("continuous cdf must start at 0".into()));
        }
        let mut values = values;
        *values.last_mut().unwrap() = 1.0;
        Ok(Self { knots, values, kind })
    }

    /// Step cdf of a discrete measure given by (location, mass) atoms.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut sorted: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.1 > 0.0).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut knots: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut acc = 0.0;
        for (loc, m) in sorted {
            acc += m;
            if knots.last() == Some(&loc) {
                *values.last_mut().unwrap() = acc;
            } else {
                knots.push(loc);
                values.push(acc);
            }
        }
        Self::from_parts(knots, values, CdfKind::Step)
    }

    pub fn kind(&self) -> CdfKind {
        self.kind
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> f64 {
        // index of the last knot <= t
        let idx = self.knots.partition_point(|k| *k <= t);
        match self.kind {
            CdfKind::Step => {
                if idx == 0 {
                    0.0
                } else {
                    self.values[idx - 1]
                }
            }
            CdfKind::Linear => {
                if idx == 0 {
                    0.0
                } else if idx == self.knots.len() {
                    1.0
                } else {
                    let (k0, k1) = (self.knots[idx - 1], self.knots[idx]);
                    let (v0, v1) = (self.values[idx - 1], self.values[idx]);
                    v0 + (v1 - v0) * (t - k0) / (k1 - k0)
                }
            }
        }
    }

    /// Generalized inverse `inf{t : F(t) >= u}`; `u = 0` maps to the leftmost support point.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::OutOfRange { value: u, range: "[0,1]" });
        }
        match self.kind {
            CdfKind::Step => {
                let i = if u == 0.0 {
                    self.values.iter().position(|v| *v > 0.0).unwrap()
                } else {
                    self.values.partition_point(|v| *v < u).min(self.knots.len() - 1)
                };
                Ok(self.knots[i])
            }
            CdfKind::Linear => {
                if u == 0.0 {
                    let i = self.values.iter().position(|v| *v > 0.0).unwrap();
                    return Ok(self.knots[i - 1]);
                }
                let i = self.values.partition_point(|v| *v < u).min(self.knots.len() - 1);
                let (k0, k1) = (self.knots[i - 1], self.knots[i]);
                let (v0, v1) = (self.values[i - 1], self.values[i]);
                Ok(k0 + (k1 - k0) * ((u - v0) / (v1 - v0)).clamp(0.0, 1.0))
            }
        }
    }

    /// `t,F` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,F\n");
        for (k, v) in self.knots.iter().zip(&self.values) {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}
