use rand::{Rng, RngCore};
use rand_distr::{Beta, Distribution};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::IntervalSet;
use crate::measures::{Cdf1D, Grid1D};

/// Stick mass left over when breaking stops.
pub const RESIDUAL_TOL: f64 = 1e-8;

/// `nu_n = c nu + sum_i delta_{Y_i}`, unnormalized; `n = 0` is the prior base.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorBaseMeasure {
    c: f64,
    nu: Grid1D,
    ys: Vec<f64>,
}

impl PosteriorBaseMeasure {
    pub fn prior(c: f64, nu: Grid1D) -> Result<Self> {
        Self::new(c, nu, Vec::new())
    }

    pub fn new(c: f64, nu: Grid1D, ys: Vec<f64>) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("concentration c = {c} must be positive")));
        }
        if let Some(y) = ys.iter().find(|y| !(0.0..=1.0).contains(*y)) {
            return Err(Error::OutOfRange { value: *y, range: "[0,1]" });
        }
        Ok(Self { c, nu, ys })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn nu(&self) -> &Grid1D {
        &self.nu
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    /// `c + n`.
    pub fn total_mass(&self) -> f64 {
        self.c + self.ys.len() as f64
    }

    /// `nu_n(B)`.
    pub fn mass(&self, set: &IntervalSet) -> f64 {
        self.c * self.nu.set_mass(set) + self.ys.iter().filter(|y| set.contains(**y)).count() as f64
    }

    /// `nu_n([0, y])`.
    pub fn mass_below(&self, y: f64) -> f64 {
        self.c * self.nu.cdf_at(y) + self.ys.iter().filter(|v| **v <= y).count() as f64
    }

    /// A draw from `nu_n / (c + n)`. With no data this consumes the generator
    /// exactly as a draw from `nu` does.
    pub fn sample_location(&self, rng: &mut dyn RngCore) -> f64 {
        if self.ys.is_empty() {
            return self.nu.sample(rng);
        }
        let u: f64 = rng.random::<f64>() * self.total_mass();
        if u < self.c {
            self.nu.sample(rng)
        } else {
            self.ys[rng.random_range(0..self.ys.len())]
        }
    }
}

/// `Q = sum_j w_j delta_{theta_j}` with `w_j = V_j prod_{i<j} (1 - V_i)`,
/// `V_j ~ Beta(1, c + n)`; the leftover stick goes to one final atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DPStickBreaking {
    concentration: f64,
    atoms: Vec<(f64, f64)>,
}

impl DPStickBreaking {
    pub fn sample(base: &PosteriorBaseMeasure, rng: &mut dyn RngCore) -> Self {
        let concentration = base.total_mass();
        let stick = Beta::new(1.0, concentration).expect("positive concentration");
        let mut atoms = Vec::new();
        let mut rest = 1.0;
        while rest >= RESIDUAL_TOL {
            let v = stick.sample(rng);
            let w = rest * v;
            atoms.push((base.sample_location(rng), w));
            rest -= w;
        }
        atoms.push((base.sample_location(rng), rest));
        Self { concentration, atoms }
    }

    pub fn concentration(&self) -> f64 {
        self.concentration
    }

    /// `(location, weight)` pairs; the last one carries the truncation residual.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn truncation(&self) -> usize {
        self.atoms.len() - 1
    }

    pub fn mass(&self, set: &IntervalSet) -> f64 {
        self.atoms.iter().filter(|a| set.contains(a.0)).map(|a| a.1).sum()
    }

    /// `G(y) = Q([0, y])`.
    pub fn cdf_at(&self, y: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 <= y).map(|a| a.1).sum()
    }

    pub fn cdf(&self) -> Cdf1D {
        Cdf1D::from_atoms(&self.atoms).expect("stick weights are a probability vector")
    }

    /// `Q(cell j)` for `k` equal cells.
    pub fn cell_masses(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; k];
        for &(loc, w) in &self.atoms {
            out[crate::geometry::cell_index(loc, k)] += w;
        }
        out
    }
}
