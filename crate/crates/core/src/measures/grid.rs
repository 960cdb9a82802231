use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cdf::{Cdf1D, CdfKind};
use crate::error::{Error, Result};

pub const MASS_TOL: f64 = 1e-12;
pub const DEFAULT_CELLS: usize = 256;

/// Piecewise-uniform probability measure on [0,1] with `n_cells` equal cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Grid1DRepr", into = "Grid1DRepr")]
pub struct Grid1D {
    weights: Vec<f64>,
}

/// `n_cells` may be omitted on input.
#[derive(Serialize, Deserialize)]
struct Grid1DRepr {
    #[serde(default)]
    n_cells: Option<usize>,
    weights: Vec<f64>,
}

impl TryFrom<Grid1DRepr> for Grid1D {
    type Error = Error;
    fn try_from(r: Grid1DRepr) -> Result<Self> {
        if let Some(n) = r.n_cells.filter(|n| *n != r.weights.len()) {
            return Err(Error::InvalidMeasure(format!("n_cells = {n} but {} weights", r.weights.len())));
        }
        Grid1D::new(r.weights)
    }
}

impl From<Grid1D> for Grid1DRepr {
    fn from(g: Grid1D) -> Self {
        Grid1DRepr { n_cells: Some(g.weights.len()), weights: g.weights }
    }
}

impl Grid1D {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("no cells".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    /// Lebesgue measure on [0,1] at the given resolution.
    pub fn uniform(n_cells: usize) -> Self {
        Self { weights: vec![1.0 / n_cells as f64; n_cells] }
    }

    /// Normalizes non-negative masses to a probability vector.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidMeasure("masses sum to zero".into()));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn n_cells(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.weights.len() as f64
    }

    /// Density with respect to Lebesgue measure at `t`.
    pub fn density(&self, t: f64) -> f64 {
        let n = self.n_cells();
        self.weights[crate::geometry::cell_index(t, n)] * n as f64
    }

    /// Exact mass of `[lo, hi]`.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        let lo = lo.clamp(0.0, 1.0);
        let hi = hi.clamp(0.0, 1.0);
        if hi <= lo {
            return 0.0;
        }
        self.cdf_at(hi) - self.cdf_at(lo)
    }

    /// F(t) of the piecewise-uniform measure.
    pub fn cdf_at(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        let n = self.n_cells() as f64;
        let i = crate::geometry::cell_index(t, self.n_cells());
        let below: f64 = self.weights[..i].iter().sum();
        below + self.weights[i] * (t * n - i as f64)
    }

    pub fn set_mass(&self, set: &crate::geometry::IntervalSet) -> f64 {
        set.intervals.iter().map(|&(lo, hi)| self.interval_mass(lo, hi)).sum()
    }

    /// Continuous cdf with knots at the cell boundaries.
    pub fn cdf(&self) -> Cdf1D {
        let n = self.n_cells();
        let knots = (0..=n).map(|i| i as f64 / n as f64).collect();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w;
            values.push(acc);
        }
        Cdf1D::from_parts(knots, values, CdfKind::Linear).expect("grid cdf is monotone")
    }

    /// Step cdf of the discrete measure putting each cell's weight on its left endpoint.
    pub fn atom_cdf(&self) -> Cdf1D {
        let n = self.n_cells();
        let knots = (0..n).map(|i| i as f64 / n as f64).collect();
        let mut acc = 0.0;
        let values = self
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Cdf1D::from_parts(knots, values, CdfKind::Step).expect("grid cdf is monotone")
    }

    /// One draw from the piecewise-uniform measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let n = self.n_cells();
        let last = self.weights.iter().rposition(|w| *w > 0.0).unwrap_or(n - 1);
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc || i == last {
                let v: f64 = rng.random();
                return (i as f64 + v) / n as f64;
            }
        }
        unreachable!("weights sum to one")
    }

    /// `E_mu[s]` for a function that is constant on each of `values.len()` equal cells.
    pub fn integrate_step(&self, values: &[f64]) -> f64 {
        let m = values.len();
        values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.interval_mass(i as f64 / m as f64, (i + 1) as f64 / m as f64))
            .sum()
    }
}

/// Piecewise-uniform probability measure on [0,1]^2 with a `k_x` by `k_y` cell grid.
///
/// `mass[i][j]` is the mass of x-cell `i` times y-cell `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Grid2DRepr", into = "Grid2DRepr")]
pub struct Grid2D {
    k_x: usize,
    k_y: usize,
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Grid2DRepr {
    k_x: usize,
    k_y: usize,
    mass: Vec<Vec<f64>>,
}

impl TryFrom<Grid2DRepr> for Grid2D {
    type Error = Error;
    fn try_from(r: Grid2DRepr) -> Result<Self> {
        if r.mass.len() != r.k_x || r.mass.iter().any(|row| row.len() != r.k_y) {
            return Err(Error::InvalidMeasure(format!(
                "mass matrix shape does not match {}x{}",
                r.k_x, r.k_y
            )));
        }
        Grid2D::new(r.k_x, r.k_y, r.mass.into_iter().flatten().collect())
    }
}

impl From<Grid2D> for Grid2DRepr {
    fn from(g: Grid2D) -> Self {
        let mass = g.mass.chunks(g.k_y).map(|c| c.to_vec()).collect();
        Grid2DRepr { k_x: g.k_x, k_y: g.k_y, mass }
    }
}

impl Grid2D {
    /// Row-major masses, `mass[i * k_y + j]`.
    pub fn new(k_x: usize, k_y: usize, mass: Vec<f64>) -> Result<Self> {
        if k_x == 0 || k_y == 0 || mass.len() != k_x * k_y {
            return Err(Error::InvalidMeasure(format!(
                "{} masses for a {k_x}x{k_y} grid",
                mass.len()
            )));
        }
        if let Some(m) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidMeasure(format!("negative or non-finite mass {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {total}")));
        }
        Ok(Self { k_x, k_y, mass })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k_y = rows.first().map_or(0, |r| r.len());
        Self::try_from(Grid2DRepr { k_x: rows.len(), k_y, mass: rows.to_vec() })
    }

    pub fn product(mu: &Grid1D, nu: &Grid1D) -> Self {
        let mass = mu
            .weights()
            .iter()
            .flat_map(|a| nu.weights().iter().map(move |b| a * b))
            .collect();
        Self { k_x: mu.n_cells(), k_y: nu.n_cells(), mass }
    }

    /// Mass `1/n` on each diagonal cell.
    pub fn comonotone(n: usize) -> Self {
        let mut mass = vec![0.0; n * n];
        for i in 0..n {
            mass[i * n + i] = 1.0 / n as f64;
        }
        Self { k_x: n, k_y: n, mass }
    }

    /// Mass `1/n` on each anti-diagonal cell.
    pub fn countermonotone(n: usize) -> Self {
        let mut mass = vec![0.0; n * n];
        for i in 0..n {
            mass[i * n + (n - 1 - i)] = 1.0 / n as f64;
        }
        Self { k_x: n, k_y: n, mass }
    }

    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn k_y(&self) -> usize {
        self.k_y
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.k_y + j]
    }

    pub fn same_grid(&self, other: &Grid2D) -> bool {
        self.k_x == other.k_x && self.k_y == other.k_y
    }

    pub fn center(&self, idx: usize) -> (f64, f64) {
        let (i, j) = (idx / self.k_y, idx % self.k_y);
        ((i as f64 + 0.5) / self.k_x as f64, (j as f64 + 0.5) / self.k_y as f64)
    }

    /// Mass of a rectangle, exact for the piecewise-uniform measure.
    pub fn rect_mass(&self, rect: &crate::geometry::Rect) -> f64 {
        let overlap = |lo: f64, hi: f64, c: usize, k: usize| {
            let (a, b) = (c as f64 / k as f64, (c + 1) as f64 / k as f64);
            ((hi.min(b) - lo.max(a)).max(0.0)) * k as f64
        };
        let mut total = 0.0;
        for i in 0..self.k_x {
            let fx = overlap(rect.x0, rect.x1, i, self.k_x);
            if fx == 0.0 {
                continue;
            }
            for j in 0..self.k_y {
                let fy = overlap(rect.y0, rect.y1, j, self.k_y);
                total += self.at(i, j) * fx * fy;
            }
        }
        total
    }
}

/// Row-sum (first coordinate) and column-sum (second coordinate) measures.
pub fn marginals(p: &Grid2D) -> (Grid1D, Grid1D) {
    let mut rows = vec![0.0; p.k_x];
    let mut cols = vec![0.0; p.k_y];
    for i in 0..p.k_x {
        for j in 0..p.k_y {
            let m = p.at(i, j);
            rows[i] += m;
            cols[j] += m;
        }
    }
    (
        Grid1D::new(rows).expect("row sums of a valid Grid2D"),
        Grid1D::new(cols).expect("column sums of a valid Grid2D"),
    )
}
