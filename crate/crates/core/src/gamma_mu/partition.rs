use rayon::prelude::*;

use super::stick_breaking::{DPStickBreaking, PosteriorBaseMeasure};
use crate::error::{Error, Result};
use crate::geometry::Observation;
use crate::measures::Grid1D;
use crate::rng::stream;

/// Smallest number of Monte Carlo draws accepted by the sampling routines.
pub const MIN_DRAWS: usize = 1000;

/// A partition `H_1..H_m` of the square made of grid cells: `labels[i][j]`
/// is the block of x-cell `i` times y-cell `j`. The section `H_l^x` for `x` in
/// x-cell `i` is the union of y-cells labelled `l` in row `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPartition {
    k_x: usize,
    k_y: usize,
    m: usize,
    labels: Vec<usize>,
}

impl SectionPartition {
    pub fn new(k_x: usize, k_y: usize, m: usize, labels: Vec<usize>) -> Result<Self> {
        if k_x == 0 || k_y == 0 || m == 0 || labels.len() != k_x * k_y {
            return Err(Error::InvalidParameter(format!(
                "{} labels for a {k_x}x{k_y} grid with {m} blocks",
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|l| **l >= m) {
            return Err(Error::InvalidParameter(format!("label {l} out of 0..{m}")));
        }
        Ok(Self { k_x, k_y, m, labels })
    }

    pub fn from_fn(k_x: usize, k_y: usize, m: usize, label: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let labels = (0..k_x).flat_map(|i| (0..k_y).map(move |j| (i, j))).map(|(i, j)| label(i, j)).collect();
        Self::new(k_x, k_y, m, labels)
    }

    /// `H_l = X x B_l` where `column_labels[j]` names the block of y-cell `j`.
    pub fn product(k_x: usize, column_labels: &[usize], m: usize) -> Result<Self> {
        Self::from_fn(k_x, column_labels.len(), m, |_, j| column_labels[j])
    }

    pub fn k_x(&self) -> usize {
        self.k_x
    }

    pub fn k_y(&self) -> usize {
        self.k_y
    }

    pub fn blocks(&self) -> usize {
        self.m
    }

    pub fn label(&self, i: usize, j: usize) -> usize {
        self.labels[i * self.k_y + j]
    }

    /// y-cells of each section `H_l^x`.
    pub fn section(&self, x: f64) -> Vec<Vec<usize>> {
        let i = crate::geometry::cell_index(x, self.k_x);
        let mut out = vec![Vec::new(); self.m];
        for j in 0..self.k_y {
            out[self.label(i, j)].push(j);
        }
        out
    }

    fn check_mu(&self, mu: &Grid1D) -> Result<()> {
        if mu.n_cells() != self.k_x {
            return Err(Error::GridMismatch {
                left: format!("mu with {} cells", mu.n_cells()),
                right: format!("partition with {} x-cells", self.k_x),
            });
        }
        Ok(())
    }

    /// `P(H_l) = sum_i mu_i Q(H_l^{x_i})` given the y-cell masses of `Q`.
    pub fn block_probs(&self, mu: &Grid1D, q_cells: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (i, mu_i) in mu.weights().iter().enumerate() {
            for (j, q) in q_cells.iter().enumerate() {
                out[self.label(i, j)] += mu_i * q;
            }
        }
        out
    }

    /// Normalized base masses of the y-cells, atoms binned as in [`DPStickBreaking::cell_masses`].
    fn base_cells(&self, base: &PosteriorBaseMeasure) -> Vec<f64> {
        let k = self.k_y;
        let mut out: Vec<f64> = (0..k)
            .map(|j| base.c() * base.nu().interval_mass(j as f64 / k as f64, (j + 1) as f64 / k as f64))
            .collect();
        for y in base.ys() {
            out[crate::geometry::cell_index(*y, k)] += 1.0;
        }
        let total = base.total_mass();
        out.iter_mut().for_each(|x| *x /= total);
        out
    }

    /// `E[P(H_l)] = sum_i mu_i nu_n(H_l^{x_i}) / (c + n)`.
    pub fn mean(&self, mu: &Grid1D, base: &PosteriorBaseMeasure) -> Result<Vec<f64>> {
        self.check_mu(mu)?;
        Ok(self.block_probs(mu, &self.base_cells(base)))
    }

    /// `E[P(H_l) P(H_r)]` from `E[Q(A)Q(B)] = (C p(A)p(B) + p(A ∩ B)) / (C + 1)`,
    /// `p = nu_n / C`, `C = c + n`. Rows of the result are `l`, columns `r`.
    pub fn second_moments(&self, mu: &Grid1D, base: &PosteriorBaseMeasure) -> Result<Vec<Vec<f64>>> {
        self.check_mu(mu)?;
        let p = self.base_cells(base);
        let c = base.total_mass();
        let mut out = vec![vec![0.0; self.m]; self.m];
        let w = mu.weights();
        for (i, wi) in w.iter().enumerate() {
            for (i2, wi2) in w.iter().enumerate() {
                let mut pa = vec![0.0; self.m];
                let mut pb = vec![0.0; self.m];
                let mut joint = vec![vec![0.0; self.m]; self.m];
                for j in 0..self.k_y {
                    let (l, r) = (self.label(i, j), self.label(i2, j));
                    pa[l] += p[j];
                    pb[r] += p[j];
                    joint[l][r] += p[j];
                }
                for l in 0..self.m {
                    for r in 0..self.m {
                        out[l][r] += wi * wi2 * (c * pa[l] * pb[r] + joint[l][r]) / (c + 1.0);
                    }
                }
            }
        }
        Ok(out)
    }
}

fn fdd_draws(
    base: &PosteriorBaseMeasure,
    mu: &Grid1D,
    partition: &SectionPartition,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    partition.check_mu(mu)?;
    if n_mc < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!("{n_mc} draws; at least {MIN_DRAWS} needed")));
    }
    Ok((0..n_mc as u64)
        .into_par_iter()
        .map(|i| {
            let q = DPStickBreaking::sample(base, &mut stream(seed, i));
            partition.block_probs(mu, &q.cell_masses(partition.k_y()))
        })
        .collect())
}

/// Draws of `(P(H_1), ..., P(H_m))` for `P = mu x Q`, `Q ~ DP(c nu)`.
pub fn product_prior_fdd(
    c: f64,
    nu: &Grid1D,
    mu: &Grid1D,
    partition: &SectionPartition,
    n_mc: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    fdd_draws(&PosteriorBaseMeasure::prior(c, nu.clone())?, mu, partition, n_mc, seed)
}

/// As [`product_prior_fdd`] with `Q ~ DP(nu_n)` given the data's `Y`s.
pub fn posterior_fdd(
    c: f64,
    nu: &Grid1D,
    mu: &Grid1D,
    partition: &SectionPartition,
    data: &[Observation],
    n_mc: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let base = PosteriorBaseMeasure::new(c, nu.clone(), data.iter().map(|z| z.y).collect())?;
    fdd_draws(&base, mu, partition, n_mc, seed)
}
