use std::collections::BTreeMap;

use rand::{Rng, RngCore};
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use super::Predictive;
use crate::checkerboard_prior::{dirichlet, CheckerboardMixture, Permutation};
use crate::error::{Error, Result};
use crate::geometry::{cell_index, Observation, Rect};
use crate::stats::{ln_multivariate_beta, log_sum_exp};

/// Cap on the number of merged count vectors.
pub const MAX_COMPONENTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletComponent {
    pub counts: Vec<usize>,
    pub alpha: Vec<f64>,
    pub weight: f64,
}

/// Mixture of `Dir(alpha + c)` laws over count vectors `c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletMixturePosterior {
    k: usize,
    perms: Vec<Permutation>,
    components: Vec<DirichletComponent>,
    log_evidence: f64,
}

/// Expands `prod_i (k sum_{j : Z_i in S_j} U_j)` over assignments, merging by counts.
pub fn exact_checkerboard_posterior(
    k: usize,
    perms: &[Permutation],
    alpha: &[f64],
    data: &[Observation],
) -> Result<DirichletMixturePosterior> {
    let m = perms.len();
    if m == 0 || alpha.len() != m {
        return Err(Error::InvalidParameter(format!("{m} permutations with {} parameters", alpha.len())));
    }
    if let Some(a) = alpha.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::InvalidParameter(format!("Dirichlet parameter {a} must be positive")));
    }
    CheckerboardMixture::new(k, perms.to_vec(), vec![1.0 / m as f64; m])?;

    // log of the number of assignments reaching each count vector
    let mut states: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    states.insert(vec![0; m], 0.0);
    for (i, z) in data.iter().enumerate() {
        let (j, h) = (cell_index(z.x, k), cell_index(z.y, k));
        let cover: Vec<usize> = (0..m).filter(|&s| perms[s].apply(j) == h).collect();
        if cover.is_empty() {
            return Err(Error::ZeroEvidence(format!(
                "observation {i} at ({}, {}) lies outside every permutation support",
                z.x, z.y
            )));
        }
        let mut next: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        for (c, ln_n) in &states {
            for &s in &cover {
                let mut c2 = c.clone();
                c2[s] += 1;
                next.entry(c2).or_default().push(*ln_n);
            }
        }
        if next.len() > MAX_COMPONENTS {
            return Err(Error::InvalidParameter(format!("posterior expansion exceeds {MAX_COMPONENTS} components")));
        }
        states = next.into_iter().map(|(c, v)| (c, log_sum_exp(&v))).collect();
    }

    let ln_b0 = ln_multivariate_beta(alpha);
    let mut log_w = Vec::with_capacity(states.len());
    let mut components = Vec::with_capacity(states.len());
    for (c, ln_n) in states {
        let a: Vec<f64> = alpha.iter().zip(&c).map(|(a, n)| a + *n as f64).collect();
        log_w.push(ln_n + ln_multivariate_beta(&a) - ln_b0);
        components.push(DirichletComponent { counts: c, alpha: a, weight: 0.0 });
    }
    let total = log_sum_exp(&log_w);
    for (comp, lw) in components.iter_mut().zip(&log_w) {
        comp.weight = (lw - total).exp();
    }
    Ok(DirichletMixturePosterior {
        k,
        perms: perms.to_vec(),
        components,
        log_evidence: data.len() as f64 * (k as f64).ln() + total,
    })
}

impl DirichletMixturePosterior {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn components(&self) -> &[DirichletComponent] {
        &self.components
    }

    /// `ln int prod_i f(Z_i) Pi(df)`.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    pub fn evidence(&self) -> f64 {
        self.log_evidence.exp()
    }

    /// `E[U | Z]`.
    pub fn mean_u(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.perms.len()];
        for comp in &self.components {
            let total: f64 = comp.alpha.iter().sum();
            for (m, a) in mean.iter_mut().zip(&comp.alpha) {
                *m += comp.weight * a / total;
            }
        }
        mean
    }

    /// The mixture whose weights are the posterior mean of `U`.
    pub fn mean_mixture(&self) -> CheckerboardMixture {
        let mut u = self.mean_u();
        let total: f64 = u.iter().sum();
        u.iter_mut().for_each(|x| *x /= total);
        CheckerboardMixture::new(self.k, self.perms.clone(), u).expect("posterior mean lies on the simplex")
    }

    /// `P(U_i > t | Z)` from the Beta marginals of each component.
    pub fn prob_u_exceeds(&self, i: usize, t: f64) -> Result<f64> {
        if i >= self.perms.len() {
            return Err(Error::InvalidParameter(format!("no weight {i}")));
        }
        let mut p = 0.0;
        for comp in &self.components {
            let a = comp.alpha[i];
            let rest: f64 = comp.alpha.iter().sum::<f64>() - a;
            p += comp.weight
                * if rest <= 0.0 {
                    // a single permutation: U_i = 1
                    if t < 1.0 { 1.0 } else { 0.0 }
                } else {
                    let beta = Beta::new(a, rest).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                    1.0 - beta.cdf(t)
                };
        }
        Ok(p)
    }

    /// Draws `U` from the posterior.
    pub fn sample_weights(&self, rng: &mut dyn RngCore) -> Result<Vec<f64>> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = self.components.len() - 1;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                pick = i;
                break;
            }
        }
        dirichlet(&self.components[pick].alpha, rng)
    }
}

impl Predictive for DirichletMixturePosterior {
    /// Linear in `U`, so the posterior mean of `U` gives the exact answer.
    fn predictive(&self, rect: &Rect) -> f64 {
        use num_traits::ToPrimitive;
        self.mean_mixture().rect_prob_exact(rect).to_f64().unwrap()
    }
}
