use rayon::prelude::*;
use serde_json::{json, Value};

use super::Predictive;
use crate::error::{Error, Result};
use crate::family::{PriorFamily, RandomDensity};
use crate::geometry::{Observation, Rect};
use crate::rng::stream;
use crate::stats::Estimate;

pub const MIN_PARTICLES: usize = 1000;

#[derive(Debug)]
pub struct Particle {
    pub draw: Box<dyn RandomDensity>,
    pub weight: f64,
}

/// Prior draws weighted by their likelihood, normalized to sum to one.
#[derive(Debug)]
pub struct WeightedPosterior {
    particles: Vec<Particle>,
    log_evidence: f64,
    evidence_se: f64,
    ess: f64,
}

/// Particle `i` uses stream `i` of `seed`, so the result does not depend on
/// the number of worker threads.
pub fn is_posterior(
    prior: &dyn PriorFamily,
    data: &[Observation],
    n_particles: usize,
    seed: u64,
) -> Result<WeightedPosterior> {
    if n_particles < MIN_PARTICLES {
        return Err(Error::InvalidParameter(format!("{n_particles} particles; at least {MIN_PARTICLES} needed")));
    }
    let raw: Vec<(Box<dyn RandomDensity>, f64)> = (0..n_particles as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let draw = prior.sample(&mut rng)?;
            let log_lik = data.iter().map(|z| draw.density(z.x, z.y).ln()).sum::<f64>();
            Ok((draw, log_lik))
        })
        .collect::<Result<_>>()?;

    let max = raw.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::ZeroEvidence(format!("all {n_particles} particles have zero likelihood")));
    }
    let scaled: Vec<f64> = raw.iter().map(|r| (r.1 - max).exp()).collect();
    let n = n_particles as f64;
    let sum: f64 = scaled.iter().sum();
    let mean = sum / n;
    let var = scaled.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let particles: Vec<Particle> =
        raw.into_iter().zip(&scaled).map(|((draw, _), w)| Particle { draw, weight: w / sum }).collect();
    let ess = 1.0 / particles.iter().map(|p| p.weight * p.weight).sum::<f64>();
    Ok(WeightedPosterior {
        particles,
        log_evidence: max + mean.ln(),
        evidence_se: max.exp() * (var / n).sqrt(),
        ess,
    })
}

impl WeightedPosterior {
    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn ess(&self) -> f64 {
        self.ess
    }

    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    /// Mean unnormalized weight.
    pub fn evidence(&self) -> Estimate {
        Estimate { mean: self.log_evidence.exp(), se: self.evidence_se }
    }

    /// Self-normalized estimate of `E[stat(f) | Z]` with its delta-method error.
    pub fn mean_with_se(&self, stat: impl Fn(&dyn RandomDensity) -> f64) -> Estimate {
        let values: Vec<f64> = self.particles.iter().map(|p| stat(p.draw.as_ref())).collect();
        let mean: f64 = self.particles.iter().zip(&values).map(|(p, v)| p.weight * v).sum();
        let var: f64 = self.particles.iter().zip(&values).map(|(p, v)| (p.weight * (v - mean)).powi(2)).sum();
        Estimate { mean, se: var.sqrt() }
    }

    /// Posterior means of each draw's parameters, when all draws have the same number.
    pub fn mean_parameters(&self) -> Option<Vec<Estimate>> {
        let m = self.particles.first()?.draw.parameters().len();
        if self.particles.iter().any(|p| p.draw.parameters().len() != m) {
            return None;
        }
        Some((0..m).map(|i| self.mean_with_se(|f| f.parameters()[i])).collect())
    }

    pub fn summary(&self) -> Value {
        json!({
            "n_particles": self.particles.len(),
            "ess": self.ess,
            "log_evidence": self.log_evidence,
            "evidence": self.evidence(),
            "mean_parameters": self.mean_parameters(),
        })
    }
}

impl Predictive for WeightedPosterior {
    fn predictive(&self, rect: &Rect) -> f64 {
        self.particles.iter().map(|p| p.weight * p.draw.rect_prob(rect)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkerboard_prior::{CheckerboardPrior, Permutation};
    use crate::tensor_prior::TensorPrior;
    use crate::measures::Grid1D;

    #[test]
    fn no_data_gives_uniform_weights() {
        let prior = TensorPrior::haar(2, Grid1D::uniform(8), Grid1D::uniform(8)).unwrap();
        let post = is_posterior(&prior, &[], 1000, 1).unwrap();
        assert!((post.ess() - 1000.0).abs() < 1e-9);
        assert!(post.log_evidence().abs() < 1e-12);
    }

    #[test]
    fn flat_prior_ignores_data() {
        let prior = TensorPrior::haar(0, Grid1D::uniform(4), Grid1D::uniform(4)).unwrap();
        let data = [Observation::new(0.1, 0.9).unwrap(), Observation::new(0.3, 0.3).unwrap()];
        let post = is_posterior(&prior, &data, 1000, 2).unwrap();
        assert!((post.ess() - 1000.0).abs() < 1e-9);
        let h = Rect::new(0.0, 0.5, 0.0, 0.5).unwrap();
        assert!((post.predictive(&h) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn zero_likelihood_everywhere_is_an_error() {
        let prior = CheckerboardPrior::fixed(2, vec![Permutation::identity(2)], vec![1.0]).unwrap();
        let data = [Observation::new(0.1, 0.9).unwrap()];
        assert!(matches!(is_posterior(&prior, &data, 1000, 0), Err(Error::ZeroEvidence(_))));
    }

    #[test]
    fn too_few_particles() {
        let prior = CheckerboardPrior::fixed(2, vec![Permutation::identity(2)], vec![1.0]).unwrap();
        assert!(is_posterior(&prior, &[], 10, 0).is_err());
    }
}
