use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::mixture::CheckerboardMixture;
use super::perm::{all_permutations, random_distinct, Permutation, MAX_ENUMERATED_K};
use crate::error::{Error, Result};
use crate::family::{opt_field, PriorFamily, RandomDensity};

/// Resolution of the checkerboard, fixed or drawn before the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Resolution {
    Fixed { k: usize },
    /// `P(K = k) ∝ p (1-p)^(k-1)` on `1..=k_max`.
    TruncatedGeometric { p: f64, k_max: usize },
}

impl Resolution {
    fn validate(&self) -> Result<()> {
        match *self {
            Resolution::Fixed { k: 0 } => Err(Error::InvalidParameter("k must be positive".into())),
            Resolution::TruncatedGeometric { p, k_max } if !(p > 0.0 && p <= 1.0) || k_max == 0 => {
                Err(Error::InvalidParameter(format!("geometric law needs 0 < p <= 1 and k_max >= 1, got {p}, {k_max}")))
            }
            _ => Ok(()),
        }
    }

    pub fn probabilities(&self) -> Vec<(usize, f64)> {
        match *self {
            Resolution::Fixed { k } => vec![(k, 1.0)],
            Resolution::TruncatedGeometric { p, k_max } => {
                let raw: Vec<f64> = (0..k_max).map(|i| p * (1.0 - p).powi(i as i32)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().enumerate().map(|(i, w)| (i + 1, w / total)).collect()
            }
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> usize {
        match *self {
            Resolution::Fixed { k } => k,
            Resolution::TruncatedGeometric { .. } => {
                let probs = self.probabilities();
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(k, w) in &probs {
                    acc += w;
                    if u < acc {
                        return k;
                    }
                }
                probs.last().unwrap().0
            }
        }
    }
}

/// Which permutations enter the mixture at a given resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PermSource {
    Explicit { perms: Vec<Permutation> },
    /// All `k!` permutations (`k <= 6`).
    All,
    /// `count` distinct random permutations, capped at `k!`.
    RandomSubset { count: usize },
}

/// Dirichlet parameters of the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Symmetric(f64),
    Explicit(Vec<f64>),
}

impl AlphaSpec {
    pub fn resolve(&self, m: usize) -> Result<Vec<f64>> {
        let alpha = match self {
            AlphaSpec::Symmetric(a) => vec![*a; m],
            AlphaSpec::Explicit(v) if v.len() == m => v.clone(),
            AlphaSpec::Explicit(v) => {
                return Err(Error::InvalidParameter(format!("{} Dirichlet parameters for {m} permutations", v.len())))
            }
        };
        if let Some(a) = alpha.iter().find(|a| !(**a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParameter(format!("Dirichlet parameter {a} must be positive")));
        }
        Ok(alpha)
    }
}

/// Dirichlet draw by normalizing independent `Gamma(alpha_i, 1)` variables.
pub fn dirichlet(alpha: &[f64], rng: &mut dyn RngCore) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::InvalidParameter("empty Dirichlet parameter".into()));
    }
    if alpha.len() == 1 {
        return Ok(vec![1.0]);
    }
    let mut g = Vec::with_capacity(alpha.len());
    for &a in alpha {
        let dist = Gamma::new(a, 1.0).map_err(|e| Error::InvalidParameter(format!("alpha = {a}: {e}")))?;
        g.push(dist.sample(rng));
    }
    let total: f64 = g.iter().sum();
    if total > 0.0 {
        g.iter_mut().for_each(|x| *x /= total);
    } else {
        // every gamma underflowed (tiny alphas): the draw is a vertex
        let i = rng.random_range(0..alpha.len());
        g.iter_mut().enumerate().for_each(|(j, x)| *x = if i == j { 1.0 } else { 0.0 });
    }
    Ok(g)
}

/// Draws `K` (if random), the permutations at that resolution, then `U ~ Dir(alpha)`.
pub fn sample_mixture(
    perms: &PermSource,
    alpha: &AlphaSpec,
    resolution: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<CheckerboardMixture> {
    let k = resolution.sample(rng);
    let perms = match perms {
        PermSource::Explicit { perms } => perms.clone(),
        PermSource::All => all_permutations(k)?,
        PermSource::RandomSubset { count } => {
            let cap = (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i)).unwrap_or(usize::MAX);
            random_distinct(k, (*count).min(cap), rng)?
        }
    };
    let alpha = alpha.resolve(perms.len())?;
    let weights = dirichlet(&alpha, rng)?;
    CheckerboardMixture::new(k, perms, weights)
}

/// Dirichlet mixtures of permutation densities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckerboardPrior {
    resolution: Resolution,
    perms: PermSource,
    alpha: AlphaSpec,
}

impl CheckerboardPrior {
    pub fn new(resolution: Resolution, perms: PermSource, alpha: AlphaSpec) -> Result<Self> {
        resolution.validate()?;
        let ks: Vec<usize> = resolution.probabilities().into_iter().map(|(k, _)| k).collect();
        match &perms {
            PermSource::Explicit { perms: list } => {
                let Resolution::Fixed { k } = resolution else {
                    return Err(Error::Config("explicit permutations need a fixed resolution".into()));
                };
                // validates sizes, distinctness and alpha length
                CheckerboardMixture::new(k, list.clone(), vec![1.0 / list.len() as f64; list.len()])?;
                alpha.resolve(list.len())?;
            }
            PermSource::All => {
                if let Some(k) = ks.iter().find(|&&k| k > MAX_ENUMERATED_K) {
                    return Err(Error::Config(format!("all permutations requested at k = {k} > {MAX_ENUMERATED_K}")));
                }
                if matches!(alpha, AlphaSpec::Explicit(_)) && ks.len() > 1 {
                    return Err(Error::Config("explicit alphas need a fixed resolution".into()));
                }
                alpha.resolve(all_permutations(ks[0])?.len())?;
            }
            PermSource::RandomSubset { count } => {
                if *count == 0 {
                    return Err(Error::Config("a random subset needs at least one permutation".into()));
                }
                if matches!(alpha, AlphaSpec::Explicit(_)) {
                    return Err(Error::Config("random permutation subsets take a symmetric alpha".into()));
                }
                alpha.resolve(1)?;
            }
        }
        Ok(Self { resolution, perms, alpha })
    }

    /// Fixed `k`, explicit permutations and parameters.
    pub fn fixed(k: usize, perms: Vec<Permutation>, alpha: Vec<f64>) -> Result<Self> {
        Self::new(Resolution::Fixed { k }, PermSource::Explicit { perms }, AlphaSpec::Explicit(alpha))
    }

    pub fn resolution(&self) -> &Resolution {
        &self.resolution
    }

    pub fn perm_source(&self) -> &PermSource {
        &self.perms
    }

    pub fn alpha_spec(&self) -> &AlphaSpec {
        &self.alpha
    }

    /// The permutation list and Dirichlet parameters, when both are fixed.
    pub fn fixed_parts(&self) -> Option<(usize, Vec<Permutation>, Vec<f64>)> {
        let Resolution::Fixed { k } = self.resolution else { return None };
        let perms = match &self.perms {
            PermSource::Explicit { perms } => perms.clone(),
            PermSource::All => all_permutations(k).ok()?,
            PermSource::RandomSubset { .. } => return None,
        };
        let alpha = self.alpha.resolve(perms.len()).ok()?;
        Some((k, perms, alpha))
    }

    pub fn sample_mixture(&self, rng: &mut dyn RngCore) -> Result<CheckerboardMixture> {
        sample_mixture(&self.perms, &self.alpha, &self.resolution, rng)
    }

    /// Keys: `k` (default 2) or `k_law: {p, k_max}`; `perms` as a list of
    /// 0-based arrays, `"all"` (default) or `{"random": count}`; `alpha` as a
    /// number (default 1) or a list.
    pub fn parse(config: &Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct KLaw {
            p: f64,
            k_max: usize,
        }
        let resolution = match (opt_field::<usize>(config, "k")?, opt_field::<KLaw>(config, "k_law")?) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `k` or `k_law`".into())),
            (_, Some(l)) => Resolution::TruncatedGeometric { p: l.p, k_max: l.k_max },
            (k, None) => Resolution::Fixed { k: k.unwrap_or(2) },
        };
        let perms = match config.get("perms") {
            None | Some(Value::Null) => PermSource::All,
            Some(Value::String(s)) if s == "all" => PermSource::All,
            Some(Value::Array(_)) => PermSource::Explicit { perms: opt_field(config, "perms")?.unwrap() },
            Some(Value::Object(o)) if o.contains_key("random") => {
                let count = o["random"]
                    .as_u64()
                    .ok_or_else(|| Error::Config("`perms.random` must be a count".into()))?;
                PermSource::RandomSubset { count: count as usize }
            }
            Some(other) => return Err(Error::Config(format!("cannot read `perms` from {other}"))),
        };
        let alpha = opt_field::<AlphaSpec>(config, "alpha")?.unwrap_or(AlphaSpec::Symmetric(1.0));
        Self::new(resolution, perms, alpha)
    }

    pub fn from_config(config: &Value) -> Result<Box<dyn PriorFamily>> {
        Ok(Box::new(Self::parse(config)?))
    }
}

impl PriorFamily for CheckerboardPrior {
    fn name(&self) -> &'static str {
        "checkerboard"
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Result<Box<dyn RandomDensity>> {
        Ok(Box::new(self.sample_mixture(rng)?))
    }

    fn describe(&self) -> Value {
        json!({
            "family": "checkerboard",
            "resolution": self.resolution,
            "perms": self.perms,
            "alpha": self.alpha,
        })
    }
}
