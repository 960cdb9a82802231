use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest resolution for which all `k!` permutations are enumerated.
pub const MAX_ENUMERATED_K: usize = 6;

/// A permutation of `0..k`; `sigma[j]` is the column paired with row `j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl Permutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let k = sigma.len();
        if k == 0 {
            return Err(Error::InvalidParameter("empty permutation".into()));
        }
        let mut seen = vec![false; k];
        for &s in &sigma {
            if s >= k || seen[s] {
                return Err(Error::InvalidParameter(format!("{sigma:?} is not a permutation of 0..{k}")));
            }
            seen[s] = true;
        }
        Ok(Self(sigma))
    }

    pub fn identity(k: usize) -> Self {
        Self((0..k).collect())
    }

    /// `j -> k - 1 - j`.
    pub fn reversal(k: usize) -> Self {
        Self((0..k).rev().collect())
    }

    pub fn random(k: usize, rng: &mut dyn RngCore) -> Self {
        let mut v: Vec<usize> = (0..k).collect();
        v.shuffle(rng);
        Self(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, j: usize) -> usize {
        self.0[j]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

/// All `k!` permutations in lexicographic order; `k <= 6`.
pub fn all_permutations(k: usize) -> Result<Vec<Permutation>> {
    if k == 0 || k > MAX_ENUMERATED_K {
        return Err(Error::InvalidParameter(format!(
            "enumerating permutations needs 1 <= k <= {MAX_ENUMERATED_K}, got {k}"
        )));
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(Permutation(cur.clone()));
        // next lexicographic permutation
        let Some(i) = (0..k - 1).rev().find(|&i| cur[i] < cur[i + 1]) else { break };
        let j = (i + 1..k).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    Ok(out)
}

/// `count` distinct uniformly random permutations of `0..k`.
pub fn random_distinct(k: usize, count: usize, rng: &mut dyn RngCore) -> Result<Vec<Permutation>> {
    let total = (1..=k).try_fold(1usize, |acc, i| acc.checked_mul(i));
    if total.is_some_and(|t| count > t) {
        return Err(Error::InvalidParameter(format!("{count} distinct permutations of {k} do not exist")));
    }
    let mut out: Vec<Permutation> = Vec::with_capacity(count);
    while out.len() < count {
        let p = Permutation::random(k, rng);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}
