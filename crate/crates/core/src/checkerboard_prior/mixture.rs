use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::perm::Permutation;
use crate::error::{Error, Result};
use crate::family::RandomDensity;
use crate::geometry::{cell_index, Observation, Rect};
use crate::measures::Grid2D;

pub const SIMPLEX_TOL: f64 = 1e-12;
pub const DOUBLY_STOCHASTIC_TOL: f64 = 1e-10;

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite input")
}

fn qi(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `m(I_h ∩ [lo, hi])` for the `h`-th of `k` cells (0-based), exactly.
fn overlap(h: usize, k: &Q, lo: &Q, hi: &Q) -> Q {
    let left = qi(h) / k;
    let right = qi(h + 1) / k;
    let a = if *lo > left { lo.clone() } else { left };
    let b = if *hi < right { hi.clone() } else { right };
    if b > a {
        b - a
    } else {
        Q::zero()
    }
}

/// Uniform density `k 1_{S_sigma}` on `S_sigma = U_j I_j x I_sigma(j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermDensity {
    sigma: Permutation,
}

impl PermDensity {
    pub fn new(sigma: Permutation) -> Self {
        Self { sigma }
    }

    pub fn k(&self) -> usize {
        self.sigma.k()
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let k = self.k();
        if self.sigma.apply(cell_index(x, k)) == cell_index(y, k) {
            k as f64
        } else {
            0.0
        }
    }

    pub fn as_mixture(&self) -> CheckerboardMixture {
        CheckerboardMixture { k: self.k(), perms: vec![self.sigma.clone()], weights: vec![1.0] }
    }
}

/// `f = sum_i U_i f_{sigma_i}` over distinct permutations with weights on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixtureRepr", into = "MixtureRepr")]
pub struct CheckerboardMixture {
    k: usize,
    perms: Vec<Permutation>,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MixtureRepr {
    k: usize,
    perms: Vec<Permutation>,
    weights: Vec<f64>,
}

impl TryFrom<MixtureRepr> for CheckerboardMixture {
    type Error = Error;
    fn try_from(r: MixtureRepr) -> Result<Self> {
        CheckerboardMixture::new(r.k, r.perms, r.weights)
    }
}

impl From<CheckerboardMixture> for MixtureRepr {
    fn from(m: CheckerboardMixture) -> Self {
        MixtureRepr { k: m.k, perms: m.perms, weights: m.weights }
    }
}

impl CheckerboardMixture {
    pub fn new(k: usize, perms: Vec<Permutation>, weights: Vec<f64>) -> Result<Self> {
        if perms.is_empty() || perms.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} permutations with {} weights",
                perms.len(),
                weights.len()
            )));
        }
        if let Some(p) = perms.iter().find(|p| p.k() != k) {
            return Err(Error::InvalidParameter(format!("permutation {:?} is not of size {k}", p.as_slice())));
        }
        for (i, p) in perms.iter().enumerate() {
            if perms[..i].contains(p) {
                return Err(Error::InvalidParameter(format!("permutation {:?} repeated", p.as_slice())));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("mixture weights must be non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        Ok(Self { k, perms, weights })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights as rationals, renormalized so they sum to exactly one.
    pub fn exact_weights(&self) -> Vec<Q> {
        let w: Vec<Q> = self.weights.iter().map(|w| q(*w)).collect();
        let total = w.iter().fold(Q::zero(), |acc, x| acc + x);
        w.into_iter().map(|x| x / &total).collect()
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        let (j, h) = (cell_index(x, self.k), cell_index(y, self.k));
        let mass: f64 = self
            .perms
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| p.apply(j) == h)
            .map(|(_, w)| w)
            .sum();
        self.k as f64 * mass
    }

    /// `P_f([0,a] x [0,b])` by the row-by-row closed form: full rows `j < [ka]`
    /// plus the fractional row `[ka]`, each contributing `m(I_sigma(j) ∩ [0,b])`.
    pub fn lower_left_exact(&self, a: f64, b: f64) -> Q {
        self.lower_left_rational(&q(a.clamp(0.0, 1.0)), &q(b.clamp(0.0, 1.0)))
    }

    /// As [`Self::lower_left_exact`] for rational `a, b` in `[0,1]`.
    pub fn lower_left_rational(&self, a: &Q, b: &Q) -> Q {
        let k = qi(self.k);
        let ka = &k * a;
        let full = ka.floor();
        let frac = &ka - &full;
        let full = full.to_integer().to_usize().unwrap();
        let zero = Q::zero();
        let mut total = Q::zero();
        for (p, w) in self.perms.iter().zip(self.exact_weights()) {
            let mut row = Q::zero();
            for j in 0..full.min(self.k) {
                row += overlap(p.apply(j), &k, &zero, b);
            }
            if full < self.k && !frac.is_zero() {
                row += &frac * overlap(p.apply(full), &k, &zero, b);
            }
            total += w * row;
        }
        total
    }

    /// Exact `P_f(H)` for a rectangle, by inclusion-exclusion of the lower-left form.
    pub fn rect_prob_exact(&self, rect: &Rect) -> Q {
        self.lower_left_exact(rect.x1, rect.y1) - self.lower_left_exact(rect.x0, rect.y1)
            - self.lower_left_exact(rect.x1, rect.y0)
            + self.lower_left_exact(rect.x0, rect.y0)
    }

    pub fn rectangle_prob(&self, a: f64, b: f64) -> f64 {
        self.lower_left_exact(a, b).to_f64().unwrap()
    }

    /// `(1/k) sum_i U_i card{j < ka : sigma_i(j) < kb}` for integer `ka`, `kb`.
    pub fn lower_left_on_grid(&self, ka: usize, kb: usize) -> Q {
        let mut total = Q::zero();
        for (p, w) in self.perms.iter().zip(self.exact_weights()) {
            let card = (0..ka.min(self.k)).filter(|&j| p.apply(j) < kb).count();
            total += w * qi(card);
        }
        total / qi(self.k)
    }

    /// `D_{j,h} = sum_{i : sigma_i(j) = h} U_i`, exactly, row-major.
    pub fn exact_matrix(&self) -> Vec<Q> {
        let k = self.k;
        let mut d = vec![Q::zero(); k * k];
        for (p, w) in self.perms.iter().zip(self.exact_weights()) {
            for j in 0..k {
                d[j * k + p.apply(j)] += &w;
            }
        }
        d
    }

    /// `d = k D` as a checkerboard density.
    pub fn to_matrix(&self) -> CheckerboardDensity {
        let kq = qi(self.k);
        let d = self.exact_matrix().into_iter().map(|x| (x * &kq).to_f64().unwrap()).collect();
        CheckerboardDensity { k: self.k, d }
    }

    pub fn sample_point(&self, rng: &mut dyn RngCore) -> Observation {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let last = self.weights.iter().rposition(|w| *w > 0.0).unwrap();
        let mut pick = last;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                pick = i.min(last);
                break;
            }
        }
        let j = rng.random_range(0..self.k);
        let h = self.perms[pick].apply(j);
        let k = self.k as f64;
        Observation {
            x: (j as f64 + rng.random::<f64>()) / k,
            y: (h as f64 + rng.random::<f64>()) / k,
        }
    }
}

impl RandomDensity for CheckerboardMixture {
    fn family(&self) -> &'static str {
        "checkerboard"
    }

    fn density(&self, x: f64, y: f64) -> f64 {
        CheckerboardMixture::density(self, x, y)
    }

    fn rect_prob(&self, rect: &Rect) -> f64 {
        let k = self.k;
        let w = 1.0 / k as f64;
        let ov = |c: usize, lo: f64, hi: f64| (hi.min((c + 1) as f64 * w) - lo.max(c as f64 * w)).max(0.0);
        let total: f64 = self
            .perms
            .iter()
            .zip(&self.weights)
            .map(|(p, u)| u * (0..k).map(|j| ov(j, rect.x0, rect.x1) * ov(p.apply(j), rect.y0, rect.y1)).sum::<f64>())
            .sum();
        k as f64 * total
    }

    fn sample_points(&self, n: usize, rng: &mut dyn RngCore) -> Result<Vec<Observation>> {
        Ok((0..n).map(|_| self.sample_point(rng)).collect())
    }

    fn parameters(&self) -> Vec<f64> {
        self.weights.clone()
    }

    fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("mixture serializes");
        v["family"] = "checkerboard".into();
        v
    }
}

/// `g(x,y) = sum d_{j,h} 1_{I_j}(x) 1_{I_h}(y)` with every row and column of `d/k` summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckerboardDensity {
    k: usize,
    d: Vec<f64>,
}

impl CheckerboardDensity {
    pub fn new(k: usize, d: Vec<f64>) -> Result<Self> {
        if k == 0 || d.len() != k * k {
            return Err(Error::InvalidParameter(format!("{} entries for a {k}x{k} matrix", d.len())));
        }
        if d.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("checkerboard entries must be non-negative".into()));
        }
        let kf = k as f64;
        for j in 0..k {
            let row: f64 = d[j * k..(j + 1) * k].iter().sum::<f64>() / kf;
            let col: f64 = (0..k).map(|i| d[i * k + j]).sum::<f64>() / kf;
            if (row - 1.0).abs() > DOUBLY_STOCHASTIC_TOL || (col - 1.0).abs() > DOUBLY_STOCHASTIC_TOL {
                return Err(Error::InvalidParameter(format!(
                    "row/column {j} averages {row}, {col}; d/k must be doubly stochastic"
                )));
            }
        }
        Ok(Self { k, d })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    pub fn at(&self, j: usize, h: usize) -> f64 {
        self.d[j * self.k + h]
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.at(cell_index(x, self.k), cell_index(y, self.k))
    }

    pub fn rect_prob(&self, rect: &Rect) -> f64 {
        let k = self.k;
        let w = 1.0 / k as f64;
        let ov = |c: usize, lo: f64, hi: f64| {
            let (a, b) = (c as f64 * w, (c + 1) as f64 * w);
            (hi.min(b) - lo.max(a)).max(0.0)
        };
        let mut total = 0.0;
        for j in 0..k {
            let fx = ov(j, rect.x0, rect.x1);
            if fx == 0.0 {
                continue;
            }
            for h in 0..k {
                total += self.at(j, h) * fx * ov(h, rect.y0, rect.y1);
            }
        }
        total
    }

    /// Copula `C(u,v) = P_g([0,u] x [0,v])`.
    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        self.rect_prob(&Rect { x0: 0.0, x1: u.clamp(0.0, 1.0), y0: 0.0, y1: v.clamp(0.0, 1.0) })
    }

    /// The same measure on an `n x n` grid, `k | n`.
    pub fn to_grid(&self, n: usize) -> Result<Grid2D> {
        if n == 0 || !n.is_multiple_of(self.k) {
            return Err(Error::InvalidParameter(format!("grid {n} is not a multiple of k = {}", self.k)));
        }
        let r = n / self.k;
        let n2 = (n * n) as f64;
        let mut mass = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                mass[i * n + j] = self.at(i / r, j / r) / n2;
            }
        }
        // total is one up to rounding of the entries
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|m| *m /= total);
        Grid2D::new(n, n, mass)
    }
}

/// Exact `P_g(H)` of a checkerboard matrix given as rationals.
pub fn matrix_rect_prob_exact(k: usize, d: &[Q], rect: &Rect) -> Q {
    let kq = qi(k);
    let (x0, x1, y0, y1) = (q(rect.x0), q(rect.x1), q(rect.y0), q(rect.y1));
    let mut total = Q::zero();
    for j in 0..k {
        let fx = overlap(j, &kq, &x0, &x1);
        if fx.is_zero() {
            continue;
        }
        for h in 0..k {
            total += &d[j * k + h] * &fx * overlap(h, &kq, &y0, &y1);
        }
    }
    total
}

/// `k D` of a mixture as rationals.
pub fn exact_density_matrix(mix: &CheckerboardMixture) -> Vec<Q> {
    let kq = qi(mix.k());
    mix.exact_matrix().into_iter().map(|x| x * &kq).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkerboard_prior::all_permutations;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn resolution_one_is_the_product() {
        let m = PermDensity::new(Permutation::identity(1)).as_mixture();
        assert_eq!(m.rectangle_prob(0.3, 0.7), 0.3 * 0.7);
    }

    #[test]
    fn identity_at_k2_on_the_lower_quadrant() {
        let m = PermDensity::new(Permutation::identity(2)).as_mixture();
        assert_eq!(m.rectangle_prob(0.5, 0.5), 0.5);
    }

    #[test]
    fn single_permutation_matrix() {
        let m = PermDensity::new(perm(&[2, 0, 1])).as_mixture();
        let d = m.to_matrix();
        for j in 0..3 {
            for h in 0..3 {
                let expect = if h == [2, 0, 1][j] { 3.0 } else { 0.0 };
                assert_eq!(d.at(j, h), expect);
            }
        }
    }

    #[test]
    fn uniform_over_all_permutations_is_independence() {
        let ps = all_permutations(4).unwrap();
        let w = vec![1.0 / 24.0; 24];
        let d = CheckerboardMixture::new(4, ps, w).unwrap().to_matrix();
        assert!(d.entries().iter().all(|x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn identity_and_swap_halves() {
        let m = CheckerboardMixture::new(2, vec![perm(&[0, 1]), perm(&[1, 0])], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.to_matrix().entries(), &[1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn invalid_mixtures() {
        assert!(CheckerboardMixture::new(2, vec![perm(&[0, 1]), perm(&[0, 1])], vec![0.5, 0.5]).is_err());
        assert!(CheckerboardMixture::new(2, vec![perm(&[0, 1])], vec![0.9]).is_err());
        assert!(CheckerboardMixture::new(3, vec![perm(&[0, 1])], vec![1.0]).is_err());
        assert!(CheckerboardDensity::new(2, vec![2.0, 0.0, 2.0, 0.0]).is_err());
    }

    #[test]
    fn marginal_rectangles_are_exact() {
        let ps = all_permutations(3).unwrap();
        let w = vec![0.1, 0.2, 0.05, 0.15, 0.3, 0.2];
        let m = CheckerboardMixture::new(3, ps, w).unwrap();
        for t in [0.0, 0.17, 1.0 / 3.0, 0.5, 0.999, 1.0] {
            assert_eq!(m.lower_left_exact(t, 1.0), q(t));
            assert_eq!(m.lower_left_exact(1.0, t), q(t));
        }
    }

    #[test]
    fn json_uses_explicit_permutation_arrays() {
        let m = CheckerboardMixture::new(2, vec![perm(&[0, 1]), perm(&[1, 0])], vec![0.25, 0.75]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"k":2,"perms":[[0,1],[1,0]],"weights":[0.25,0.75]}"#);
        assert_eq!(serde_json::from_str::<CheckerboardMixture>(&s).unwrap(), m);
    }

    #[test]
    fn to_grid_keeps_block_masses() {
        let m = CheckerboardMixture::new(2, vec![perm(&[0, 1]), perm(&[1, 0])], vec![0.25, 0.75]).unwrap();
        let g = m.to_matrix().to_grid(8).unwrap();
        let r = Rect::new(0.0, 0.5, 0.5, 1.0).unwrap();
        assert!((g.rect_mass(&r) - 0.375).abs() < 1e-15);
        assert!(m.to_matrix().to_grid(5).is_err());
    }
}
