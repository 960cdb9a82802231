use super::mixture::CheckerboardDensity;
use crate::error::{Error, Result};
use crate::measures::{marginals, Grid2D};

/// Largest deviation of a uniform-marginal check.
pub const MARGINAL_TOL: f64 = 1e-10;

/// `d_{j,h} = k^2 p(I_j x I_h)` for a coupling `p` of two uniform marginals.
pub fn project_coupling(p: &Grid2D, k: usize) -> Result<CheckerboardDensity> {
    let n = p.k_x();
    if p.k_y() != n {
        return Err(Error::GridMismatch { left: format!("{n} rows"), right: format!("{} columns", p.k_y()) });
    }
    if k == 0 || !n.is_multiple_of(k) {
        return Err(Error::InvalidParameter(format!("a {n}-cell grid cannot be coarsened to k = {k}")));
    }
    let (mx, my) = marginals(p);
    let target = 1.0 / n as f64;
    let worst = mx.weights().iter().chain(my.weights()).map(|w| (w - target).abs()).fold(0.0, f64::max);
    if worst > MARGINAL_TOL {
        return Err(Error::InvalidMeasure(format!("marginals are not uniform (deviation {worst:e})")));
    }
    let r = n / k;
    let k2 = (k * k) as f64;
    let mut d = vec![0.0; k * k];
    for i in 0..n {
        for j in 0..n {
            d[(i / r) * k + j / r] += p.at(i, j);
        }
    }
    d.iter_mut().for_each(|x| *x *= k2);
    CheckerboardDensity::new(k, d)
}

/// `2 sqrt(2) / k`.
pub fn approximation_bound(k: usize) -> f64 {
    2.0 * std::f64::consts::SQRT_2 / k as f64
}
