use super::grid::Grid2D;
use super::transport;
use crate::error::{Error, Result};

/// Bounded-Lipschitz distance between two measures on the same grid, with
/// their masses placed at the cell centers.
///
/// The value is the optimum of the linear program
/// `max sum_i phi_i (p_i - q_i)` s.t. `|phi_i| <= 1`, `|phi_i - phi_j| <= s * |c_i - c_j|`.
/// For equal total masses the sup-norm bound only caps the metric at 2, so the
/// program is dual to optimal transport of `(p - q)^+` onto `(p - q)^-` under
/// the cost `min(s * |c_i - c_j|, 2)`; that dual is what gets solved.
pub fn bl_distance(p: &Grid2D, q: &Grid2D, metric_scale: f64) -> Result<f64> {
    if !p.same_grid(q) {
        return Err(Error::GridMismatch {
            left: format!("{}x{}", p.k_x(), p.k_y()),
            right: format!("{}x{}", q.k_x(), q.k_y()),
        });
    }
    if !(metric_scale > 0.0 && metric_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("metric scale {metric_scale}")));
    }
    let mut sources = Vec::new();
    let mut sinks = Vec::new();
    for (idx, (a, b)) in p.mass().iter().zip(q.mass()).enumerate() {
        let d = a - b;
        if d > 0.0 {
            sources.push((idx, d));
        } else if d < 0.0 {
            sinks.push((idx, -d));
        }
    }
    if sources.is_empty() || sinks.is_empty() {
        return Ok(0.0);
    }
    let mut cost = Vec::with_capacity(sources.len() * sinks.len());
    for &(i, _) in &sources {
        let (xi, yi) = p.center(i);
        for &(j, _) in &sinks {
            let (xj, yj) = p.center(j);
            cost.push((metric_scale * (xi - xj).hypot(yi - yj)).min(2.0));
        }
    }
    let supply: Vec<f64> = sources.iter().map(|s| s.1).collect();
    let demand: Vec<f64> = sinks.iter().map(|s| s.1).collect();
    let sol = transport::solve(&supply, &demand, &cost)?;
    Ok(sol.cost.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(k: usize, i: usize, j: usize) -> Grid2D {
        let mut mass = vec![0.0; k * k];
        mass[i * k + j] = 1.0;
        Grid2D::new(k, k, mass).unwrap()
    }

    #[test]
    fn identical_measures_are_at_distance_zero() {
        let p = Grid2D::comonotone(8);
        assert_eq!(bl_distance(&p, &p, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn point_masses_separate_by_their_distance() {
        let p = point(4, 0, 0);
        for t in 1..4 {
            let d = bl_distance(&p, &point(4, t, 0), 1.0).unwrap();
            assert!((d - t as f64 / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn large_scales_saturate_at_two() {
        let d = bl_distance(&point(4, 0, 0), &point(4, 3, 3), 100.0).unwrap();
        assert!((d - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let r = bl_distance(&Grid2D::comonotone(4), &Grid2D::comonotone(8), 1.0);
        assert!(matches!(r, Err(Error::GridMismatch { .. })));
    }
}
