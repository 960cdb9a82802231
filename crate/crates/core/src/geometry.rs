use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One observation `Z = (X, Y)` in the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
}

impl Observation {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        for v in [x, y] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange { value: v, range: "[0,1]" });
            }
        }
        Ok(Self { x, y })
    }
}

/// Axis-aligned rectangle `[x0,x1] x [y0,y1]` inside the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = |lo: f64, hi: f64| (0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi) && lo <= hi;
        if !ok(x0, x1) || !ok(y0, y1) {
            return Err(Error::InvalidParameter(format!(
                "rectangle [{x0},{x1}]x[{y0},{y1}] is not inside the unit square"
            )));
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    /// `[0,a] x [0,b]`.
    pub fn lower_left(a: f64, b: f64) -> Result<Self> {
        Self::new(0.0, a, 0.0, b)
    }

    pub fn unit() -> Self {
        Self { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    pub fn contains(&self, z: &Observation) -> bool {
        z.x >= self.x0 && z.x <= self.x1 && z.y >= self.y0 && z.y <= self.y1
    }
}

/// Cell index of `t` among `k` equal cells of [0,1]: left-closed, right-open,
/// except that 1 belongs to the last cell.
pub fn cell_index(t: f64, k: usize) -> usize {
    ((t * k as f64).floor() as usize).min(k - 1)
}

/// A finite union of intervals of [0,1], each `[lo,hi)` (closed at 1 when `hi == 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub intervals: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &intervals {
            if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                return Err(Error::InvalidParameter(format!("interval [{lo},{hi}) not in [0,1]")));
            }
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in intervals.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::InvalidParameter("intervals overlap".into()));
            }
        }
        Ok(Self { intervals })
    }

    pub fn full() -> Self {
        Self { intervals: vec![(0.0, 1.0)] }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.intervals
            .iter()
            .any(|&(lo, hi)| t >= lo && (t < hi || (hi == 1.0 && t == 1.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_points_go_to_the_right_cell_except_the_last() {
        assert_eq!(cell_index(0.0, 4), 0);
        assert_eq!(cell_index(0.25, 4), 1);
        assert_eq!(cell_index(1.0, 4), 3);
    }

    #[test]
    fn rejects_points_outside_the_square() {
        assert!(Observation::new(1.2, 0.5).is_err());
        assert!(Rect::new(0.5, 0.4, 0.0, 1.0).is_err());
        assert!(IntervalSet::new(vec![(0.0, 0.5), (0.4, 0.6)]).is_err());
    }

    #[test]
    fn interval_membership() {
        let s = IntervalSet::new(vec![(0.5, 1.0), (0.0, 0.2)]).unwrap();
        assert!(s.contains(0.0) && s.contains(1.0) && s.contains(0.5));
        assert!(!s.contains(0.2) && !s.contains(0.3));
    }
}
