use crate::error::{Error, Result};
use crate::measures::Grid1D;

/// A bounded function on [0,1] given on `n` equal cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Basis1D {
    /// Constant on each cell: `n` values.
    Step(Vec<f64>),
    /// Linear between the `n + 1` cell boundaries.
    Linear(Vec<f64>),
}

impl Basis1D {
    pub fn cells(&self) -> usize {
        match self {
            Basis1D::Step(v) => v.len(),
            Basis1D::Linear(v) => v.len() - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.cells();
        match self {
            Basis1D::Step(v) => v[crate::geometry::cell_index(t, n)],
            Basis1D::Linear(v) => {
                let s = (t.clamp(0.0, 1.0)) * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let w = s - i as f64;
                v[i] + (v[i + 1] - v[i]) * w
            }
        }
    }

    /// Exact supremum of `|g|` (attained at a cell value or a knot).
    pub fn sup_abs(&self) -> f64 {
        let v = match self {
            Basis1D::Step(v) | Basis1D::Linear(v) => v,
        };
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Running integral `t -> int_0^t g d(measure)` on the merged breakpoints
/// of the function and the measure; exact for piecewise-uniform measures.
#[derive(Debug, Clone)]
pub(crate) struct Cumulative {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl Cumulative {
    fn new(g: &Basis1D, measure: &Grid1D) -> Self {
        let (ng, nm) = (g.cells(), measure.n_cells());
        let mut points: Vec<f64> = (0..=ng)
            .map(|i| i as f64 / ng as f64)
            .chain((0..=nm).map(|i| i as f64 / nm as f64))
            .collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mut values = Vec::with_capacity(points.len());
        values.push(0.0);
        let mut acc = 0.0;
        for w in points.windows(2) {
            acc += piece(g, measure, w[0], w[1]);
            values.push(acc);
        }
        Self { points, values }
    }

    fn at(&self, g: &Basis1D, measure: &Grid1D, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let k = self.points.partition_point(|p| *p <= t) - 1;
        if self.points[k] == t {
            return self.values[k];
        }
        self.values[k] + piece(g, measure, self.points[k], t)
    }
}

/// `int_s^e g d(measure)` when both are smooth on `[s, e]`.
fn piece(g: &Basis1D, measure: &Grid1D, s: f64, e: f64) -> f64 {
    let mid = 0.5 * (s + e);
    let dens = measure.density(mid);
    let avg = match g {
        Basis1D::Step(_) => g.eval(mid),
        Basis1D::Linear(_) => 0.5 * (g.eval(s) + g.eval(e)),
    };
    dens * avg * (e - s)
}

/// A pair `(g, h)` with `sup|g|, sup|h| <= 1` and zero means under `mu`, `nu`.
#[derive(Debug, Clone)]
pub struct BasisPair {
    g: Basis1D,
    h: Basis1D,
    mu: Grid1D,
    nu: Grid1D,
    cum_g: Cumulative,
    cum_h: Cumulative,
}

pub const MEAN_TOL: f64 = 1e-8;

impl BasisPair {
    pub fn new(g: Basis1D, h: Basis1D, mu: &Grid1D, nu: &Grid1D) -> Result<Self> {
        for (name, f) in [("g", &g), ("h", &h)] {
            if f.sup_abs() > 1.0 + 1e-12 {
                return Err(Error::InvalidParameter(format!("sup|{name}| = {} > 1", f.sup_abs())));
            }
        }
        let cum_g = Cumulative::new(&g, mu);
        let cum_h = Cumulative::new(&h, nu);
        let pair = Self { g, h, mu: mu.clone(), nu: nu.clone(), cum_g, cum_h };
        let (mg, mh) = (pair.integral_g(0.0, 1.0), pair.integral_h(0.0, 1.0));
        if mg.abs() > MEAN_TOL || mh.abs() > MEAN_TOL {
            return Err(Error::InvalidParameter(format!("basis means {mg}, {mh} are not zero")));
        }
        Ok(pair)
    }

    pub fn g(&self) -> &Basis1D {
        &self.g
    }

    pub fn h(&self) -> &Basis1D {
        &self.h
    }

    /// `int_lo^hi g dmu`.
    pub fn integral_g(&self, lo: f64, hi: f64) -> f64 {
        self.cum_g.at(&self.g, &self.mu, hi) - self.cum_g.at(&self.g, &self.mu, lo)
    }

    /// `int_lo^hi h dnu`.
    pub fn integral_h(&self, lo: f64, hi: f64) -> f64 {
        self.cum_h.at(&self.h, &self.nu, hi) - self.cum_h.at(&self.h, &self.nu, lo)
    }
}

/// Haar functions on `levels` dyadic levels, centered under `measure` and
/// rescaled to sup-norm 1. Returns `2^levels - 1` functions, coarsest first.
pub fn haar_functions(levels: u32, measure: &Grid1D) -> Vec<Basis1D> {
    let cells = 1usize << levels;
    let mut out = Vec::with_capacity(cells - 1);
    for level in 0..levels {
        let pieces = 1usize << level;
        let width = cells / pieces;
        for j in 0..pieces {
            let mut v = vec![0.0; cells];
            for (c, x) in v.iter_mut().enumerate().skip(j * width).take(width) {
                *x = if c < j * width + width / 2 { 1.0 } else { -1.0 };
            }
            let mean = measure.integrate_step(&v);
            v.iter_mut().for_each(|x| *x -= mean);
            let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            v.iter_mut().for_each(|x| *x /= sup);
            out.push(Basis1D::Step(v));
        }
    }
    out
}

/// Haar pairs `(g_n, h_n)`; with `mu == nu` the pairs are symmetric.
pub fn haar_basis(levels: u32, mu: &Grid1D, nu: &Grid1D) -> Result<Vec<BasisPair>> {
    haar_functions(levels, mu)
        .into_iter()
        .zip(haar_functions(levels, nu))
        .map(|(g, h)| BasisPair::new(g, h, mu, nu))
        .collect()
}
