//! Dispatch of experiments to the library.

use std::sync::Arc;
use std::time::Instant;

use frechet::checkerboard_prior::{approximation_bound, project_coupling, CheckerboardPrior};
use frechet::gamma_mu::{
    composed_cdf_law, composed_cdf_posterior, product_prior_predictive, Copula, CopulaRegistry, GridCopula,
    PosteriorBaseMeasure,
};
use frechet::geometry::{Observation, Rect};
use frechet::measures::{bl_distance, Grid1D, Grid2D, DEFAULT_CELLS};
use frechet::posterior::{exact_checkerboard_posterior, is_posterior, sample_exchangeable, Predictive};
use frechet::rng::{named_seed, stream};
use frechet::tensor_prior::{brownian_density, PhiRegistry};
use frechet::{PriorFamily, PriorRegistry};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{DataSource, Experiment, ExperimentConfig, Method, Source};
use crate::error::{CliError, CliResult};
use crate::output::{Check, Outcome, Table};

/// Config echo, checks, results and timings of one run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub results: Table,
    pub details: Value,
    pub elapsed_ms: f64,
}

pub fn run(config: ExperimentConfig) -> CliResult<RunReport> {
    let start = Instant::now();
    let outcome = dispatch(&config)?;
    Ok(RunReport {
        version: frechet::VERSION,
        config_hash: config.hash(),
        config,
        checks: outcome.checks,
        results: outcome.table,
        details: outcome.details,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

impl RunReport {
    pub fn outcome(&self) -> Outcome {
        Outcome { table: self.results.clone(), details: self.details.clone(), checks: self.checks.clone() }
    }
}

fn num(x: f64) -> Value {
    json!(x)
}

fn build_prior(source: &Source<Value>) -> CliResult<Box<dyn PriorFamily>> {
    Ok(PriorRegistry::standard().build(source.get()?)?)
}

/// Data drawn from a prior on the `data` sub-stream of the master seed.
fn generate_data(prior: &dyn PriorFamily, n: usize, seed: u64) -> CliResult<(Value, Vec<Observation>)> {
    let (draw, data) = sample_exchangeable(prior, n, &mut stream(named_seed(seed, "data"), 0))?;
    Ok((draw.to_json(), data))
}

fn load_data(source: &DataSource, seed: u64) -> CliResult<Vec<Observation>> {
    match source {
        DataSource::Inline(obs) => Ok(obs.clone()),
        DataSource::Generate { generate } => {
            let prior = build_prior(&generate.prior)?;
            Ok(generate_data(prior.as_ref(), generate.n, seed)?.1)
        }
        DataSource::File(p) => Err(CliError::Config(format!("{} was not loaded", p.display()))),
    }
}

fn grid_or_uniform(source: &Option<Source<Grid1D>>) -> CliResult<Grid1D> {
    match source {
        Some(s) => Ok(s.get()?.clone()),
        None => Ok(Grid1D::uniform(DEFAULT_CELLS)),
    }
}

fn dispatch(config: &ExperimentConfig) -> CliResult<Outcome> {
    let seed = config.seed;
    match &config.experiment {
        Experiment::SamplePrior { prior, draws } => sample_prior(build_prior(prior)?.as_ref(), *draws, seed),
        Experiment::SampleData { prior, n } => {
            let prior = build_prior(prior)?;
            let (draw, data) = generate_data(prior.as_ref(), *n, seed)?;
            let mut table = Table::new(&["x", "y"]);
            for z in &data {
                table.push(vec![num(z.x), num(z.y)]);
            }
            Ok(Outcome { table, details: json!({ "draw": draw }), checks: Vec::new() })
        }
        Experiment::Posterior { prior, data, method, particles } => {
            let data = load_data(data, seed)?;
            posterior(prior, &data, *method, *particles, seed, None)
        }
        Experiment::Predictive { prior, data, method, particles, rect } => {
            let data = load_data(data, seed)?;
            let rect = Rect::new(rect[0], rect[1], rect[2], rect[3])?;
            posterior(prior, &data, *method, *particles, seed, Some(rect))
        }
        Experiment::ApproxCopula { input, builtin, grid, ks, metric_scale } => {
            let p = match (input, builtin.as_deref()) {
                (Some(_), Some(_)) => return Err(CliError::Config("give either `input` or `builtin`".into())),
                (Some(src), None) => src.get()?.clone(),
                (None, b) => builtin_coupling(b.unwrap_or("comonotone"), *grid)?,
            };
            approx_copula(&p, ks, *metric_scale)
        }
        Experiment::BlDistance { p, q, metric_scale } => {
            let d = bl_distance(p.get()?, q.get()?, *metric_scale)?;
            let mut table = Table::new(&["d_bl"]);
            table.push(vec![num(d)]);
            let checks = vec![Check::new("bl range", (0.0..=2.0 + 1e-12).contains(&d), format!("d = {d}"))];
            Ok(Outcome { table, details: Value::Null, checks })
        }
        Experiment::BrownianCheck { phi, n_steps, points } => brownian_check(phi, *n_steps, *points, seed),
        Experiment::GammaMuPredictive { c, nu, mu, data, a, b } => {
            let (nu, mu) = (grid_or_uniform(nu)?, grid_or_uniform(mu)?);
            let ys: Vec<f64> = load_data(data, seed)?.iter().map(|z| z.y).collect();
            let (a, b) = (a.get()?, b.get()?);
            let value = product_prior_predictive(*c, &nu, &mu, &ys, a, b)?;
            let base = PosteriorBaseMeasure::new(*c, nu.clone(), ys.clone())?;
            let mut table = Table::new(&["n", "mu_A", "nu_n_B", "c_plus_n", "predictive"]);
            table.push(vec![json!(ys.len()), num(mu.set_mass(a)), num(base.mass(b)), num(base.total_mass()), num(value)]);
            let checks = vec![Check::new("probability range", (0.0..=1.0).contains(&value), format!("{value}"))];
            Ok(Outcome { table, details: Value::Null, checks })
        }
        Experiment::GammaMuCdfLaw { copula, c, nu, mu, x, y, a, data } => {
            let copula = resolve_copula(copula)?;
            let (nu, mu) = (grid_or_uniform(nu)?, grid_or_uniform(mu)?);
            let ys: Vec<f64> = match data {
                Some(d) => load_data(d, seed)?.iter().map(|z| z.y).collect(),
                None => Vec::new(),
            };
            cdf_law(copula.as_ref(), &mu, *c, &nu, &ys, *x, *y, a)
        }
    }
}

fn sample_prior(prior: &dyn PriorFamily, draws: usize, seed: u64) -> CliResult<Outcome> {
    let base = named_seed(seed, "prior");
    let sampled: Vec<_> = (0..draws as u64)
        .into_par_iter()
        .map(|i| prior.sample(&mut stream(base, i)))
        .collect::<frechet::Result<_>>()?;
    let mut table = Table::new(&["draw", "index", "value"]);
    for (i, d) in sampled.iter().enumerate() {
        for (j, v) in d.parameters().iter().enumerate() {
            table.push(vec![json!(i), json!(j), num(*v)]);
        }
    }
    let details = json!({
        "prior": prior.describe(),
        "draws": sampled.iter().map(|d| d.to_json()).collect::<Vec<_>>(),
    });
    Ok(Outcome { table, details, checks: Vec::new() })
}

fn quarter() -> Rect {
    Rect { x0: 0.0, x1: 0.5, y0: 0.0, y1: 0.5 }
}

fn posterior(
    prior: &Source<Value>,
    data: &[Observation],
    method: Method,
    particles: usize,
    seed: u64,
    rect: Option<Rect>,
) -> CliResult<Outcome> {
    let mut checks = Vec::new();
    let mut table = Table::new(&["quantity", "mean", "se"]);
    let post: Box<dyn Predictive> = match method {
        Method::Exact => {
            let cb = CheckerboardPrior::parse(prior.get()?)?;
            let (k, perms, alpha) = cb.fixed_parts().ok_or_else(|| {
                CliError::Config("the exact method needs a checkerboard prior with fixed k and permutations".into())
            })?;
            let post = exact_checkerboard_posterior(k, &perms, &alpha, data)?;
            if rect.is_none() {
                for (i, u) in post.mean_u().iter().enumerate() {
                    table.push(vec![json!(format!("U[{i}]")), num(*u), num(0.0)]);
                }
                table.push(vec![json!("P([0,0.5]x[0,0.5])"), num(post.predictive(&quarter())), num(0.0)]);
                table.push(vec![json!("log_evidence"), num(post.log_evidence()), num(0.0)]);
                table.push(vec![json!("components"), json!(post.components().len()), num(0.0)]);
            }
            for a in [0.25, 0.5, 0.75] {
                let v = post.predictive(&Rect { x0: 0.0, x1: a, y0: 0.0, y1: 1.0 });
                checks.push(Check::new(format!("marginal at {a}"), (v - a).abs() <= 1e-12, format!("{v}")));
            }
            Box::new(post)
        }
        Method::Is => {
            let family = build_prior(prior)?;
            let post = is_posterior(family.as_ref(), data, particles, named_seed(seed, "particles"))?;
            if rect.is_none() {
                for (i, e) in post.mean_parameters().unwrap_or_default().iter().enumerate() {
                    table.push(vec![json!(format!("U[{i}]")), num(e.mean), num(e.se)]);
                }
                let q = post.mean_with_se(|f| f.rect_prob(&quarter()));
                table.push(vec![json!("P([0,0.5]x[0,0.5])"), num(q.mean), num(q.se)]);
                table.push(vec![json!("log_evidence"), num(post.log_evidence()), num(0.0)]);
                let ev = post.evidence();
                table.push(vec![json!("evidence"), num(ev.mean), num(ev.se)]);
                table.push(vec![json!("ess"), num(post.ess()), num(0.0)]);
            }
            let total = post.predictive(&Rect::unit());
            checks.push(Check::new("total mass", (total - 1.0).abs() <= 1e-9, format!("{total}")));
            checks.push(Check::new("ess", post.ess() >= 1.0, format!("{}", post.ess())));
            if let Some(r) = rect {
                let e = post.mean_with_se(|f| f.rect_prob(&r));
                table.push(vec![json!("predictive"), num(e.mean), num(e.se)]);
            }
            return Ok(Outcome { table, details: json!({ "method": "is", "summary": post.summary() }), checks });
        }
    };
    if let Some(r) = rect {
        table.push(vec![json!("predictive"), num(post.predictive(&r)), num(0.0)]);
    }
    Ok(Outcome { table, details: json!({ "method": "exact" }), checks })
}

fn builtin_coupling(name: &str, n: usize) -> CliResult<Grid2D> {
    match name {
        "comonotone" => Ok(Grid2D::comonotone(n)),
        "countermonotone" => Ok(Grid2D::countermonotone(n)),
        "independent" => Ok(Grid2D::product(&Grid1D::uniform(n), &Grid1D::uniform(n))),
        other => Err(CliError::Config(format!(
            "unknown builtin coupling `{other}`; known: comonotone, countermonotone, independent"
        ))),
    }
}

fn approx_copula(p: &Grid2D, ks: &[usize], scale: f64) -> CliResult<Outcome> {
    let rows: Vec<(usize, f64)> = ks
        .par_iter()
        .map(|&k| {
            let g = project_coupling(p, k)?;
            Ok((k, bl_distance(p, &g.to_grid(p.k_x())?, scale)?))
        })
        .collect::<frechet::Result<_>>()?;
    let mut table = Table::new(&["k", "d_bl", "bound"]);
    let mut checks = Vec::new();
    for &(k, d) in &rows {
        let bound = scale * approximation_bound(k);
        table.push(vec![json!(k), num(d), num(bound)]);
        checks.push(Check::new(format!("bound at k = {k}"), d <= bound + 1e-9, format!("{d} <= {bound}")));
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| r.0);
    let monotone = sorted.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-9);
    checks.push(Check::new("weakly decreasing in k", monotone, format!("{sorted:?}")));
    Ok(Outcome { table, details: Value::Null, checks })
}

fn brownian_check(phi: &str, n_steps: usize, points: usize, seed: u64) -> CliResult<Outcome> {
    let phi = PhiRegistry::standard().get(phi)?;
    let base = named_seed(seed, "brownian");
    let rows: Vec<[f64; 4]> = (0..points as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(base, i);
            let draw = brownian_density(phi.as_ref(), n_steps, &mut rng)?;
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let pf = draw.density.rectangle_prob(&Rect { x0: 0.0, x1: a, y0: 0.0, y1: b });
            Ok([a, b, pf, draw.occupation_identity(a, b)])
        })
        .collect::<frechet::Result<_>>()?;
    let tol = 10.0 / n_steps as f64;
    let mut table = Table::new(&["a", "b", "P_f", "ab+4U1U2", "residual"]);
    let mut worst = 0.0f64;
    for r in &rows {
        let resid = (r[2] - r[3]).abs();
        worst = worst.max(resid);
        table.push(vec![num(r[0]), num(r[1]), num(r[2]), num(r[3]), num(resid)]);
    }
    let checks = vec![Check::new("identity residual", worst <= tol, format!("max {worst:e} <= {tol:e}"))];
    Ok(Outcome { table, details: Value::Null, checks })
}

fn resolve_copula(spec: &Value) -> CliResult<Arc<dyn Copula>> {
    match spec {
        Value::String(name) => Ok(CopulaRegistry::standard().get(name)?),
        other => Ok(Arc::new(GridCopula::from_json(other)?)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cdf_law(
    copula: &dyn Copula,
    mu: &Grid1D,
    c: f64,
    nu: &Grid1D,
    ys: &[f64],
    x: f64,
    y: f64,
    levels: &[f64],
) -> CliResult<Outcome> {
    let mut table = Table::new(&["a", "law", "posterior"]);
    let mut pairs = Vec::new();
    for &a in levels {
        let law = composed_cdf_law(copula, mu, c, nu, x, y, a)?;
        let post = composed_cdf_posterior(copula, mu, c, nu, ys, x, y, a)?;
        table.push(vec![num(a), num(law), num(post)]);
        pairs.push((a, law, post));
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let monotone = pairs.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12 && w[1].2 >= w[0].2 - 1e-12);
    let checks = vec![Check::new("non-decreasing in a", monotone, String::new())];
    Ok(Outcome { table, details: json!({ "F_mu(x)": mu.cdf_at(x), "F_nu(y)": nu.cdf_at(y), "n": ys.len() }), checks })
}
