//! Experiment configs: one JSON document per run.

use std::path::{Path, PathBuf};

use frechet::gamma_mu::CopulaRegistry;
use frechet::geometry::{IntervalSet, Observation};
use frechet::measures::{Grid1D, Grid2D};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Is,
}

/// A value given inline or as the path of a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    File(PathBuf),
    Inline(T),
}

impl<T: DeserializeOwned> Source<T> {
    fn resolve(self) -> CliResult<Self> {
        match self {
            Source::File(path) => Ok(Source::Inline(read_json(&path)?)),
            inline => Ok(inline),
        }
    }

    pub fn get(&self) -> CliResult<&T> {
        match self {
            Source::Inline(v) => Ok(v),
            Source::File(p) => Err(CliError::Config(format!("{} was not loaded", p.display()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub prior: Source<Value>,
    pub n: usize,
}

/// Observations from a CSV file (`x,y` header), inline, or drawn from a prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    File(PathBuf),
    Inline(Vec<Observation>),
    Generate { generate: GenerateSpec },
}

impl DataSource {
    fn resolve(self) -> CliResult<Self> {
        match self {
            DataSource::File(path) => Ok(DataSource::Inline(read_data_csv(&path)?)),
            DataSource::Inline(obs) => {
                for z in &obs {
                    Observation::new(z.x, z.y)?;
                }
                Ok(DataSource::Inline(obs))
            }
            DataSource::Generate { generate } => Ok(DataSource::Generate {
                generate: GenerateSpec { prior: generate.prior.resolve()?, n: generate.n },
            }),
        }
    }
}

fn default_draws() -> usize {
    1
}
fn default_particles() -> usize {
    10_000
}
fn default_scale() -> f64 {
    1.0
}
fn default_grid() -> usize {
    32
}
fn default_ks() -> Vec<usize> {
    vec![2, 4, 8, 16]
}
fn default_phi() -> String {
    "half-tanh".into()
}
fn default_steps() -> usize {
    10_000
}
fn default_points() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    SamplePrior {
        prior: Source<Value>,
        #[serde(default = "default_draws")]
        draws: usize,
    },
    SampleData {
        prior: Source<Value>,
        n: usize,
    },
    Posterior {
        prior: Source<Value>,
        data: DataSource,
        method: Method,
        #[serde(default = "default_particles")]
        particles: usize,
    },
    Predictive {
        prior: Source<Value>,
        data: DataSource,
        method: Method,
        #[serde(default = "default_particles")]
        particles: usize,
        /// `[x0, x1, y0, y1]`.
        rect: [f64; 4],
    },
    ApproxCopula {
        /// A coupling of uniform marginals; without it `builtin` on a `grid` grid.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        input: Option<Source<Grid2D>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        builtin: Option<String>,
        #[serde(default = "default_grid")]
        grid: usize,
        #[serde(default = "default_ks")]
        ks: Vec<usize>,
        #[serde(default = "default_scale")]
        metric_scale: f64,
    },
    BlDistance {
        p: Source<Grid2D>,
        q: Source<Grid2D>,
        #[serde(default = "default_scale")]
        metric_scale: f64,
    },
    BrownianCheck {
        #[serde(default = "default_phi")]
        phi: String,
        #[serde(default = "default_steps")]
        n_steps: usize,
        #[serde(default = "default_points")]
        points: usize,
    },
    GammaMuPredictive {
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<Source<Grid1D>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Source<Grid1D>>,
        data: DataSource,
        a: Source<IntervalSet>,
        b: Source<IntervalSet>,
    },
    GammaMuCdfLaw {
        /// A registered copula name, a JSON file, or an inline grid copula / mixture / coupling.
        copula: Value,
        c: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<Source<Grid1D>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Source<Grid1D>>,
        x: f64,
        y: f64,
        a: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        data: Option<DataSource>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    /// Replaces every file reference by its contents, so the config echo is self-contained.
    pub fn resolve(mut self) -> CliResult<Self> {
        let opt = |s: Option<Source<Grid1D>>| s.map(Source::resolve).transpose();
        self.experiment = match self.experiment {
            Experiment::SamplePrior { prior, draws } => Experiment::SamplePrior { prior: prior.resolve()?, draws },
            Experiment::SampleData { prior, n } => Experiment::SampleData { prior: prior.resolve()?, n },
            Experiment::Posterior { prior, data, method, particles } => {
                Experiment::Posterior { prior: prior.resolve()?, data: data.resolve()?, method, particles }
            }
            Experiment::Predictive { prior, data, method, particles, rect } => Experiment::Predictive {
                prior: prior.resolve()?,
                data: data.resolve()?,
                method,
                particles,
                rect,
            },
            Experiment::ApproxCopula { input, builtin, grid, ks, metric_scale } => Experiment::ApproxCopula {
                input: input.map(Source::resolve).transpose()?,
                builtin,
                grid,
                ks,
                metric_scale,
            },
            Experiment::BlDistance { p, q, metric_scale } => {
                Experiment::BlDistance { p: p.resolve()?, q: q.resolve()?, metric_scale }
            }
            e @ Experiment::BrownianCheck { .. } => e,
            Experiment::GammaMuPredictive { c, nu, mu, data, a, b } => Experiment::GammaMuPredictive {
                c,
                nu: opt(nu)?,
                mu: opt(mu)?,
                data: data.resolve()?,
                a: a.resolve()?,
                b: b.resolve()?,
            },
            Experiment::GammaMuCdfLaw { copula, c, nu, mu, x, y, a, data } => {
                let copula = match copula {
                    Value::String(name) if !CopulaRegistry::standard().names().contains(&name.as_str()) => {
                        read_json(Path::new(&name))?
                    }
                    other => other,
                };
                Experiment::GammaMuCdfLaw {
                    copula,
                    c,
                    nu: opt(nu)?,
                    mu: opt(mu)?,
                    x,
                    y,
                    a,
                    data: data.map(DataSource::resolve).transpose()?,
                }
            }
        };
        Ok(self)
    }

    /// SHA-256 of the canonical JSON of the config without output format and paths.
    pub fn hash(&self) -> String {
        let mut echo = self.clone();
        echo.format = Format::default();
        echo.out = None;
        echo.report = None;
        // serde_json maps keep keys sorted, so this text is canonical
        let text = serde_json::to_string(&serde_json::to_value(&echo).expect("config serializes")).unwrap();
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Reads `x,y` rows; the header is required and `#` lines are skipped.
pub fn read_data_csv(path: &Path) -> CliResult<Vec<Observation>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["x", "y"] {
        return Err(CliError::Config(format!("{}: header must be `x,y`", path.display())));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<(f64, f64)>() {
        let (x, y) = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        out.push(Observation::new(x, y)?);
    }
    Ok(out)
}
