//! `frechet`: seeded experiments on Fréchet-class priors.

mod config;
mod error;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use config::{DataSource, Experiment, ExperimentConfig, Format, Method, Source};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "frechet", version, about = "Priors on Fréchet classes: sampling, posteriors, checks")]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Where to write the JSON run report (config echo, checks, results, timings).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw random densities from a prior.
    SamplePrior {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long, default_value_t = 1)]
        draws: usize,
    },
    /// Draw one density and `n` exchangeable points from it.
    SampleData {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Posterior means, evidence and P([0,1/2]^2).
    Posterior {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        particles: usize,
    },
    /// Posterior predictive probability of a rectangle.
    Predictive {
        #[arg(long)]
        prior: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value_t = 10_000)]
        particles: usize,
        /// `x0,x1,y0,y1`.
        #[arg(long, value_delimiter = ',', required = true)]
        rect: Vec<f64>,
    },
    /// Distance between a coupling and its checkerboard approximations.
    ApproxCopula {
        #[arg(long, conflicts_with = "builtin")]
        input: Option<PathBuf>,
        /// comonotone, countermonotone or independent.
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        metric_scale: f64,
    },
    /// Bounded-Lipschitz distance between two grid measures.
    BlDistance {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        metric_scale: f64,
    },
    /// Rows (a, b, P_f, ab+4U1U2, residual) of the Brownian identity.
    BrownianCheck {
        #[arg(long, default_value = "half-tanh")]
        phi: String,
        #[arg(long, default_value_t = 10_000)]
        n_steps: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Priors with a fixed first marginal.
    GammaMu {
        #[command(subcommand)]
        command: GammaMuCommand,
    },
    /// Run an experiment from a JSON config; global flags override its fields.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum GammaMuCommand {
    /// P(X in A, Y in B | data) under the product prior.
    Predictive {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        nu: Option<PathBuf>,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        data: PathBuf,
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "B")]
        b: PathBuf,
    },
    /// Law of the composed distribution function at (x, y), prior and posterior.
    CdfLaw {
        /// A registered copula name or a JSON file.
        #[arg(long, default_value = "product")]
        copula: String,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        nu: Option<PathBuf>,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<f64>,
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

fn experiment(command: Command) -> CliResult<Experiment> {
    let file = Source::File;
    Ok(match command {
        Command::SamplePrior { prior, draws } => Experiment::SamplePrior { prior: file(prior), draws },
        Command::SampleData { prior, n } => Experiment::SampleData { prior: file(prior), n },
        Command::Posterior { prior, data, method, particles } => {
            Experiment::Posterior { prior: file(prior), data: DataSource::File(data), method, particles }
        }
        Command::Predictive { prior, data, method, particles, rect } => Experiment::Predictive {
            prior: file(prior),
            data: DataSource::File(data),
            method,
            particles,
            rect: rect.try_into().map_err(|_| CliError::Config("--rect takes x0,x1,y0,y1".into()))?,
        },
        Command::ApproxCopula { input, builtin, grid, k, metric_scale } => {
            Experiment::ApproxCopula { input: input.map(Source::File), builtin, grid, ks: k, metric_scale }
        }
        Command::BlDistance { p, q, metric_scale } => {
            Experiment::BlDistance { p: Source::File(p), q: Source::File(q), metric_scale }
        }
        Command::BrownianCheck { phi, n_steps, points } => Experiment::BrownianCheck { phi, n_steps, points },
        Command::GammaMu { command: GammaMuCommand::Predictive { c, nu, mu, data, a, b } } => {
            Experiment::GammaMuPredictive {
                c,
                nu: nu.map(Source::File),
                mu: mu.map(Source::File),
                data: DataSource::File(data),
                a: Source::File(a),
                b: Source::File(b),
            }
        }
        Command::GammaMu { command: GammaMuCommand::CdfLaw { copula, c, nu, mu, x, y, a, data } } => {
            Experiment::GammaMuCdfLaw {
                copula: Value::String(copula),
                c,
                nu: nu.map(Source::File),
                mu: mu.map(Source::File),
                x,
                y,
                a,
                data: data.map(DataSource::File),
            }
        }
        Command::Run { .. } => unreachable!("handled by the caller"),
    })
}

fn build_config(cli: Cli) -> CliResult<ExperimentConfig> {
    let mut config = match cli.command {
        Command::Run { config } => ExperimentConfig::load(&config)?,
        command => ExperimentConfig {
            seed: 0,
            format: Format::default(),
            experiment: experiment(command)?,
            out: None,
            report: None,
        },
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(format) = cli.format {
        config.format = format;
    }
    config.out = cli.out.or(config.out);
    config.report = cli.report.or(config.report);
    config.resolve()
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let config = build_config(cli)?;
    let (format, out, report_path) = (config.format, config.out.clone(), config.report.clone());
    let report = run::run(config)?;
    let bytes = output::render(&report.outcome(), format, &report.config_hash)?;
    output::write(&bytes, out.as_deref())?;
    if let Some(path) = report_path {
        let text = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
        std::fs::write(path, text + "\n")?;
    }
    eprintln!("elapsed {:.1} ms", report.elapsed_ms);
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed { failed: failed.len(), total: report.checks.len() })
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::ChecksFailed { .. }) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
