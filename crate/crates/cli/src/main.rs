//! `fracbayes`: sampling, bounds, divergences, risks and rate experiments
//! for sparse logistic regression under fractional posteriors.
//!
//! Every subcommand reads one JSON config and prints a JSON record on
//! stdout. Exit status: 0 on success, 2 on configuration or input errors,
//! 3 on numerical failures.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use fracbayes::bounds::{bounds_report, verify_lemmas_mc};
use fracbayes::harness::{emit_rate_report, run_experiment, ExperimentKind, ExperimentSpec};
use fracbayes::metrics::{design_stats_mc, joint_divergence_on_sample, posterior_averaged, truth_probs};
use fracbayes::model::{generate_dataset_with, generate_theta0, Coefficients, Dataset, Generator};
use fracbayes::persist::{read_dataset, read_samples, write_dataset, write_samples};
use fracbayes::posterior::{posterior_mean, FractionalTarget};
use fracbayes::risk::{
    excess_risk_on_sample, fit_gamma, margin_curve, misclassification_risk_on_sample, plug_in_classifier,
};
use fracbayes::rng::stream_seed;
use fracbayes::sampler::{run_chains, SamplerConfig};
use fracbayes::{Error, Result};

use config::{load, BoundsConfig, DataSource, DivergeConfig, Evaluated, LemmaConfig, RiskConfig, SampleConfig};

#[derive(Debug, Parser)]
#[command(name = "fracbayes", version, about = "Fractional-posterior sparse logistic regression")]
struct Cli {
    /// Overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for commands that write files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw from the fractional posterior; writes data and draws as CSV.
    Sample { config: PathBuf },
    /// Evaluate every rate and bound for one setting.
    Bounds { config: PathBuf },
    /// Divergences between a fitted law (or posterior) and the truth.
    Diverge { config: PathBuf },
    /// Misclassification and excess risk, optionally with a margin fit.
    Risk { config: PathBuf },
    /// Rate-curve experiment (concentration, estimation, risk, spike_slab).
    Rates { config: PathBuf },
    /// Misspecified-model experiment.
    Misspec { config: PathBuf },
    /// Monte Carlo check of the translated-prior lemmas.
    VerifyLemmas { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("JSON values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: &Cli) -> Result<Value> {
    match &cli.command {
        Command::Sample { config } => sample(cli, load(config)?),
        Command::Bounds { config } => bounds(cli, load(config)?),
        Command::Diverge { config } => diverge(cli, load(config)?),
        Command::Risk { config } => risk(cli, load(config)?),
        Command::Rates { config } => experiment(cli, load(config)?, false),
        Command::Misspec { config } => experiment(cli, load(config)?, true),
        Command::VerifyLemmas { config } => lemmas(cli, load(config)?),
    }
}

fn resolve_data(src: &DataSource, seed: u64, out: &Path) -> Result<(Dataset, Option<PathBuf>)> {
    match src {
        DataSource::File { path } => Ok((read_dataset(path)?, None)),
        DataSource::Generate { n, design, theta0, s_star, magnitude, link } => {
            let theta0 = match (theta0, s_star, magnitude) {
                (Some(t), _, _) => Coefficients::new(t.clone()),
                (None, Some(s), Some(m)) => generate_theta0(design.dim, *s, *m, stream_seed(seed, &[0]))?,
                _ => {
                    return Err(Error::InvalidConfig("generate needs theta0, or s_star and magnitude".into()));
                }
            };
            let generator = Generator { theta0, link: *link };
            let data = generate_dataset_with(&generator, *n, design, stream_seed(seed, &[1]))?;
            let path = out.join("data.csv");
            write_dataset(&data, &path)?;
            Ok((data, Some(path)))
        }
    }
}

fn sample(cli: &Cli, cfg: SampleConfig) -> Result<Value> {
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out = out_dir(cli);
    let (data, data_path) = resolve_data(&cfg.data, seed, &out)?;
    let prior = cfg.prior.resolve(data.n(), data.d())?;
    let target = FractionalTarget::new(cfg.alpha, &data, prior)?;
    let sampler = SamplerConfig { seed: stream_seed(seed, &[2]), ..cfg.sampler };
    let sets = run_chains(&target, &sampler, cfg.chains.max(1))?;
    let mut chains = Vec::new();
    for (k, set) in sets.iter().enumerate() {
        let path = out.join(format!("samples_{k}.csv"));
        write_samples(set, &path)?;
        chains.push(json!({
            "path": path,
            "n_draws": set.draws.len(),
            "acceptance_rate": set.acceptance_rate,
            "step_size": set.diagnostics.step_size,
            "posterior_mean": posterior_mean(set)?.values(),
        }));
    }
    Ok(json!({
        "data": data_path,
        "data_digest": data.digest(),
        "n": data.n(),
        "d": data.d(),
        "prior": target.prior(),
        "chains": chains,
    }))
}

fn bounds(cli: &Cli, cfg: BoundsConfig) -> Result<Value> {
    let k1 = match (cfg.k1, &cfg.design) {
        (Some(k), _) => k,
        (None, Some(design)) => design_stats_mc(design, cfg.n_mc, cli.seed.unwrap_or(cfg.seed))?.k1,
        (None, None) => return Err(Error::InvalidConfig("bounds needs k1 or a design".into())),
    };
    to_value(&bounds_report(cfg.n, cfg.d, cfg.s_star, cfg.c1, cfg.alpha, cfg.gamma, k1)?)
}

fn evaluated_draws(e: &Evaluated) -> Result<Vec<Vec<f64>>> {
    match e {
        Evaluated::Theta(t) => Ok(vec![t.clone()]),
        Evaluated::Samples(p) => Ok(read_samples(p)?.draws),
    }
}

fn diverge(cli: &Cli, cfg: DivergeConfig) -> Result<Value> {
    cfg.design.validate()?;
    let draws = evaluated_draws(&cfg.evaluate)?;
    let generator = Generator { theta0: Coefficients::new(cfg.theta0.clone()), link: cfg.link };
    let sample = cfg.design.sample(cfg.n_mc, cli.seed.unwrap_or(cfg.seed));
    let mut rows = Vec::new();
    for kind in &cfg.divergences {
        kind.validate()?;
        let est = if draws.len() == 1 {
            joint_divergence_on_sample(*kind, &Coefficients::new(draws[0].clone()), &generator, &sample)?
        } else {
            posterior_averaged(*kind, &draws, &truth_probs(&generator, &sample), &sample)?
        };
        rows.push(json!({ "divergence": kind, "estimate": est }));
    }
    Ok(json!({ "n_evaluated": draws.len(), "divergences": rows }))
}

fn risk(cli: &Cli, cfg: RiskConfig) -> Result<Value> {
    cfg.design.validate()?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let draws = evaluated_draws(&cfg.evaluate)?;
    let theta0 = Coefficients::new(cfg.theta0.clone());
    let generator = Generator::logistic(theta0.clone());
    let sample = cfg.design.sample(cfg.n_mc, stream_seed(seed, &[0]));
    let p = truth_probs(&generator, &sample);
    let (mut misclass, mut excess) = (0.0, 0.0);
    for theta in &draws {
        misclass += misclassification_risk_on_sample(|x| plug_in_classifier(theta, x), &p, &sample)?.value;
        excess += excess_risk_on_sample(theta, &p, &sample)?.value;
    }
    let k = draws.len() as f64;
    let bayes = misclassification_risk_on_sample(|x| plug_in_classifier(theta0.values(), x), &p, &sample)?;
    let margin = match &cfg.margin_grid {
        Some(grid) => {
            let curve = margin_curve(&theta0, &cfg.design, grid, cfg.n_mc, stream_seed(seed, &[1]))?;
            Some(fit_gamma(&curve)?)
        }
        None => None,
    };
    Ok(json!({
        "n_evaluated": draws.len(),
        "misclassification_risk": misclass / k,
        "excess_risk": excess / k,
        "bayes_risk": bayes,
        "margin": margin,
    }))
}

fn experiment(cli: &Cli, mut spec: ExperimentSpec, misspecified: bool) -> Result<Value> {
    if misspecified != (spec.kind == ExperimentKind::Misspecified) {
        let want = if misspecified { "misspecified" } else { "concentration, estimation, risk or spike_slab" };
        return Err(Error::InvalidConfig(format!("this command runs {want} experiments, got {:?}", spec.kind)));
    }
    if let Some(s) = cli.seed {
        spec.master_seed = s;
    }
    let result = run_experiment(&spec)?;
    let dir = cli.out.clone().or_else(|| spec.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    to_value(&emit_rate_report(&result, Some(&dir))?)
}

fn lemmas(cli: &Cli, cfg: LemmaConfig) -> Result<Value> {
    let theta0 = match cfg.theta0 {
        Some(t) => Coefficients::new(t),
        None => {
            Coefficients::new((0..cfg.d).map(|i| if i < cfg.s_star { 1.0 } else { 0.0 }).collect())
        }
    };
    to_value(&verify_lemmas_mc(cfg.n, cfg.d, cfg.s_star, cfg.c1, &theta0, cfg.n_mc, cli.seed.unwrap_or(cfg.seed))?)
}
