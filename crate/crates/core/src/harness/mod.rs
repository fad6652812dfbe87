//! Experiment orchestration: rate curves of posterior-averaged divergences,
//! estimation errors and excess risk over a grid of sample sizes.
//!
//! Every `(grid point, replication)` task is independent and runs on the
//! rayon pool. Its random streams derive from the master seed:
//!
//! * truth `θ0` and the evaluation design sample from `(master, kind, rep)`,
//!   shared across the grid so that curves over `n` use common random
//!   numbers;
//! * data and chain from `(master, kind, grid, rep)`.
//!
//! Records are sorted by `(grid, rep)` before anything is written.

mod pseudo_true;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    concentration_bound, epsilon_n_spike_slab, epsilon_n_student, excess_risk_rate, expectation_bound,
    misspecified_r_n, Metric, RateBound, SUPPORT_TOL,
};
use crate::error::{Error, Result};
use crate::metrics::{
    design_stats_mc, divergence_from_probs, model_probs, truth_probs, weighted_param_error, Divergence, DesignStats,
};
use crate::model::{generate_dataset_with, generate_theta0, Coefficients, DesignDistribution, Generator, LabelModel};
use crate::posterior::{posterior_mean, FractionalTarget};
use crate::priors::{default_tau, spike_slab_defaults, PriorSpec, SpikeSlabConfig, StudentPriorConfig, DEFAULT_C1};
use crate::risk::{excess_risk_on_sample, fit_gamma, margin_curve, MarginParams};
use crate::rng::{rng_from_seed, stream_seed};
use crate::sampler::{run_chain, SamplerConfig};

pub use pseudo_true::{pseudo_true_parameter, PseudoTrue};
pub use report::{emit_rate_report, loglog_slope, summarize, GridSummary, ReportFiles, RunManifest};

/// Prior with hyperparameters that may default to their `n`, `d`
/// dependent values (`τ = 1/(n√d)`; `p = 1 − e^{−1/d}`,
/// `v0 = 1/(2n²d log d)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorTemplate {
    Student {
        #[serde(default)]
        tau: Option<f64>,
        #[serde(default = "default_c1")]
        c1: f64,
    },
    SpikeSlab {
        #[serde(default)]
        p: Option<f64>,
        #[serde(default)]
        v0: Option<f64>,
        #[serde(default = "default_v1")]
        v1: f64,
    },
}

fn default_c1() -> f64 {
    DEFAULT_C1
}

fn default_v1() -> f64 {
    1.0
}

impl PriorTemplate {
    pub fn resolve(&self, n: usize, d: usize) -> Result<PriorSpec> {
        let spec = match *self {
            PriorTemplate::Student { tau, c1 } => {
                PriorSpec::Student(StudentPriorConfig { tau: tau.unwrap_or_else(|| default_tau(n, d)), c1 })
            }
            PriorTemplate::SpikeSlab { p, v0, v1 } => {
                let def = spike_slab_defaults(n, d)?;
                PriorSpec::SpikeSlab(SpikeSlabConfig { p: p.unwrap_or(def.p), v0: v0.unwrap_or(def.v0), v1 })
            }
        };
        spec.validate(d)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Concentration,
    Estimation,
    Risk,
    Misspecified,
    SpikeSlab,
}

/// Monte Carlo sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McSizes {
    /// Fresh design draws for divergences and risks.
    pub eval_design: usize,
    /// Retained draws (evenly thinned) entering posterior averages of
    /// divergences and risks. Parameter errors use every retained draw.
    pub posterior_draws: usize,
    /// Design draws behind `K1` and `G`.
    pub design_stats: usize,
    /// Design draws behind the margin curve.
    pub margin: usize,
    /// Design draws behind the KL projection.
    pub kl_fit: usize,
}

impl Default for McSizes {
    fn default() -> Self {
        McSizes { eval_design: 2000, posterior_draws: 200, design_stats: 100_000, margin: 50_000, kl_fit: 20_000 }
    }
}

fn default_link() -> LabelModel {
    LabelModel::Logistic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    pub n_grid: Vec<usize>,
    pub d: usize,
    pub s_star: usize,
    pub alpha: f64,
    /// Size of each nonzero coordinate of `θ0`. Spike-and-slab experiments
    /// rescale `θ0` to unit ℓ2 norm instead.
    pub theta0_magnitude: f64,
    pub design: DesignDistribution,
    #[serde(default = "default_link")]
    pub link: LabelModel,
    pub prior: PriorTemplate,
    #[serde(default)]
    pub sampler: SamplerConfig,
    pub n_replications: usize,
    #[serde(default)]
    pub mc: McSizes,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(format!("experiment {:?}: {m}", self.name)));
        if self.n_grid.is_empty() {
            return bad("empty n grid".into());
        }
        if self.n_replications == 0 {
            return bad("need at least one replication".into());
        }
        if self.design.dim != self.d {
            return bad(format!("design dimension {} differs from d = {}", self.design.dim, self.d));
        }
        self.design.validate()?;
        if self.s_star < 1 || self.s_star > self.d {
            return bad(format!("need 1 ≤ s* ≤ d, got s* = {}", self.s_star));
        }
        if let Some(n) = self.n_grid.iter().find(|n| **n <= self.s_star) {
            return bad(format!("grid point n = {n} does not exceed s* = {}", self.s_star));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("α must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.theta0_magnitude >= 0.0 && self.theta0_magnitude.is_finite()) {
            return bad("θ0 magnitude must be finite and ≥ 0".into());
        }
        if self.mc.eval_design == 0 || self.mc.posterior_draws == 0 || self.mc.design_stats == 0 {
            return bad("Monte Carlo sizes must be positive".into());
        }
        match (self.kind, &self.prior) {
            (ExperimentKind::SpikeSlab, PriorTemplate::Student { .. }) => {
                return bad("spike-and-slab experiment needs a spike_slab prior".into())
            }
            (ExperimentKind::Misspecified, _) if self.mc.kl_fit == 0 => return bad("kl_fit must be positive".into()),
            (ExperimentKind::Risk, _) if self.mc.margin == 0 => return bad("margin must be positive".into()),
            _ => {}
        }
        for n in &self.n_grid {
            self.prior.resolve(*n, self.d)?;
        }
        self.sampler.validate()
    }
}

/// One `(grid point, replication)` outcome. All divergences compare the
/// model law `P_θ` to the data-generating law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub grid_index: usize,
    pub replication: usize,
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    pub alpha: f64,
    pub master_seed: u64,
    pub truth_seed: u64,
    pub data_seed: u64,
    pub chain_seed: u64,
    pub eval_seed: u64,
    pub acceptance_rate: f64,
    pub step_size: f64,
    /// Posterior averages.
    pub renyi: f64,
    pub hellinger2: f64,
    pub tv2: f64,
    pub kl: f64,
    pub weighted_error: f64,
    pub l2_error: f64,
    pub excess_risk: f64,
    /// Errors of the posterior mean.
    pub mean_weighted_error: f64,
    pub mean_l2_error: f64,
    /// Bounds from the same inputs.
    pub epsilon_n: f64,
    pub bound_hellinger2: f64,
    pub bound_expectation: f64,
    pub estimation_scale: f64,
    pub risk_rate_sqrt: f64,
    pub gamma: Option<f64>,
    pub risk_rate_gamma: Option<f64>,
    pub kl_star: Option<f64>,
    pub theta_star_support: Option<usize>,
    pub r_n: Option<f64>,
    pub oracle_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub design_stats: DesignSummary,
    pub records: Vec<RunRecord>,
    /// Wall-clock seconds per record, aligned with `records`.
    pub elapsed: Vec<f64>,
}

/// Scalar design statistics used by the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub k1: f64,
    pub k2: f64,
    pub lambda_min: f64,
}

// stream tags
const TRUTH: u64 = 1;
const DATA: u64 = 2;
const CHAIN: u64 = 3;
const EVAL: u64 = 4;
const STATS: u64 = 5;
const MARGIN: u64 = 6;
const KL_FIT: u64 = 7;

/// Grid for the margin curve.
fn margin_grid() -> Vec<f64> {
    (1..=45).map(|k| k as f64 / 100.0).collect()
}

/// Truth of replication `rep`.
pub fn replication_truth(spec: &ExperimentSpec, rep: usize) -> Result<(Coefficients, u64)> {
    let seed = stream_seed(spec.master_seed, &[TRUTH, rep as u64]);
    let theta0 = generate_theta0(spec.d, spec.s_star, spec.theta0_magnitude.max(1e-300), seed)?;
    let theta0 = if spec.theta0_magnitude == 0.0 {
        Coefficients::zeros(spec.d)
    } else if spec.kind == ExperimentKind::SpikeSlab {
        let norm = theta0.l2_norm();
        theta0.scaled(1.0 / norm)
    } else {
        theta0
    };
    Ok((theta0, seed))
}

fn rate(spec: &ExperimentSpec, prior: &PriorSpec, n: usize, k1: f64) -> Result<RateBound> {
    match prior {
        PriorSpec::Student(c) => epsilon_n_student(n, spec.d, spec.s_star, c.c1, k1),
        PriorSpec::SpikeSlab(_) => epsilon_n_spike_slab(n, spec.d, spec.s_star, k1),
    }
}

/// Evenly spaced subset of at most `k` draws.
fn thin(draws: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    if draws.len() <= k {
        return draws.to_vec();
    }
    (0..k).map(|i| draws[i * draws.len() / k].clone()).collect()
}

fn run_task(spec: &ExperimentSpec, stats: &DesignStats, g: usize, rep: usize) -> Result<(RunRecord, f64)> {
    let start = Instant::now();
    let n = spec.n_grid[g];
    let ctx = |e: Error| e.context(format!("{}: grid point n = {n}, replication {rep}", spec.name));
    let (theta0, truth_seed) = replication_truth(spec, rep).map_err(ctx)?;
    let generator = Generator { theta0: theta0.clone(), link: spec.link };
    let data_seed = stream_seed(spec.master_seed, &[DATA, g as u64, rep as u64]);
    let chain_seed = stream_seed(spec.master_seed, &[CHAIN, g as u64, rep as u64]);
    let eval_seed = stream_seed(spec.master_seed, &[EVAL, rep as u64]);

    let data = generate_dataset_with(&generator, n, &spec.design, data_seed).map_err(ctx)?;
    let prior = spec.prior.resolve(n, spec.d).map_err(ctx)?;
    let target = FractionalTarget::new(spec.alpha, &data, prior).map_err(ctx)?;
    let cfg = SamplerConfig { seed: chain_seed, ..spec.sampler.clone() };
    let set = run_chain(&target, &cfg).map_err(ctx)?;

    let sample = spec.design.sample(spec.mc.eval_design, eval_seed);
    let p_true = truth_probs(&generator, &sample);
    let sub = thin(&set.draws, spec.mc.posterior_draws);
    let (mut renyi, mut h2, mut tv2, mut kl, mut excess) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for theta in &sub {
        let pm = model_probs(theta, &sample);
        renyi += divergence_from_probs(Divergence::Renyi(spec.alpha), &pm, &p_true).map_err(ctx)?.value;
        h2 += divergence_from_probs(Divergence::Hellinger2, &pm, &p_true).map_err(ctx)?.value;
        tv2 += divergence_from_probs(Divergence::Tv, &pm, &p_true).map_err(ctx)?.value.powi(2);
        kl += divergence_from_probs(Divergence::Kl, &pm, &p_true).map_err(ctx)?.value;
        excess += excess_risk_on_sample(theta, &p_true, &sample).map_err(ctx)?.value;
    }
    let k = sub.len() as f64;

    let (mut l2, mut weighted) = (0.0, 0.0);
    for theta in &set.draws {
        let c = Coefficients::new(theta.clone());
        l2 += c.sq_dist(&theta0)?;
        weighted += weighted_param_error(&c, &theta0, &stats.g)?;
    }
    let kd = set.draws.len() as f64;
    let mean = posterior_mean(&set).map_err(ctx)?;

    let eps = rate(spec, &prior, n, stats.k1).map_err(ctx)?.epsilon_n;
    let (gamma, risk_rate_gamma) = if spec.kind == ExperimentKind::Risk {
        let curve = margin_curve(
            &theta0,
            &spec.design,
            &margin_grid(),
            spec.mc.margin,
            stream_seed(spec.master_seed, &[MARGIN, rep as u64]),
        )
        .map_err(ctx)?;
        let MarginParams { gamma, .. } = fit_gamma(&curve).map_err(ctx)?;
        (Some(gamma), Some(excess_risk_rate(eps, gamma).map_err(ctx)?))
    } else {
        (None, None)
    };

    let (mut kl_star, mut support, mut r_n, mut oracle) = (None, None, None, None);
    if spec.kind == ExperimentKind::Misspecified {
        let star = pseudo_truth(spec, &generator, rep).map_err(ctx)?;
        let kls = divergence_from_probs(Divergence::Kl, &model_probs(star.theta.values(), &sample), &p_true)
            .map_err(ctx)?
            .value;
        let c1 = match prior {
            PriorSpec::Student(c) => c.c1,
            PriorSpec::SpikeSlab(_) => DEFAULT_C1,
        };
        let trimmed = trim_support(&star.theta);
        let rn = misspecified_r_n(n, spec.d, c1, &trimmed, stats.k1).map_err(ctx)?;
        let a = spec.alpha;
        kl_star = Some(kls);
        support = Some(trimmed.values().iter().filter(|v| v.abs() > SUPPORT_TOL).count());
        r_n = Some(rn);
        oracle = Some(a / (1.0 - a) * kls + (1.0 + a) / (1.0 - a) * rn);
    }

    let record = RunRecord {
        grid_index: g,
        replication: rep,
        n,
        d: spec.d,
        s_star: spec.s_star,
        alpha: spec.alpha,
        master_seed: spec.master_seed,
        truth_seed,
        data_seed,
        chain_seed,
        eval_seed,
        acceptance_rate: set.acceptance_rate,
        step_size: set.diagnostics.step_size,
        renyi: renyi / k,
        hellinger2: h2 / k,
        tv2: tv2 / k,
        kl: kl / k,
        weighted_error: weighted / kd,
        l2_error: l2 / kd,
        excess_risk: excess / k,
        mean_weighted_error: weighted_param_error(&mean, &theta0, &stats.g)?,
        mean_l2_error: mean.sq_dist(&theta0)?,
        epsilon_n: eps,
        bound_hellinger2: concentration_bound(spec.alpha, eps, Metric::Hellinger2)?,
        bound_expectation: expectation_bound(spec.alpha, eps)?,
        estimation_scale: eps / stats.lambda_min,
        risk_rate_sqrt: excess_risk_rate(eps, 0.0)?,
        gamma,
        risk_rate_gamma,
        kl_star,
        theta_star_support: support,
        r_n,
        oracle_bound: oracle,
    };
    Ok((record, start.elapsed().as_secs_f64()))
}

/// Relative threshold below which coordinates of a numerically computed
/// `θ*` are treated as Monte Carlo noise when counting its support.
pub const THETA_STAR_REL_TOL: f64 = 1e-2;

/// `θ*` with coordinates below `THETA_STAR_REL_TOL · max|θ*_i|` set to 0.
pub fn trim_support(theta: &Coefficients) -> Coefficients {
    let max = theta.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Coefficients::new(theta.values().iter().map(|v| if v.abs() < THETA_STAR_REL_TOL * max { 0.0 } else { *v }).collect())
}

/// KL projection of the replication's generator onto the logistic family.
pub fn pseudo_truth(spec: &ExperimentSpec, generator: &Generator, rep: usize) -> Result<PseudoTrue> {
    let seed = stream_seed(spec.master_seed, &[KL_FIT, rep as u64]);
    let sample = spec.design.sample(spec.mc.kl_fit, seed);
    let mut rng = rng_from_seed(stream_seed(seed, &[0]));
    let starts: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..spec.d).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect())
        .collect();
    pseudo_true_parameter(generator, &sample, &starts, 1e-10, 200)
}

fn design_summary(spec: &ExperimentSpec) -> Result<DesignStats> {
    let stats =
        design_stats_mc(&spec.design, spec.mc.design_stats, stream_seed(spec.master_seed, &[STATS]))?;
    if spec.kind == ExperimentKind::Estimation && stats.lambda_min < 1e-10 {
        return Err(Error::Numerical(format!("λ_min(G) = {:e} below 1e-10", stats.lambda_min)));
    }
    Ok(stats)
}

/// Run every `(grid point, replication)` task of `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let stats = design_summary(spec)?;
    let tasks: Vec<(usize, usize)> =
        (0..spec.n_grid.len()).flat_map(|g| (0..spec.n_replications).map(move |r| (g, r))).collect();
    let mut out: Vec<(RunRecord, f64)> =
        tasks.par_iter().map(|&(g, r)| run_task(spec, &stats, g, r)).collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|(rec, _)| (rec.grid_index, rec.replication));
    let (records, elapsed) = out.into_iter().unzip();
    Ok(ExperimentResult {
        spec: spec.clone(),
        design_stats: DesignSummary { k1: stats.k1, k2: stats.k2, lambda_min: stats.lambda_min },
        records,
        elapsed,
    })
}

fn expect_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::InvalidConfig(format!("expected a {kind:?} experiment, got {:?}", spec.kind)));
    }
    Ok(())
}

/// Posterior-averaged divergences against `H_α·ε_n` and the expectation bound.
pub fn run_concentration_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    expect_kind(spec, ExperimentKind::Concentration)?;
    run_experiment(spec)
}

/// Adds G-weighted and ℓ2 errors against `ε_n/λ_min(G)`.
pub fn run_estimation_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    expect_kind(spec, ExperimentKind::Estimation)?;
    run_experiment(spec)
}

/// Plug-in excess risk against `√ε_n` and `ε_n^{(γ+1)/(γ+2)}` with fitted `γ`.
pub fn run_risk_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    expect_kind(spec, ExperimentKind::Risk)?;
    run_experiment(spec)
}

/// Rényi divergence to the true law against the oracle bound through `θ*`.
pub fn run_misspecified_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    expect_kind(spec, ExperimentKind::Misspecified)?;
    run_experiment(spec)
}

/// Concentration pipeline under the spike-and-slab prior with `‖θ0‖₂ = 1`.
pub fn run_spike_slab_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    expect_kind(spec, ExperimentKind::SpikeSlab)?;
    run_experiment(spec)
}
