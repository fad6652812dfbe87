//! Divergences between joint laws of `(X, Y)` sharing the design marginal.
//!
//! With a common design law the joint divergences reduce to design averages
//! of two-point (Bernoulli) quantities:
//!
//! * Rényi: `D_α = 1/(α−1) · log E_x[p^α q^{1−α} + (1−p)^α (1−q)^{1−α}]`
//! * squared Hellinger: `E_x[(√p−√q)² + (√(1−p)−√(1−q))²]`
//! * total variation: `E_x|p − q|`
//! * Kullback–Leibler: `E_x[KL(Bern q ‖ Bern p)]` with `q` the truth.
//!
//! Here `p = p_θ(+1|x)` and `q = P_true(+1|x)`. Rényi, Hellinger and TV
//! take the model law as the first argument; KL is oriented truth-first.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{dot, sigmoid, Coefficients, DesignDistribution, DesignSample, Generator};

/// A Monte Carlo divergence estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_mc: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "alpha", rename_all = "snake_case")]
pub enum Divergence {
    Renyi(f64),
    Hellinger2,
    Tv,
    Kl,
}

impl Divergence {
    pub fn validate(&self) -> Result<()> {
        if let Divergence::Renyi(a) = self {
            if !(*a > 0.0 && *a < 1.0) {
                return Err(Error::InvalidConfig(format!("Rényi order must lie in (0, 1), got {a}")));
            }
        }
        Ok(())
    }
}

fn check_prob(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Precondition(format!("probability must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// `Σ_y p(y)^α q(y)^{1−α}` for two Bernoulli laws; exactly 1 when `p == q`.
#[inline]
fn renyi_inner(p: f64, q: f64, alpha: f64) -> f64 {
    if p == q {
        return 1.0;
    }
    p.powf(alpha) * q.powf(1.0 - alpha) + (1.0 - p).powf(alpha) * (1.0 - q).powf(1.0 - alpha)
}

/// `D_α(Bern p ‖ Bern q)`.
pub fn bernoulli_renyi(p: f64, q: f64, alpha: f64) -> Result<f64> {
    check_prob(p)?;
    check_prob(q)?;
    Divergence::Renyi(alpha).validate()?;
    Ok((renyi_inner(p, q, alpha).ln() / (alpha - 1.0)).max(0.0))
}

/// `H²(Bern p, Bern q)` (without the ½ convention).
pub fn bernoulli_hellinger2(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    (p.sqrt() - q.sqrt()).powi(2) + ((1.0 - p).sqrt() - (1.0 - q).sqrt()).powi(2)
}

/// `d_TV(Bern p, Bern q) = |p − q|`.
pub fn bernoulli_tv(p: f64, q: f64) -> f64 {
    (p - q).abs()
}

/// `KL(Bern q ‖ Bern p)`: truth `q` first.
pub fn bernoulli_kl(q: f64, p: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    (term(q, p) + term(1.0 - q, 1.0 - p)).max(0.0)
}

fn mean_sd(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let mut n = 0usize;
    let (mut mean, mut m2) = (0.0, 0.0);
    for v in values {
        n += 1;
        let delta = v - mean;
        mean += delta / n as f64;
        m2 += delta * (v - mean);
    }
    let sd = if n > 1 { (m2 / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, sd, n)
}

/// Joint divergence from paired conditional probabilities: `p_model[i]` and
/// `p_true[i]` are `P(Y = +1 | x_i)` under the model and the truth.
pub fn divergence_from_probs(kind: Divergence, p_model: &[f64], p_true: &[f64]) -> Result<DivergenceEstimate> {
    kind.validate()?;
    check_dim(p_true.len(), p_model.len())?;
    if p_model.is_empty() {
        return Err(Error::Precondition("divergence needs at least one design draw".into()));
    }
    let pairs = p_model.iter().zip(p_true);
    let m = p_model.len();
    let se = |sd: f64| sd / (m as f64).sqrt();
    Ok(match kind {
        Divergence::Renyi(alpha) => {
            let (a, sd, _) = mean_sd(pairs.map(|(p, q)| renyi_inner(*p, *q, alpha)));
            let value = if sd == 0.0 && a == 1.0 { 0.0 } else { (a.ln() / (alpha - 1.0)).max(0.0) };
            DivergenceEstimate { value, std_error: se(sd) / (a * (1.0 - alpha)), n_mc: m }
        }
        Divergence::Hellinger2 => {
            let (v, sd, _) = mean_sd(pairs.map(|(p, q)| bernoulli_hellinger2(*p, *q)));
            DivergenceEstimate { value: v.max(0.0), std_error: se(sd), n_mc: m }
        }
        Divergence::Tv => {
            let (v, sd, _) = mean_sd(pairs.map(|(p, q)| bernoulli_tv(*p, *q)));
            DivergenceEstimate { value: v, std_error: se(sd), n_mc: m }
        }
        Divergence::Kl => {
            let (v, sd, _) = mean_sd(pairs.map(|(p, q)| bernoulli_kl(*q, *p)));
            DivergenceEstimate { value: v.max(0.0), std_error: se(sd), n_mc: m }
        }
    })
}

/// `σ(x_iᵀθ)` over the rows of a design sample.
pub fn model_probs(theta: &[f64], sample: &DesignSample) -> Vec<f64> {
    sample.rows().map(|r| sigmoid(dot(r, theta))).collect()
}

/// `P_true(+1 | x_i)` over the rows of a design sample.
pub fn truth_probs(generator: &Generator, sample: &DesignSample) -> Vec<f64> {
    sample.rows().map(|r| generator.prob_pos(r)).collect()
}

/// Divergence between `P_θ` and the generator's law on a fixed design sample.
pub fn joint_divergence_on_sample(
    kind: Divergence,
    theta: &Coefficients,
    generator: &Generator,
    sample: &DesignSample,
) -> Result<DivergenceEstimate> {
    check_dim(sample.d, theta.dim())?;
    check_dim(sample.d, generator.theta0.dim())?;
    divergence_from_probs(kind, &model_probs(theta.values(), sample), &truth_probs(generator, sample))
}

fn joint_mc(
    kind: Divergence,
    theta: &Coefficients,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    design.validate()?;
    let sample = design.sample(n_mc, seed);
    joint_divergence_on_sample(kind, theta, &Generator::logistic(theta0.clone()), &sample)
}

/// `D_α(P_θ, P_θ0)` over `n_mc` fresh design draws; delta-method SE.
pub fn joint_renyi_mc(
    theta: &Coefficients,
    theta0: &Coefficients,
    alpha: f64,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    joint_mc(Divergence::Renyi(alpha), theta, theta0, design, n_mc, seed)
}

pub fn joint_hellinger2_mc(
    theta: &Coefficients,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    joint_mc(Divergence::Hellinger2, theta, theta0, design, n_mc, seed)
}

pub fn joint_tv_mc(
    theta: &Coefficients,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    joint_mc(Divergence::Tv, theta, theta0, design, n_mc, seed)
}

/// `KL(P_θ0 ‖ P_θ)`.
pub fn joint_kl_mc(
    theta: &Coefficients,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<DivergenceEstimate> {
    joint_mc(Divergence::Kl, theta, theta0, design, n_mc, seed)
}

/// Divergence averaged over posterior draws on a common design sample.
/// `std_error` is the spread of the per-draw values over `√(#draws)`.
pub fn posterior_averaged(
    kind: Divergence,
    draws: &[Vec<f64>],
    p_true: &[f64],
    sample: &DesignSample,
) -> Result<DivergenceEstimate> {
    if draws.is_empty() {
        return Err(Error::Precondition("posterior average over an empty draw set".into()));
    }
    let mut values = Vec::with_capacity(draws.len());
    for theta in draws {
        check_dim(sample.d, theta.len())?;
        values.push(divergence_from_probs(kind, &model_probs(theta, sample), p_true)?.value);
    }
    let (mean, sd, k) = mean_sd(values.into_iter());
    Ok(DivergenceEstimate { value: mean, std_error: sd / (k as f64).sqrt(), n_mc: sample.m })
}
