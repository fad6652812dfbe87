//! Closed-form rates and bounds, and Monte Carlo checks of the two
//! translated-prior lemmas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Coefficients;
use crate::priors::{default_tau, StudentPriorConfig, TranslatedPrior};
use crate::rng::rng_from_seed;

/// Coordinates with `|θ_i|` above this count towards `‖θ‖₀` of a
/// numerically computed vector.
pub const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateInputs {
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    /// ℓ1 radius; absent for the spike-and-slab rate.
    pub c1: Option<f64>,
    pub k1: f64,
}

/// `ε_n = max(K1/n, log arm)`, with both arms kept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub epsilon_n: f64,
    pub k1_arm: f64,
    pub log_arm: f64,
    pub inputs: RateInputs,
}

impl RateBound {
    fn new(k1_arm: f64, log_arm: f64, inputs: RateInputs) -> Self {
        RateBound { epsilon_n: k1_arm.max(log_arm), k1_arm, log_arm, inputs }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("need n ≥ 1".into()));
    }
    Ok(())
}

/// Student-prior rate `(K1 ∨ 4s*·log(C1·n·√d/s*))/n`.
pub fn epsilon_n_student(n: usize, d: usize, s_star: usize, c1: f64, k1: f64) -> Result<RateBound> {
    check_n(n)?;
    if s_star < 1 {
        return Err(Error::Precondition("need s* ≥ 1".into()));
    }
    let arg = c1 * n as f64 * (d as f64).sqrt() / s_star as f64;
    if !(arg > 1.0) {
        return Err(Error::Precondition(format!("need C1·n·√d/s* > 1, got {arg}")));
    }
    let nf = n as f64;
    Ok(RateBound::new(
        k1 / nf,
        4.0 * s_star as f64 * arg.ln() / nf,
        RateInputs { n, d, s_star, c1: Some(c1), k1 },
    ))
}

/// Spike-and-slab rate `(K1 ∨ s*·log(nd))/n`.
pub fn epsilon_n_spike_slab(n: usize, d: usize, s_star: usize, k1: f64) -> Result<RateBound> {
    check_n(n)?;
    let nd = n as f64 * d as f64;
    if !(nd > 1.0) {
        return Err(Error::Precondition("need n·d > 1".into()));
    }
    let nf = n as f64;
    Ok(RateBound::new(k1 / nf, s_star as f64 * nd.ln() / nf, RateInputs { n, d, s_star, c1: None, k1 }))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Precondition(format!("α must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// `H_α = 2(α+1)/(1−α)` for `α ≥ ½`, `2(α+1)/α` below.
pub fn h_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(if alpha >= 0.5 { 2.0 * (alpha + 1.0) / (1.0 - alpha) } else { 2.0 * (alpha + 1.0) / alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Renyi,
    Hellinger2,
    Tv2,
}

/// Radius multiplier times `ε_n` for the given metric.
pub fn concentration_bound(alpha: f64, epsilon_n: f64, metric: Metric) -> Result<f64> {
    check_alpha(alpha)?;
    let k = match metric {
        Metric::Renyi => 2.0 * (alpha + 1.0) / (1.0 - alpha),
        Metric::Hellinger2 => h_alpha(alpha)?,
        Metric::Tv2 => 4.0 * (alpha + 1.0) / ((1.0 - alpha) * alpha),
    };
    Ok(k * epsilon_n)
}

/// `(1+α)/(1−α)·ε_n`, the bound on the posterior-averaged Rényi divergence.
pub fn expectation_bound(alpha: f64, epsilon_n: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok((1.0 + alpha) / (1.0 - alpha) * epsilon_n)
}

/// Rate under misspecification,
/// `r_n = K1/n ∨ (4‖θ*‖₀·log(C1·n·√d/‖θ*‖₀) + log 2)/n`, with `‖θ*‖₀`
/// counted at [`SUPPORT_TOL`].
pub fn misspecified_r_n(n: usize, d: usize, c1: f64, theta_star: &Coefficients, k1: f64) -> Result<f64> {
    check_n(n)?;
    let s = theta_star.values().iter().filter(|v| v.abs() > SUPPORT_TOL).count();
    if s < 1 {
        return Err(Error::Precondition("pseudo-true parameter has empty support".into()));
    }
    let arg = c1 * n as f64 * (d as f64).sqrt() / s as f64;
    if !(arg > 1.0) {
        return Err(Error::Precondition(format!("need C1·n·√d/‖θ*‖₀ > 1, got {arg}")));
    }
    let nf = n as f64;
    Ok((k1 / nf).max((4.0 * s as f64 * arg.ln() + std::f64::consts::LN_2) / nf))
}

/// `ε_n^{(γ+1)/(γ+2)}`; `γ = ∞` gives `ε_n`.
pub fn excess_risk_rate(epsilon_n: f64, gamma: f64) -> Result<f64> {
    if !(epsilon_n > 0.0) || !(gamma >= 0.0) {
        return Err(Error::Precondition(format!("need ε_n > 0 and γ ≥ 0, got {epsilon_n}, {gamma}")));
    }
    if gamma.is_infinite() {
        return Ok(epsilon_n);
    }
    Ok(epsilon_n.powf((gamma + 1.0) / (gamma + 2.0)))
}

/// `4s*·log(C1/(τs*)) + log 2`, the bound on `KL(p0, π)`.
pub fn kl_lemma_bound(s_star: usize, c1: f64, tau: f64) -> Result<f64> {
    let arg = c1 / (tau * s_star as f64);
    if s_star < 1 || !(arg > 1.0) {
        return Err(Error::Precondition(format!("need s* ≥ 1 and C1/(τs*) > 1, got s* = {s_star}")));
    }
    Ok(4.0 * s_star as f64 * arg.ln() + std::f64::consts::LN_2)
}

/// Every applicable bound for one setting; the `bounds` CLI record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub n: usize,
    pub d: usize,
    pub s_star: usize,
    pub c1: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub k1: f64,
    pub student: RateBound,
    pub spike_slab: RateBound,
    pub h_alpha: f64,
    pub renyi_radius: f64,
    pub hellinger2_radius: f64,
    pub tv2_radius: f64,
    pub expectation: f64,
    pub excess_risk_rate: f64,
    pub excess_risk_rate_gamma_free: f64,
    pub spike_slab_expectation: f64,
    pub tau: f64,
    pub kl_lemma: f64,
    pub second_moment_lemma: f64,
}

pub fn bounds_report(n: usize, d: usize, s_star: usize, c1: f64, alpha: f64, gamma: f64, k1: f64) -> Result<BoundsReport> {
    let student = epsilon_n_student(n, d, s_star, c1, k1)?;
    let spike_slab = epsilon_n_spike_slab(n, d, s_star, k1)?;
    let eps = student.epsilon_n;
    let tau = default_tau(n, d);
    Ok(BoundsReport {
        n,
        d,
        s_star,
        c1,
        alpha,
        gamma,
        k1,
        student,
        spike_slab,
        h_alpha: h_alpha(alpha)?,
        renyi_radius: concentration_bound(alpha, eps, Metric::Renyi)?,
        hellinger2_radius: concentration_bound(alpha, eps, Metric::Hellinger2)?,
        tv2_radius: concentration_bound(alpha, eps, Metric::Tv2)?,
        expectation: expectation_bound(alpha, eps)?,
        excess_risk_rate: excess_risk_rate(eps, gamma)?,
        excess_risk_rate_gamma_free: excess_risk_rate(eps, 0.0)?,
        spike_slab_expectation: expectation_bound(alpha, spike_slab.epsilon_n)?,
        tau,
        kl_lemma: kl_lemma_bound(s_star, c1, tau)?,
        second_moment_lemma: 4.0 * d as f64 * tau * tau,
    })
}

/// One Monte Carlo check against a closed-form bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    /// `estimate + 3·std_error ≤ bound`.
    pub pass: bool,
}

impl LemmaCheck {
    fn new(estimate: f64, std_error: f64, bound: f64) -> Self {
        LemmaCheck { estimate, std_error, bound, pass: estimate + 3.0 * std_error <= bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub tau: f64,
    /// `∫‖θ − θ0‖² p0(dθ)` against `4dτ²`.
    pub second_moment: LemmaCheck,
    /// `KL(p0, π)` against `4s*·log(C1/(τs*)) + log 2`.
    pub kl: LemmaCheck,
    /// Accepted proposals behind the small-ball probability.
    pub effective_sample_size: usize,
}

/// Largest dimension for which the small-ball probability is estimated by
/// plain rejection.
pub const MAX_LEMMA_DIM: usize = 10;

/// Monte Carlo estimates of the two translated-prior lemmas at
/// `τ = 1/(n√d)`.
///
/// With `g` the unnormalized product density and `f` its normalized
/// version, `KL(p0, π) = E_{p0}[log g(θ − θ0) − log g(θ)]
/// − log P_f(‖δ‖₁ ≤ 2dτ) + log P_f(‖θ‖₁ ≤ C1)`. Draws from the unrestricted
/// product density serve as importance proposal for both ball
/// probabilities, which reduces to acceptance fractions.
pub fn verify_lemmas_mc(
    n: usize,
    d: usize,
    s_star: usize,
    c1: f64,
    theta0: &Coefficients,
    n_mc: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if d > MAX_LEMMA_DIM {
        return Err(Error::Precondition(format!("lemma verification needs d ≤ {MAX_LEMMA_DIM}, got {d}")));
    }
    crate::error::check_dim(d, theta0.dim())?;
    check_n(n)?;
    if n_mc < 100 {
        return Err(Error::Numerical(format!("effective sample size {n_mc} < 100")));
    }
    let tau = default_tau(n, d);
    let base = StudentPriorConfig::new(tau, c1, d)?;
    let tp = TranslatedPrior::new(theta0.clone(), base)?;
    let t2 = tau * tau;
    let log_g = |v: &[f64]| -2.0 * v.iter().map(|x| (t2 + x * x).ln()).sum::<f64>();

    let mut rng = rng_from_seed(seed);
    let mut delta = vec![0.0; d];
    let mut theta = vec![0.0; d];
    let (mut attempts, mut sq, mut sq2, mut lr, mut lr2) = (0usize, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n_mc {
        attempts += tp.sample_offset(&mut rng, &mut delta);
        let s: f64 = delta.iter().map(|v| v * v).sum();
        sq += s;
        sq2 += s * s;
        for i in 0..d {
            theta[i] = theta0.values()[i] + delta[i];
        }
        let r = log_g(&delta) - log_g(&theta);
        lr += r;
        lr2 += r * r;
    }
    let m = n_mc as f64;
    let mean_sd = |s: f64, s2: f64| {
        let mean = s / m;
        (mean, ((s2 / m - mean * mean).max(0.0) * m / (m - 1.0)).sqrt())
    };
    let (sq_mean, sq_sd) = mean_sd(sq, sq2);
    let (lr_mean, lr_sd) = mean_sd(lr, lr2);

    // small-ball probability around the center
    let p_small = n_mc as f64 / attempts as f64;
    // ℓ1-ball probability of the unrestricted prior
    let mut inside = 0usize;
    for _ in 0..n_mc {
        delta.iter_mut().for_each(|v| *v = base.sample_coord(&mut rng));
        if delta.iter().map(|v| v.abs()).sum::<f64>() <= c1 {
            inside += 1;
        }
    }
    if inside < 100 {
        return Err(Error::Numerical(format!("effective sample size {inside} < 100 for the C1-ball")));
    }
    let p_big = inside as f64 / m;
    let kl = lr_mean - p_small.ln() + p_big.ln();
    let var_log = |p: f64, k: f64| (1.0 - p) / (p * k);
    let kl_se = (lr_sd * lr_sd / m + var_log(p_small, attempts as f64) + var_log(p_big, m)).sqrt();

    Ok(LemmaReport {
        tau,
        second_moment: LemmaCheck::new(sq_mean, sq_sd / m.sqrt(), 4.0 * d as f64 * t2),
        kl: LemmaCheck::new(kl, kl_se, kl_lemma_bound(s_star, c1, tau)?),
        effective_sample_size: n_mc,
    })
}
