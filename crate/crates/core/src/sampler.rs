//! Langevin Monte Carlo chains for the fractional posterior.
//!
//! Two kernels share one proposal, `y = x + h∇log p(x) + √(2h)·ξ`:
//!
//! * **ULA** accepts every proposal that stays inside the support.
//! * **MALA** adds a Metropolis–Hastings correction with the Gaussian
//!   proposal density ratio, so its stationary law is exactly `p`.
//!
//! Proposals leaving the prior support are rejected (never projected), which
//! keeps MALA exact for a density truncated to a convex set.
//!
//! For the sparsity priors the target is extremely stiff near zero: the
//! curvature of the Student log-prior at the origin is `4/τ²`, with
//! `τ = 1/(n√d)`. Chains therefore run by default in the coordinates
//! `u_i = asinh(θ_i / s)` with `s` the spike width of the prior (`τ` or
//! `√v0`), where both the spike and the slab have O(1) curvature. The
//! Jacobian is part of the transformed density, so draws mapped back through
//! `θ = s·sinh(u)` follow the same posterior.
//!
//! Sparsity priors also make the posterior multimodal per coordinate (spike
//! versus slab). Local Langevin moves cannot cross between the modes, so
//! [`run_chain`] interleaves an optional coordinate-wise Metropolis refresh
//! ([`refresh_coordinates`]) whose independence proposal mixes the 1-d prior
//! with a Laplace approximation of the conditional likelihood. Each refresh
//! leaves the posterior invariant, so the composed kernel does too.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{dot, log_sigmoid, sigmoid, Coefficients};
use crate::posterior::FractionalTarget;
use crate::priors::{log_add_exp, sample_student_prior_with, PriorSpec};
use crate::rng::{rng_from_seed, stream_seed, StreamRng};

/// A differentiable log density (up to a constant).
pub trait LogDensity {
    fn dim(&self) -> usize;

    /// `log p(x)`, `−∞` outside the support.
    fn log_density(&self, x: &[f64]) -> f64;

    /// `log p(x)` with its gradient written into `grad`; `None` when `x` is
    /// not an interior point of the support.
    fn value_and_grad(&self, x: &[f64], grad: &mut [f64]) -> Option<f64>;
}

/// `N(0, I_d)`; the calibration target for both kernels.
#[derive(Debug, Clone, Copy)]
pub struct StandardGaussian {
    pub dim: usize,
}

impl LogDensity for StandardGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * dot(x, x)
    }

    fn value_and_grad(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        for (g, v) in grad.iter_mut().zip(x) {
            *g = -v;
        }
        Some(-0.5 * dot(x, x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ula,
    Mala,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Init {
    Zero,
    PriorDraw,
    Supplied(Vec<f64>),
}

/// Coordinates the Langevin dynamics run in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinates {
    /// Directly in `θ`.
    Natural,
    /// In `u = asinh(θ / s)`, `s` the prior's spike width.
    Asinh,
}

/// Pilot phase adapting the step size before the recorded run. The pilot
/// runs in windows of `window` steps and rescales `h` by
/// `exp(3·(acceptance − 0.574))` until a window's acceptance lands in
/// `[low, high]` or `max_rounds` windows have run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PilotTuning {
    pub window: usize,
    pub max_rounds: usize,
    pub low: f64,
    pub high: f64,
}

impl Default for PilotTuning {
    fn default() -> Self {
        PilotTuning {
            window: 200,
            max_rounds: 40,
            low: 0.45,
            high: 0.7,
        }
    }
}

/// Missing fields take their [`Default`] values when deserializing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Step size `h` (the initial value when pilot tuning is on).
    pub step_size: f64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub algorithm: Algorithm,
    pub init: Init,
    pub seed: u64,
    pub coordinates: Coordinates,
    /// Run a coordinate refresh sweep every this many steps; 0 disables it.
    pub refresh_every: usize,
    pub tuning: Option<PilotTuning>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            step_size: 0.01,
            n_iter: 20_000,
            burn_in: 5_000,
            thinning: 5,
            algorithm: Algorithm::Mala,
            init: Init::Zero,
            seed: 0,
            coordinates: Coordinates::Asinh,
            refresh_every: 20,
            tuning: Some(PilotTuning::default()),
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidConfig(format!("step size must be > 0, got {}", self.step_size)));
        }
        if self.burn_in >= self.n_iter {
            return Err(Error::InvalidConfig(format!(
                "burn_in ({}) must be < n_iter ({})",
                self.burn_in, self.n_iter
            )));
        }
        if self.thinning < 1 {
            return Err(Error::InvalidConfig("thinning must be ≥ 1".into()));
        }
        if let Some(t) = &self.tuning {
            if t.window == 0 || !(0.0 < t.low && t.low < t.high && t.high < 1.0) {
                return Err(Error::InvalidConfig("invalid pilot tuning settings".into()));
            }
        }
        Ok(())
    }

    /// Number of retained draws, `⌊(n_iter − burn_in)/thinning⌋`.
    pub fn n_draws(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thinning
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub alpha: f64,
    pub prior: PriorSpec,
    pub data_digest: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    /// Langevin steps in the recorded run (pilot excluded).
    pub n_steps: usize,
    pub boundary_rejections: usize,
    /// Step size used for the recorded run.
    pub step_size: f64,
    pub pilot_steps: usize,
    pub tuned: bool,
    pub refresh_proposed: usize,
    pub refresh_accepted: usize,
}

/// Retained draws with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub draws: Vec<Vec<f64>>,
    /// MALA acceptance rate over the recorded run; 1.0 for ULA.
    pub acceptance_rate: f64,
    pub config: SamplerConfig,
    pub target: TargetSummary,
    pub diagnostics: ChainDiagnostics,
}

impl SampleSet {
    pub fn dim(&self) -> usize {
        self.draws.first().map(|d| d.len()).unwrap_or(0)
    }

    pub fn coefficients(&self) -> impl Iterator<Item = Coefficients> + '_ {
        self.draws.iter().map(|d| Coefficients::new(d.clone()))
    }
}

/// Current point of a chain with cached log density and gradient.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub x: Vec<f64>,
    pub log_p: f64,
    pub grad: Vec<f64>,
}

impl ChainState {
    pub fn new<T: LogDensity + ?Sized>(target: &T, x: Vec<f64>) -> Result<Self> {
        check_dim(target.dim(), x.len())?;
        let mut grad = vec![0.0; x.len()];
        let log_p = target
            .value_and_grad(&x, &mut grad)
            .ok_or_else(|| Error::Precondition("chain started outside the interior of the support".into()))?;
        if !log_p.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: 0, state: x });
        }
        Ok(ChainState { x, log_p, grad })
    }
}

/// Outcome of one Langevin step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Accepted,
    Rejected,
    /// The proposal left the support of the target.
    OutOfSupport,
}

/// `x + h·grad + √(2h)·ξ` written into `out`.
pub fn langevin_proposal(x: &[f64], grad: &[f64], h: f64, xi: &[f64], out: &mut [f64]) {
    let s = (2.0 * h).sqrt();
    for i in 0..x.len() {
        out[i] = x[i] + h * grad[i] + s * xi[i];
    }
}

/// `log q(to | from)` up to a constant, for the Langevin proposal.
fn log_proposal(to: &[f64], from: &[f64], grad_from: &[f64], h: f64) -> f64 {
    let mut sq = 0.0;
    for i in 0..to.len() {
        let r = to[i] - from[i] - h * grad_from[i];
        sq += r * r;
    }
    -sq / (4.0 * h)
}

/// Log Metropolis–Hastings ratio for moving from `cur` to `prop`.
pub fn mala_log_accept_ratio(cur: &ChainState, prop: &ChainState, h: f64) -> f64 {
    prop.log_p - cur.log_p + log_proposal(&cur.x, &prop.x, &prop.grad, h)
        - log_proposal(&prop.x, &cur.x, &cur.grad, h)
}

fn propose<T: LogDensity + ?Sized>(
    target: &T,
    state: &ChainState,
    h: f64,
    rng: &mut StreamRng,
    iteration: usize,
) -> Result<Option<ChainState>> {
    let d = state.x.len();
    let xi: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let mut y = vec![0.0; d];
    langevin_proposal(&state.x, &state.grad, h, &xi, &mut y);
    let mut grad = vec![0.0; d];
    match target.value_and_grad(&y, &mut grad) {
        None => Ok(None),
        Some(log_p) => {
            if log_p.is_nan() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient { iteration, state: y });
            }
            if log_p == f64::NEG_INFINITY {
                return Ok(None);
            }
            Ok(Some(ChainState { x: y, log_p, grad }))
        }
    }
}

/// One unadjusted Langevin step. Out-of-support proposals leave the state
/// unchanged.
pub fn ula_step<T: LogDensity + ?Sized>(
    target: &T,
    state: &mut ChainState,
    h: f64,
    rng: &mut StreamRng,
) -> Result<StepOutcome> {
    ula_step_at(target, state, h, rng, 0)
}

fn ula_step_at<T: LogDensity + ?Sized>(
    target: &T,
    state: &mut ChainState,
    h: f64,
    rng: &mut StreamRng,
    iteration: usize,
) -> Result<StepOutcome> {
    match propose(target, state, h, rng, iteration)? {
        None => Ok(StepOutcome::OutOfSupport),
        Some(next) => {
            *state = next;
            Ok(StepOutcome::Accepted)
        }
    }
}

/// One Metropolis-adjusted Langevin step.
pub fn mala_step<T: LogDensity + ?Sized>(
    target: &T,
    state: &mut ChainState,
    h: f64,
    rng: &mut StreamRng,
) -> Result<StepOutcome> {
    mala_step_at(target, state, h, rng, 0)
}

fn mala_step_at<T: LogDensity + ?Sized>(
    target: &T,
    state: &mut ChainState,
    h: f64,
    rng: &mut StreamRng,
    iteration: usize,
) -> Result<StepOutcome> {
    let Some(prop) = propose(target, state, h, rng, iteration)? else {
        return Ok(StepOutcome::OutOfSupport);
    };
    let log_ratio = mala_log_accept_ratio(state, &prop, h);
    let u: f64 = rng.random();
    if u.ln() < log_ratio {
        *state = prop;
        Ok(StepOutcome::Accepted)
    } else {
        Ok(StepOutcome::Rejected)
    }
}

/// The map `θ_i = s_i·sinh(u_i)`.
#[derive(Debug, Clone)]
pub struct AsinhMap {
    scales: Vec<f64>,
}

impl AsinhMap {
    pub fn uniform(scale: f64, d: usize) -> Self {
        AsinhMap { scales: vec![scale; d] }
    }

    pub fn to_theta(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.scales).map(|(u, s)| s * u.sinh()).collect()
    }

    pub fn to_u(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().zip(&self.scales).map(|(t, s)| (t / s).asinh()).collect()
    }
}

#[inline]
fn ln_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// A target expressed in `u` coordinates of an [`AsinhMap`], Jacobian included.
pub struct Reparameterized<'a, T: ?Sized> {
    inner: &'a T,
    map: &'a AsinhMap,
}

impl<'a, T: LogDensity + ?Sized> Reparameterized<'a, T> {
    pub fn new(inner: &'a T, map: &'a AsinhMap) -> Self {
        Reparameterized { inner, map }
    }

    fn log_jacobian(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.map.scales).map(|(u, s)| s.ln() + ln_cosh(*u)).sum()
    }
}

impl<T: LogDensity + ?Sized> LogDensity for Reparameterized<'_, T> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn log_density(&self, u: &[f64]) -> f64 {
        let lp = self.inner.log_density(&self.map.to_theta(u));
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        lp + self.log_jacobian(u)
    }

    fn value_and_grad(&self, u: &[f64], grad: &mut [f64]) -> Option<f64> {
        let theta = self.map.to_theta(u);
        let lp = self.inner.value_and_grad(&theta, grad)?;
        for i in 0..u.len() {
            let s = self.map.scales[i];
            grad[i] = grad[i] * s * u[i].cosh() + u[i].tanh();
        }
        Some(lp + self.log_jacobian(u))
    }
}

const REFRESH_NEWTON_STEPS: usize = 3;
const REFRESH_SD_INFLATION: f64 = 1.5;
const REFRESH_PRIOR_WEIGHT: f64 = 0.5;

/// One sweep of coordinate-wise independence Metropolis updates.
///
/// For coordinate `j` the proposal is a 50/50 mixture of the prior's 1-d
/// marginal and `N(b̂, (1.5)²/(α·H))`, where `b̂` and `H` come from a few
/// Newton steps on the conditional log-likelihood with `θ_j` removed. The
/// proposal never depends on the current `θ_j`, so the usual independence
/// sampler ratio applies. Returns `(proposed, accepted)`.
pub fn refresh_coordinates(
    target: &FractionalTarget<'_>,
    theta: &mut [f64],
    rng: &mut StreamRng,
) -> (usize, usize) {
    let data = target.data();
    let alpha = target.alpha();
    let prior = target.prior();
    let (n, d) = (data.n(), data.d());
    let x = data.x();
    let y: Vec<f64> = data.labels().iter().map(|v| f64::from(*v)).collect();
    let mut eta: Vec<f64> = data.rows().map(|r| dot(r, theta)).collect();
    let mut ll: f64 = eta.iter().zip(&y).map(|(e, y)| log_sigmoid(y * e)).sum();
    let mut l1: f64 = theta.iter().map(|v| v.abs()).sum();
    let mut accepted = 0;
    let mut base = vec![0.0; n];
    let mut trial = vec![0.0; n];

    for j in 0..d {
        let a = theta[j];
        for i in 0..n {
            base[i] = eta[i] - x[i * d + j] * a;
        }
        // Laplace approximation of the conditional likelihood in θ_j.
        let (mut b, mut hess) = (0.0, 0.0);
        for _ in 0..REFRESH_NEWTON_STEPS {
            let (mut g, mut h) = (0.0, 0.0);
            for i in 0..n {
                let xij = x[i * d + j];
                let t = y[i] * (base[i] + xij * b);
                let s = sigmoid(-t);
                g += y[i] * xij * s;
                h += xij * xij * s * (1.0 - s);
            }
            hess = h;
            if h <= 1e-12 {
                break;
            }
            let step = (g / h).clamp(-5.0 / h.sqrt(), 5.0 / h.sqrt());
            b += step;
        }
        let sd = if alpha * hess > 1e-12 {
            (REFRESH_SD_INFLATION / (alpha * hess).sqrt()).min(1e3)
        } else {
            1e3
        };
        let log_q = |v: f64| {
            let z = (v - b) / sd;
            let gauss = -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln();
            log_add_exp(
                REFRESH_PRIOR_WEIGHT.ln() + prior.coord_log_density(v),
                (1.0 - REFRESH_PRIOR_WEIGHT).ln() + gauss,
            )
        };
        let prop = if rng.random::<f64>() < REFRESH_PRIOR_WEIGHT {
            prior.sample_coord(rng)
        } else {
            b + sd * rng.sample::<f64, _>(StandardNormal)
        };
        let new_l1 = l1 - a.abs() + prop.abs();
        if !prior.in_support_l1(new_l1) || !prop.is_finite() {
            continue;
        }
        let mut ll_new = 0.0;
        for i in 0..n {
            trial[i] = base[i] + x[i * d + j] * prop;
            ll_new += log_sigmoid(y[i] * trial[i]);
        }
        let log_ratio = alpha * (ll_new - ll) + prior.coord_log_density(prop)
            - prior.coord_log_density(a)
            + log_q(a)
            - log_q(prop);
        let u: f64 = rng.random();
        if u.ln() < log_ratio {
            theta[j] = prop;
            std::mem::swap(&mut eta, &mut trial);
            ll = ll_new;
            l1 = new_l1;
            accepted += 1;
        }
    }
    (d, accepted)
}

type Refresh<'r> = &'r mut dyn FnMut(&mut Vec<f64>, &mut StreamRng) -> (usize, usize);

struct CoreRun {
    draws: Vec<Vec<f64>>,
    accepted: usize,
    diagnostics: ChainDiagnostics,
}

fn step<T: LogDensity + ?Sized>(
    target: &T,
    algorithm: Algorithm,
    state: &mut ChainState,
    h: f64,
    rng: &mut StreamRng,
    iteration: usize,
) -> Result<StepOutcome> {
    match algorithm {
        Algorithm::Ula => ula_step_at(target, state, h, rng, iteration),
        Algorithm::Mala => mala_step_at(target, state, h, rng, iteration),
    }
}

fn run_core<T: LogDensity + ?Sized>(
    target: &T,
    cfg: &SamplerConfig,
    x0: Vec<f64>,
    rng: &mut StreamRng,
    mut refresh: Option<Refresh<'_>>,
    to_theta: &dyn Fn(&[f64]) -> Vec<f64>,
) -> Result<CoreRun> {
    let mut state = ChainState::new(target, x0)?;
    let mut diag = ChainDiagnostics::default();
    let mut h = cfg.step_size;

    let mut do_refresh = |state: &mut ChainState, rng: &mut StreamRng, diag: &mut ChainDiagnostics, it: usize| -> Result<()> {
        if let Some(f) = refresh.as_mut() {
            if cfg.refresh_every > 0 && it.is_multiple_of(cfg.refresh_every) {
                let mut x = std::mem::take(&mut state.x);
                let (p, a) = f(&mut x, rng);
                diag.refresh_proposed += p;
                diag.refresh_accepted += a;
                *state = ChainState::new(target, x).map_err(|e| match e {
                    Error::NonFiniteGradient { state, .. } => Error::NonFiniteGradient { iteration: it, state },
                    other => other,
                })?;
            }
        }
        Ok(())
    };

    if let (Some(t), Algorithm::Mala) = (&cfg.tuning, cfg.algorithm) {
        for _ in 0..t.max_rounds {
            let mut acc = 0;
            for k in 0..t.window {
                if step(target, cfg.algorithm, &mut state, h, rng, diag.pilot_steps)? == StepOutcome::Accepted {
                    acc += 1;
                }
                diag.pilot_steps += 1;
                do_refresh(&mut state, rng, &mut diag, k + 1)?;
            }
            let rate = acc as f64 / t.window as f64;
            if rate >= t.low && rate <= t.high {
                diag.tuned = true;
                break;
            }
            h *= (3.0 * (rate - 0.574)).exp();
        }
        if !diag.tuned {
            log::warn!("pilot tuning ended outside the acceptance band (h = {h:e})");
        }
        // reset refresh counters so they describe the recorded run only
        diag.refresh_proposed = 0;
        diag.refresh_accepted = 0;
    }
    diag.step_size = h;

    let mut draws = Vec::with_capacity(cfg.n_draws());
    let mut accepted = 0;
    for it in 0..cfg.n_iter {
        match step(target, cfg.algorithm, &mut state, h, rng, it)? {
            StepOutcome::Accepted => accepted += 1,
            StepOutcome::Rejected => {}
            StepOutcome::OutOfSupport => diag.boundary_rejections += 1,
        }
        do_refresh(&mut state, rng, &mut diag, it + 1)?;
        if it >= cfg.burn_in && (it - cfg.burn_in + 1).is_multiple_of(cfg.thinning) {
            draws.push(to_theta(&state.x));
        }
    }
    diag.n_steps = cfg.n_iter;
    if diag.boundary_rejections * 2 > cfg.n_iter {
        return Err(Error::Sampler(format!(
            "{} of {} proposals left the prior support; use a smaller step size or a larger C1",
            diag.boundary_rejections, cfg.n_iter
        )));
    }
    Ok(CoreRun { draws, accepted, diagnostics: diag })
}

/// Draws from any [`LogDensity`] in its own coordinates (no refresh moves).
pub fn run_generic<T: LogDensity + ?Sized>(
    target: &T,
    cfg: &SamplerConfig,
    x0: Vec<f64>,
) -> Result<(Vec<Vec<f64>>, f64, ChainDiagnostics)> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let run = run_core(target, cfg, x0, &mut rng, None, &|x| x.to_vec())?;
    Ok((run.draws, acceptance(cfg, run.accepted), run.diagnostics))
}

fn acceptance(cfg: &SamplerConfig, accepted: usize) -> f64 {
    match cfg.algorithm {
        Algorithm::Ula => 1.0,
        Algorithm::Mala => accepted as f64 / cfg.n_iter as f64,
    }
}

fn initial_point(target: &FractionalTarget<'_>, cfg: &SamplerConfig, rng: &mut StreamRng) -> Result<Vec<f64>> {
    let d = target.data().d();
    match &cfg.init {
        Init::Zero => Ok(vec![0.0; d]),
        Init::Supplied(v) => {
            check_dim(d, v.len())?;
            let l1: f64 = v.iter().map(|x| x.abs()).sum();
            if !target.prior().is_interior_l1(l1) {
                return Err(Error::InvalidConfig("supplied initial point is outside the prior support".into()));
            }
            Ok(v.clone())
        }
        Init::PriorDraw => match target.prior() {
            PriorSpec::Student(c) => Ok(sample_student_prior_with(c, d, rng)?.into_values()),
            p @ PriorSpec::SpikeSlab(_) => Ok((0..d).map(|_| p.sample_coord(rng)).collect()),
        },
    }
}

/// Run one chain on the fractional posterior.
pub fn run_chain(target: &FractionalTarget<'_>, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let theta0 = initial_point(target, cfg, &mut rng)?;
    let d = theta0.len();

    let run = match cfg.coordinates {
        Coordinates::Natural => {
            let mut refresh = |x: &mut Vec<f64>, rng: &mut StreamRng| refresh_coordinates(target, x, rng);
            run_core(target, cfg, theta0, &mut rng, Some(&mut refresh), &|x| x.to_vec())?
        }
        Coordinates::Asinh => {
            let map = AsinhMap::uniform(target.prior().spike_scale(), d);
            let reparam = Reparameterized::new(target, &map);
            let mut refresh = |u: &mut Vec<f64>, rng: &mut StreamRng| {
                let mut theta = map.to_theta(u);
                let r = refresh_coordinates(target, &mut theta, rng);
                *u = map.to_u(&theta);
                r
            };
            let u0 = map.to_u(&theta0);
            run_core(&reparam, cfg, u0, &mut rng, Some(&mut refresh), &|u| map.to_theta(u))?
        }
    };

    Ok(SampleSet {
        draws: run.draws,
        acceptance_rate: acceptance(cfg, run.accepted),
        config: cfg.clone(),
        target: TargetSummary {
            alpha: target.alpha(),
            prior: *target.prior(),
            data_digest: target.data().digest(),
        },
        diagnostics: run.diagnostics,
    })
}

/// Independent chains on one target, run concurrently. Chain `k` uses the
/// seed `stream_seed(cfg.seed, [k])`; results come back in chain order.
pub fn run_chains(target: &FractionalTarget<'_>, cfg: &SamplerConfig, n_chains: usize) -> Result<Vec<SampleSet>> {
    (0..n_chains as u64)
        .into_par_iter()
        .map(|k| {
            let mut c = cfg.clone();
            c.seed = stream_seed(cfg.seed, &[k]);
            run_chain(target, &c)
        })
        .collect()
}

/// Batch-means standard error of the mean of a correlated series.
pub fn batch_means_se(series: &[f64], n_batches: usize) -> f64 {
    let b = series.len() / n_batches.max(1);
    if b == 0 || n_batches < 2 {
        return f64::NAN;
    }
    let means: Vec<f64> = series
        .chunks_exact(b)
        .take(n_batches)
        .map(|c| c.iter().sum::<f64>() / b as f64)
        .collect();
    let k = means.len() as f64;
    let mean = means.iter().sum::<f64>() / k;
    let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}
