//! Sparsity-inducing priors.
//!
//! * Scaled Student prior: `π(θ) ∝ ∏ (τ² + θ_i²)^{-2}` on the ℓ1 ball
//!   `B1(C1)`. Each unrestricted coordinate is exactly `τ·T/√3` with `T`
//!   Student-t with 3 degrees of freedom, which is how it is sampled.
//! * Spike-and-slab: `∏ [p·φ(θ_i; 0, v1) + (1 − p)·φ(θ_i; 0, v0)]`.
//! * Translated prior `p0(θ) ∝ π(θ − c)·1{‖θ − c‖₁ ≤ 2dτ}`.

use std::f64::consts::{FRAC_2_PI, PI};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Coefficients;
use crate::rng::{rng_from_seed, StreamRng};

/// Default ℓ1 radius: large enough that the constraint never binds at desk scale.
pub const DEFAULT_C1: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentPriorConfig {
    pub tau: f64,
    pub c1: f64,
}

impl StudentPriorConfig {
    pub fn new(tau: f64, c1: f64, d: usize) -> Result<Self> {
        let cfg = StudentPriorConfig { tau, c1 };
        cfg.validate(d)?;
        Ok(cfg)
    }

    /// Checks `τ > 0`, `C1 > 0` and `C1 > 2dτ`.
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig(format!("tau must be > 0, got {}", self.tau)));
        }
        if !(self.c1 > 0.0) {
            return Err(Error::InvalidConfig(format!("c1 must be > 0, got {}", self.c1)));
        }
        if self.c1 <= 2.0 * d as f64 * self.tau {
            return Err(Error::InvalidConfig(format!(
                "need C1 > 2dτ: C1 = {}, 2dτ = {}",
                self.c1,
                2.0 * d as f64 * self.tau
            )));
        }
        Ok(())
    }

    /// Normalized one-dimensional density of the unrestricted coordinate,
    /// `(2τ³/π)·(τ² + x²)^{-2}`.
    pub fn coord_log_density(&self, x: f64) -> f64 {
        let t2 = self.tau * self.tau;
        (FRAC_2_PI * t2 * self.tau).ln() - 2.0 * (t2 + x * x).ln()
    }

    pub fn sample_coord<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let t3 = StudentT::new(3.0).expect("3 degrees of freedom");
        self.tau * t3.sample(rng) / 3f64.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpikeSlabConfig {
    pub p: f64,
    pub v0: f64,
    pub v1: f64,
}

impl SpikeSlabConfig {
    pub fn new(p: f64, v0: f64, v1: f64) -> Result<Self> {
        let cfg = SpikeSlabConfig { p, v0, v1 };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks `p ∈ (0,1)`, `0 < v0 < v1`.
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidConfig(format!("p must lie in (0,1), got {}", self.p)));
        }
        if !(self.v0 > 0.0 && self.v1 > 0.0) {
            return Err(Error::InvalidConfig("spike/slab variances must be > 0".into()));
        }
        if self.v0 >= self.v1 {
            return Err(Error::InvalidConfig(format!(
                "need v0 < v1, got v0 = {}, v1 = {}",
                self.v0, self.v1
            )));
        }
        Ok(())
    }

    /// Log of the normalized one-dimensional mixture density.
    pub fn coord_log_density(&self, x: f64) -> f64 {
        let (l1, l0) = self.component_logs(x);
        log_add_exp(l1, l0)
    }

    /// `(log p φ(x; 0, v1), log (1−p) φ(x; 0, v0))`.
    fn component_logs(&self, x: f64) -> (f64, f64) {
        (
            self.p.ln() + log_normal_pdf(x, self.v1),
            (1.0 - self.p).ln() + log_normal_pdf(x, self.v0),
        )
    }

    /// `d/dx log density` of one coordinate.
    pub fn coord_grad(&self, x: f64) -> f64 {
        let (l1, l0) = self.component_logs(x);
        let total = log_add_exp(l1, l0);
        let w1 = if l1 == f64::NEG_INFINITY { 0.0 } else { (l1 - total).exp() };
        let w0 = if l0 == f64::NEG_INFINITY { 0.0 } else { (l0 - total).exp() };
        -x * (w1 / self.v1 + w0 / self.v0)
    }

    pub fn sample_coord<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let slab = rng.random::<f64>() < self.p;
        z * if slab { self.v1 } else { self.v0 }.sqrt()
    }
}

fn log_normal_pdf(x: f64, var: f64) -> f64 {
    -0.5 * (2.0 * PI * var).ln() - x * x / (2.0 * var)
}

pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Prior choice used by the fractional target and serialized in experiment
/// configs as `{"kind":"student","tau":…,"c1":…}` or
/// `{"kind":"spike_slab","p":…,"v0":…,"v1":…}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriorSpec {
    Student(StudentPriorConfig),
    SpikeSlab(SpikeSlabConfig),
}

impl PriorSpec {
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            PriorSpec::Student(c) => c.validate(d),
            PriorSpec::SpikeSlab(c) => c.validate(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            PriorSpec::Student(_) => "student",
            PriorSpec::SpikeSlab(_) => "spike_slab",
        }
    }

    /// Log prior density (unnormalized for the Student prior), `−∞` outside
    /// the support.
    pub fn log_density(&self, theta: &[f64]) -> f64 {
        match self {
            PriorSpec::Student(c) => student_log_density_raw(theta, c),
            PriorSpec::SpikeSlab(c) => theta.iter().map(|x| c.coord_log_density(*x)).sum(),
        }
    }

    /// Adds the prior gradient into `grad`. Caller guarantees an interior point.
    pub(crate) fn add_grad(&self, theta: &[f64], grad: &mut [f64]) {
        match self {
            PriorSpec::Student(c) => {
                let t2 = c.tau * c.tau;
                for (g, x) in grad.iter_mut().zip(theta) {
                    *g += -4.0 * x / (t2 + x * x);
                }
            }
            PriorSpec::SpikeSlab(c) => {
                for (g, x) in grad.iter_mut().zip(theta) {
                    *g += c.coord_grad(*x);
                }
            }
        }
    }

    /// Whether a point with the given ℓ1 norm lies strictly inside the support.
    pub fn is_interior_l1(&self, l1: f64) -> bool {
        match self {
            PriorSpec::Student(c) => l1 < c.c1,
            PriorSpec::SpikeSlab(_) => l1.is_finite(),
        }
    }

    pub fn in_support_l1(&self, l1: f64) -> bool {
        match self {
            PriorSpec::Student(c) => l1 <= c.c1,
            PriorSpec::SpikeSlab(_) => l1.is_finite(),
        }
    }

    /// Normalized density of one unrestricted coordinate.
    pub fn coord_log_density(&self, x: f64) -> f64 {
        match self {
            PriorSpec::Student(c) => c.coord_log_density(x),
            PriorSpec::SpikeSlab(c) => c.coord_log_density(x),
        }
    }

    pub fn sample_coord<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            PriorSpec::Student(c) => c.sample_coord(rng),
            PriorSpec::SpikeSlab(c) => c.sample_coord(rng),
        }
    }

    /// Width of the prior's central spike: `τ` or `√v0`.
    pub fn spike_scale(&self) -> f64 {
        match self {
            PriorSpec::Student(c) => c.tau,
            PriorSpec::SpikeSlab(c) => c.v0.sqrt(),
        }
    }
}

fn student_log_density_raw(theta: &[f64], cfg: &StudentPriorConfig) -> f64 {
    let l1: f64 = theta.iter().map(|v| v.abs()).sum();
    if !(l1 <= cfg.c1) {
        return f64::NEG_INFINITY;
    }
    let t2 = cfg.tau * cfg.tau;
    -2.0 * theta.iter().map(|x| (t2 + x * x).ln()).sum::<f64>()
}

/// `−2 Σ log(τ² + θ_i²)` on `B1(C1)`, `−∞` outside.
pub fn student_log_density_unnorm(theta: &Coefficients, cfg: &StudentPriorConfig) -> f64 {
    student_log_density_raw(theta.values(), cfg)
}

/// `∂_i log π = −4θ_i / (τ² + θ_i²)`; only defined strictly inside the ball.
pub fn student_grad_log_density(theta: &Coefficients, cfg: &StudentPriorConfig) -> Result<Vec<f64>> {
    let l1 = theta.l1_norm();
    if !(l1 < cfg.c1) {
        return Err(Error::Precondition(format!(
            "Student prior gradient needs ‖θ‖₁ < C1 (‖θ‖₁ = {l1}, C1 = {})",
            cfg.c1
        )));
    }
    let mut g = vec![0.0; theta.dim()];
    PriorSpec::Student(*cfg).add_grad(theta.values(), &mut g);
    Ok(g)
}

/// `τ = 1/(n√d)`.
pub fn default_tau(n: usize, d: usize) -> f64 {
    1.0 / (n as f64 * (d as f64).sqrt())
}

/// Draw from the Student prior: i.i.d. `τ·t₃/√3` coordinates, rejected
/// until the ℓ1 constraint holds.
pub fn sample_student_prior(cfg: &StudentPriorConfig, d: usize, seed: u64) -> Result<Coefficients> {
    let mut rng = rng_from_seed(seed);
    sample_student_prior_with(cfg, d, &mut rng)
}

pub fn sample_student_prior_with(
    cfg: &StudentPriorConfig,
    d: usize,
    rng: &mut StreamRng,
) -> Result<Coefficients> {
    const MAX_ATTEMPTS: usize = 1000;
    let mut theta = vec![0.0; d];
    for _ in 0..MAX_ATTEMPTS {
        theta.iter_mut().for_each(|v| *v = cfg.sample_coord(rng));
        if theta.iter().map(|v| v.abs()).sum::<f64>() <= cfg.c1 {
            return Ok(Coefficients::new(theta));
        }
    }
    Err(Error::InvalidConfig(format!(
        "Student prior rejection rate above 0.999 (C1 = {} too small for τ = {}, d = {d})",
        cfg.c1, cfg.tau
    )))
}

/// Mixture log density `Σ_i log[p φ(θ_i;0,v1) + (1−p) φ(θ_i;0,v0)]`.
pub fn spike_slab_log_density(theta: &Coefficients, cfg: &SpikeSlabConfig) -> f64 {
    PriorSpec::SpikeSlab(*cfg).log_density(theta.values())
}

pub fn spike_slab_grad_log_density(theta: &Coefficients, cfg: &SpikeSlabConfig) -> Vec<f64> {
    theta.values().iter().map(|x| cfg.coord_grad(*x)).collect()
}

/// `p = 1 − e^{−1/d}`, `v0 = 1/(2n²d·log d)`, `v1 = 1`.
pub fn spike_slab_defaults(n: usize, d: usize) -> Result<SpikeSlabConfig> {
    if d < 2 {
        return Err(Error::Precondition("spike-and-slab defaults need d ≥ 2".into()));
    }
    let (nf, df) = (n as f64, d as f64);
    Ok(SpikeSlabConfig {
        p: -(-1.0 / df).exp_m1(),
        v0: 1.0 / (2.0 * nf * nf * df * df.ln()),
        v1: 1.0,
    })
}

/// The prior translated to `center` and restricted to the ℓ1 ball of radius
/// `2dτ` around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedPrior {
    center: Coefficients,
    radius: f64,
    base: StudentPriorConfig,
}

impl TranslatedPrior {
    /// Refuses centers with `‖center‖₁ > C1 − 2dτ`.
    pub fn new(center: Coefficients, base: StudentPriorConfig) -> Result<Self> {
        let d = center.dim();
        base.validate(d)?;
        let radius = 2.0 * d as f64 * base.tau;
        if center.l1_norm() > base.c1 - radius {
            return Err(Error::Precondition(format!(
                "translated prior needs ‖center‖₁ ≤ C1 − 2dτ ({} > {})",
                center.l1_norm(),
                base.c1 - radius
            )));
        }
        Ok(TranslatedPrior { center, radius, base })
    }

    pub fn center(&self) -> &Coefficients {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn base(&self) -> &StudentPriorConfig {
        &self.base
    }

    /// One perturbation `δ` drawn from the unrestricted product density and
    /// accepted when `‖δ‖₁ ≤ 2dτ`. Returns the number of attempts as well.
    pub fn sample_offset(&self, rng: &mut StreamRng, out: &mut [f64]) -> usize {
        let mut attempts = 0;
        loop {
            attempts += 1;
            out.iter_mut().for_each(|v| *v = self.base.sample_coord(rng));
            if out.iter().map(|v| v.abs()).sum::<f64>() <= self.radius {
                return attempts;
            }
        }
    }
}

/// `θ = center + δ` with `δ` from the restricted Student density.
pub fn sample_translated_prior(tp: &TranslatedPrior, seed: u64) -> Coefficients {
    let mut rng = rng_from_seed(seed);
    let mut delta = vec![0.0; tp.center.dim()];
    tp.sample_offset(&mut rng, &mut delta);
    let v = tp
        .center
        .values()
        .iter()
        .zip(&delta)
        .map(|(c, e)| c + e)
        .collect();
    Coefficients::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// CDF of the unit-scale density ∝ (1 + x²)^{-2} by cumulative Simpson
    /// quadrature in φ = atan(x), where the integrand becomes cos²φ·const.
    struct QuadratureCdf {
        phis: Vec<f64>,
        cdf: Vec<f64>,
    }

    impl QuadratureCdf {
        fn new(k: usize) -> Self {
            let a = -PI / 2.0;
            let h = PI / k as f64;
            let f = |phi: f64| {
                let x = phi.tan();
                (1.0 + x * x).powi(-2) / phi.cos().powi(2).max(1e-300)
            };
            let f = |phi: f64| if phi.abs() >= PI / 2.0 { 0.0 } else { f(phi) };
            let mut phis = vec![a];
            let mut cdf = vec![0.0];
            let mut acc = 0.0;
            for i in 0..k {
                let l = a + i as f64 * h;
                let r = l + h;
                acc += h / 6.0 * (f(l) + 4.0 * f(0.5 * (l + r)) + f(r));
                phis.push(r);
                cdf.push(acc);
            }
            let total = acc;
            cdf.iter_mut().for_each(|c| *c /= total);
            QuadratureCdf { phis, cdf }
        }

        fn eval(&self, x: f64) -> f64 {
            let phi = x.atan();
            let h = self.phis[1] - self.phis[0];
            let pos = (phi - self.phis[0]) / h;
            let i = (pos.floor() as usize).min(self.phis.len() - 2);
            let w = pos - i as f64;
            self.cdf[i] * (1.0 - w) + self.cdf[i + 1] * w
        }

        fn quantile(&self, q: f64) -> f64 {
            let (mut lo, mut hi) = (-1e6, 1e6);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.eval(mid) < q {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    }

    #[test]
    fn student_density_examples() {
        let cfg = StudentPriorConfig { tau: 0.01, c1: 10.0 };
        let v = student_log_density_unnorm(&Coefficients::zeros(2), &cfg);
        assert_relative_eq!(v, 36.841_361_487_904_73, epsilon = 1e-9);
        let far = Coefficients::new(vec![6.0, -5.0]);
        assert_eq!(student_log_density_unnorm(&far, &cfg), f64::NEG_INFINITY);
        let theta = Coefficients::new(vec![0.02, -0.005]);
        let ratio = (student_log_density_unnorm(&theta, &cfg) - v).exp();
        let expect: f64 = theta
            .values()
            .iter()
            .map(|x| (cfg.tau.powi(2) / (cfg.tau.powi(2) + x * x)).powi(2))
            .product();
        assert_relative_eq!(ratio, expect, max_relative = 1e-12);
    }

    #[test]
    fn student_gradient_examples() {
        let cfg = StudentPriorConfig { tau: 0.05, c1: 10.0 };
        let g = student_grad_log_density(&Coefficients::zeros(3), &cfg).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
        let g = student_grad_log_density(&Coefficients::new(vec![0.05, 0.0]), &cfg).unwrap();
        assert_relative_eq!(g[0], -2.0 / 0.05, max_relative = 1e-14);
        let boundary = Coefficients::new(vec![10.0, 0.0]);
        assert!(student_grad_log_density(&boundary, &cfg).is_err());
    }

    #[test]
    fn student_gradient_bounded_by_two_over_tau() {
        let cfg = StudentPriorConfig { tau: 0.3, c1: 1e4 };
        let mut max = 0.0f64;
        for i in 0..200_001 {
            let x = -5.0 + 5e-5 * i as f64;
            let g = -4.0 * x / (cfg.tau * cfg.tau + x * x);
            max = max.max(g.abs());
        }
        assert!(max <= 2.0 / cfg.tau + 1e-9);
        assert!(max > 2.0 / cfg.tau * 0.999);
    }

    #[test]
    fn tau_default() {
        assert_relative_eq!(default_tau(100, 4), 0.005);
        assert_eq!(default_tau(1, 1), 1.0);
        assert!(default_tau(200, 4) < default_tau(100, 4));
        assert!(default_tau(100, 9) < default_tau(100, 4));
    }

    #[test]
    fn unit_student_density_matches_scaled_t3() {
        // The normalized coordinate density equals the density of τ·t₃/√3.
        let cfg = StudentPriorConfig { tau: 0.7, c1: 1e4 };
        let t3 = statrs::distribution::StudentsT::new(0.0, 1.0, 3.0).unwrap();
        use statrs::distribution::Continuous;
        for x in [-3.0, -0.4, 0.0, 0.1, 1.3, 9.0] {
            let s = 3f64.sqrt() / cfg.tau;
            let via_t = (t3.pdf(x * s) * s).ln();
            assert_relative_eq!(cfg.coord_log_density(x), via_t, max_relative = 1e-12);
        }
    }

    #[test]
    fn student_sampler_median_and_ks() {
        let quad = QuadratureCdf::new(200_000);
        // median of |X| for the unit-scale density is the 0.75 quantile
        let median_abs = quad.quantile(0.75);
        assert_relative_eq!(median_abs, 0.441_610_791_705_3, epsilon = 1e-6);

        let tau = 0.003;
        let cfg = StudentPriorConfig { tau, c1: 1e6 };
        let mut rng = rng_from_seed(17);
        let n = 1_000_000;
        let mut draws: Vec<f64> = (0..n).map(|_| cfg.sample_coord(&mut rng) / tau).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut abs: Vec<f64> = draws.iter().map(|v| v.abs()).collect();
        abs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let emp_median = abs[n / 2];
        assert!((emp_median - median_abs).abs() < 0.005, "{emp_median}");

        let mut ks = 0.0f64;
        for (i, x) in draws.iter().enumerate() {
            let f = quad.eval(*x);
            ks = ks.max((f - i as f64 / n as f64).abs());
            ks = ks.max((f - (i + 1) as f64 / n as f64).abs());
        }
        assert!(ks < 0.005, "KS distance {ks}");
    }

    #[test]
    fn student_prior_respects_ball_and_refuses_tiny_c1() {
        let cfg = StudentPriorConfig { tau: 0.5, c1: 6.0 };
        for s in 0..200 {
            let t = sample_student_prior(&cfg, 5, s).unwrap();
            assert!(t.l1_norm() <= 6.0);
        }
        let tight = StudentPriorConfig { tau: 1.0, c1: 1e-3 };
        assert!(sample_student_prior(&tight, 50, 1).is_err());
        assert!(StudentPriorConfig::new(0.1, 1.0, 5).is_err());
    }

    #[test]
    fn spike_slab_examples() {
        let cfg = SpikeSlabConfig { p: 0.5, v0: 0.01, v1: 1.0 };
        let d = 3;
        let v = spike_slab_log_density(&Coefficients::zeros(d), &cfg);
        assert_relative_eq!(v, d as f64 * 2.194_18_f64.ln(), epsilon = 1e-5);
        let degenerate = SpikeSlabConfig { p: 1.0, v0: 0.01, v1: 2.0 };
        let theta = Coefficients::new(vec![0.3, -1.2]);
        let expect: f64 = theta.values().iter().map(|x| log_normal_pdf(*x, 2.0)).sum();
        assert_relative_eq!(spike_slab_log_density(&theta, &degenerate), expect, epsilon = 1e-12);
        let g = spike_slab_grad_log_density(&Coefficients::zeros(4), &cfg);
        assert!(g.iter().all(|v| *v == 0.0));
        let collapsed = SpikeSlabConfig { p: 0.3, v0: 2.0, v1: 2.0 };
        let g = spike_slab_grad_log_density(&theta, &collapsed);
        assert_relative_eq!(g[0], -0.3 / 2.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 1.2 / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn spike_slab_collapses_to_gaussian() {
        let v1 = 1.7;
        let cfg = SpikeSlabConfig { p: 0.2, v0: v1 * (1.0 - 1e-9), v1 };
        for x in [-3.0, -0.1, 0.0, 0.5, 2.0] {
            assert_relative_eq!(cfg.coord_log_density(x), log_normal_pdf(x, v1), epsilon = 1e-8);
        }
    }

    #[test]
    fn spike_slab_default_values() {
        let c = spike_slab_defaults(100, 50).unwrap();
        assert_relative_eq!(c.p, 0.019_801_326_693_244_7, epsilon = 1e-12);
        assert_relative_eq!(c.v0, 2.556e-7, max_relative = 1e-3);
        assert_eq!(c.v1, 1.0);
        let big = spike_slab_defaults(10, 100_000).unwrap();
        assert!((big.p * 1e5 - 1.0).abs() < 1e-4);
        assert!(spike_slab_defaults(10, 1).is_err());
    }

    #[test]
    fn translated_prior_contract() {
        let d = 4;
        let tau = default_tau(100, d);
        let base = StudentPriorConfig { tau, c1: 10.0 };
        let center = Coefficients::new(vec![1.0, 0.0, 0.0, 0.0]);
        let tp = TranslatedPrior::new(center.clone(), base).unwrap();
        assert!(TranslatedPrior::new(Coefficients::new(vec![10.0, 0.0, 0.0, 0.0]), base).is_err());

        let mut rng = rng_from_seed(9);
        let m = 200_000;
        let mut delta = vec![0.0; d];
        let (mut sq, mut mean, mut attempts) = (0.0, vec![0.0; d], 0usize);
        for _ in 0..m {
            attempts += tp.sample_offset(&mut rng, &mut delta);
            assert!(delta.iter().map(|v| v.abs()).sum::<f64>() <= tp.radius());
            sq += delta.iter().map(|v| v * v).sum::<f64>();
            for (a, v) in mean.iter_mut().zip(&delta) {
                *a += v;
            }
        }
        let acc = m as f64 / attempts as f64;
        assert!(acc > 1e-3, "acceptance {acc}");
        assert!(sq / m as f64 <= 4.0 * d as f64 * tau * tau);
        for a in &mean {
            assert!((a / m as f64).abs() < 0.05 * tau);
        }
        let t = sample_translated_prior(&tp, 3);
        assert!(t.l1_norm() <= base.c1);
    }

    fn fd(f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = 1e-4 * (1e-3 + x.abs());
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    proptest! {
        #[test]
        fn priors_are_even(x in -5.0f64..5.0, tau in 0.01f64..2.0, p in 0.01f64..0.99) {
            let st = PriorSpec::Student(StudentPriorConfig { tau, c1: 1e4 });
            prop_assert_eq!(st.log_density(&[x, 0.3]), st.log_density(&[-x, -0.3]));
            let ss = PriorSpec::SpikeSlab(SpikeSlabConfig { p, v0: 0.01, v1: 1.0 });
            prop_assert_eq!(ss.log_density(&[x]), ss.log_density(&[-x]));
        }

        #[test]
        fn coordinate_gradients_match_fd(x in -3.0f64..3.0, tau in 0.05f64..1.0, p in 0.05f64..0.95) {
            let st = StudentPriorConfig { tau, c1: 1e4 };
            let g = student_grad_log_density(&Coefficients::new(vec![x]), &st).unwrap()[0];
            let num = fd(|t| st.coord_log_density(t), x);
            prop_assert!((g - num).abs() <= 1e-6 * g.abs().max(1e-3));
            let ss = SpikeSlabConfig { p, v0: 0.05, v1: 1.5 };
            let g = ss.coord_grad(x);
            let num = fd(|t| ss.coord_log_density(t), x);
            prop_assert!((g - num).abs() <= 1e-6 * g.abs().max(1e-3));
        }
    }
}
