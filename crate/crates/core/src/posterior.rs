//! The fractional posterior `π_{n,α}(dθ) ∝ L_n(θ)^α π(dθ)`.

use crate::error::{check_dim, Error, Result};
use crate::model::{log_likelihood_and_grad, log_likelihood_raw, Coefficients, Dataset};
use crate::priors::PriorSpec;
use crate::sampler::{LogDensity, SampleSet};

/// Unnormalized fractional posterior over a fixed dataset.
#[derive(Debug, Clone, Copy)]
pub struct FractionalTarget<'a> {
    alpha: f64,
    data: &'a Dataset,
    prior: PriorSpec,
}

impl<'a> FractionalTarget<'a> {
    /// `alpha` must lie in `[0, 1]`; `α = 1` is the ordinary posterior and
    /// `α = 0` degenerates to the prior.
    pub fn new(alpha: f64, data: &'a Dataset, prior: PriorSpec) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        prior.validate(data.d())?;
        Ok(FractionalTarget { alpha, data, prior })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    /// `α·log L_n(θ) + log π(θ)`, `−∞` where the prior vanishes.
    pub fn log_target_unnorm(&self, theta: &Coefficients) -> Result<f64> {
        check_dim(self.data.d(), theta.dim())?;
        Ok(self.log_target_raw(theta.values()))
    }

    fn log_target_raw(&self, theta: &[f64]) -> f64 {
        let lp = self.prior.log_density(theta);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        self.alpha * log_likelihood_raw(self.data, theta) + lp
    }

    /// `α·∇log L_n(θ) + ∇log π(θ)`; refuses points on or outside the
    /// boundary of the prior support.
    pub fn grad_log_target(&self, theta: &Coefficients) -> Result<Vec<f64>> {
        check_dim(self.data.d(), theta.dim())?;
        let mut g = vec![0.0; theta.dim()];
        self.value_and_grad(theta.values(), &mut g).ok_or_else(|| {
            Error::Precondition("gradient requested outside the interior of the prior support".into())
        })?;
        Ok(g)
    }
}

impl LogDensity for FractionalTarget<'_> {
    fn dim(&self) -> usize {
        self.data.d()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_target_raw(x)
    }

    fn value_and_grad(&self, x: &[f64], grad: &mut [f64]) -> Option<f64> {
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        if !self.prior.is_interior_l1(l1) {
            return None;
        }
        let ll = log_likelihood_and_grad(self.data, x, grad);
        grad.iter_mut().for_each(|g| *g *= self.alpha);
        self.prior.add_grad(x, grad);
        Some(self.alpha * ll + self.prior.log_density(x))
    }
}

/// Coordinate-wise average of the retained draws, `θ̂ = ∫ θ π_{n,α}(dθ)`.
pub fn posterior_mean(samples: &SampleSet) -> Result<Coefficients> {
    mean_of(&samples.draws)
}

pub(crate) fn mean_of(draws: &[Vec<f64>]) -> Result<Coefficients> {
    let first = draws
        .first()
        .ok_or_else(|| Error::Precondition("posterior mean of an empty sample set".into()))?;
    let mut mean = vec![0.0; first.len()];
    for d in draws {
        check_dim(mean.len(), d.len())?;
        for (m, v) in mean.iter_mut().zip(d) {
            *m += v;
        }
    }
    let k = draws.len() as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    Ok(Coefficients::new(mean))
}
