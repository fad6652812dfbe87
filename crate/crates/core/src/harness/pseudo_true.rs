//! KL projection of a data-generating law onto the logistic family.
//!
//! On a design sample with truth probabilities `q_i`, minimizing
//! `KL(P_true ‖ P_θ)` over `θ` is the convex soft-label logistic problem
//! `min_θ (1/m) Σ_i −q_i log σ(x_iᵀθ) − (1 − q_i) log σ(−x_iᵀθ)`. It is
//! solved from several starts by damped Newton iterations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{dot, log_sigmoid, sigmoid, Coefficients, DesignSample, Generator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoTrue {
    pub theta: Coefficients,
    /// `KL(P_true ‖ P_θ*)` on the fitting sample.
    pub kl: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

struct SoftLabelLoss<'a> {
    sample: &'a DesignSample,
    q: Vec<f64>,
    entropy: f64,
}

impl SoftLabelLoss<'_> {
    fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut f = 0.0;
        for (x, q) in self.sample.rows().zip(&self.q) {
            let s = dot(x, theta);
            f -= q * log_sigmoid(s) + (1.0 - q) * log_sigmoid(-s);
            let r = sigmoid(s) - q;
            for (g, xv) in grad.iter_mut().zip(x) {
                *g += r * xv;
            }
        }
        let m = self.sample.m as f64;
        grad.iter_mut().for_each(|g| *g /= m);
        f / m
    }

    #[cfg(test)]
    fn value(&self, theta: &[f64]) -> f64 {
        let mut f = 0.0;
        for (x, q) in self.sample.rows().zip(&self.q) {
            let s = dot(x, theta);
            f -= q * log_sigmoid(s) + (1.0 - q) * log_sigmoid(-s);
        }
        f / self.sample.m as f64
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

impl SoftLabelLoss<'_> {
    /// Hessian `(1/m) Σ σ'(x_iᵀθ) x_i x_iᵀ`.
    fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let d = theta.len();
        let mut h = DMatrix::zeros(d, d);
        for x in self.sample.rows() {
            let p = sigmoid(dot(x, theta));
            let w = p * (1.0 - p);
            for a in 0..d {
                for b in 0..=a {
                    h[(a, b)] += w * x[a] * x[b];
                }
            }
        }
        let m = self.sample.m as f64;
        for a in 0..d {
            for b in 0..=a {
                h[(a, b)] /= m;
                h[(b, a)] = h[(a, b)];
            }
        }
        h
    }
}

/// Damped Newton from `start` with Armijo backtracking; returns
/// `(θ, f, ‖∇f‖, iters)`.
fn newton(loss: &SoftLabelLoss<'_>, start: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, f64, f64, usize) {
    let d = start.len();
    let mut x = start.to_vec();
    let mut g = vec![0.0; d];
    let mut f = loss.value_grad(&x, &mut g);
    for it in 0..max_iter {
        let gn = norm(&g);
        if gn < tol || !f.is_finite() {
            return (x, f, gn, it);
        }
        let mut h = loss.hessian(&x);
        // ridge keeps the solve defined on flat directions
        let ridge = 1e-12 * (1.0 + h.diagonal().max());
        for a in 0..d {
            h[(a, a)] += ridge;
        }
        let dir = match h.cholesky() {
            Some(ch) => ch.solve(&DVector::from_column_slice(&g)),
            None => DVector::from_column_slice(&g),
        };
        let slope = -dir.dot(&DVector::from_column_slice(&g));
        // Armijo, or a smaller gradient once decreases fall below rounding
        let mut step = 1.0;
        let mut g_next = vec![0.0; d];
        loop {
            let next: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, p)| a - step * p).collect();
            let f_next = loss.value_grad(&next, &mut g_next);
            if f_next <= f + 1e-4 * step * slope || (f_next <= f + 1e-12 * f.abs() && norm(&g_next) < gn) {
                x = next;
                f = f_next;
                std::mem::swap(&mut g, &mut g_next);
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                return (x, f, gn, it);
            }
        }
    }
    let gn = norm(&g);
    (x, f, gn, max_iter)
}

/// `θ* = argmin_θ KL(P_true ‖ P_θ)` over the design sample, from the
/// truth's coefficients, the origin and the extra `starts`.
pub fn pseudo_true_parameter(
    generator: &Generator,
    sample: &DesignSample,
    starts: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> Result<PseudoTrue> {
    let d = sample.d;
    check_dim(d, generator.theta0.dim())?;
    let q: Vec<f64> = sample.rows().map(|x| generator.prob_pos(x)).collect();
    let entropy = q
        .iter()
        .map(|p| {
            let h = |a: f64| if a > 0.0 { -a * a.ln() } else { 0.0 };
            h(*p) + h(1.0 - p)
        })
        .sum::<f64>()
        / sample.m as f64;
    let loss = SoftLabelLoss { sample, q, entropy };

    let mut all = vec![generator.theta0.values().to_vec(), vec![0.0; d]];
    for s in starts {
        check_dim(d, s.len())?;
        all.push(s.clone());
    }
    let mut best: Option<PseudoTrue> = None;
    for s in &all {
        let (theta, f, gn, iters) = newton(&loss, s, tol, max_iter);
        if gn >= tol {
            continue;
        }
        let cand = PseudoTrue { theta: Coefficients::new(theta), kl: (f - loss.entropy).max(0.0), grad_norm: gn, iterations: iters };
        if best.as_ref().is_none_or(|b| cand.kl < b.kl) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| {
        Error::Numerical(format!("KL minimization did not reach gradient norm {tol:e} within {max_iter} iterations"))
    })
}
