//! Classification risk of linear rules and the margin condition.
//!
//! The plug-in rule of `θ` is `sign(xᵀθ)` with ties sent to `+1`. The Bayes
//! rule of the truth predicts `+1` exactly when `P_true(+1|x) ≥ ½`, which
//! for a logistic truth coincides with the plug-in rule of `θ0`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{dot, sigmoid, Coefficients, DesignDistribution, DesignSample, Generator};

/// A Monte Carlo risk estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_mc: usize,
}

/// Constants of the margin condition `P(|p(X) − ½| ≤ h) ≤ C·h^γ` for
/// `h ≤ h*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginParams {
    pub c: f64,
    pub gamma: f64,
    pub h_star: f64,
}

/// Largest grid value considered for `h*`.
pub const MARGIN_FIT_MAX_H: f64 = 0.4;
/// Largest absolute log-residual tolerated in the margin fit.
pub const MARGIN_FIT_TOLERANCE: f64 = 0.05;
/// Fewest curve points a margin fit may use.
pub const MARGIN_FIT_MIN_POINTS: usize = 5;

pub fn plug_in_classifier(theta: &[f64], x: &[f64]) -> i8 {
    if dot(x, theta) >= 0.0 {
        1
    } else {
        -1
    }
}

fn bayes_label(p_true: f64) -> i8 {
    if p_true >= 0.5 {
        1
    } else {
        -1
    }
}

fn estimate(values: impl ExactSizeIterator<Item = f64>) -> RiskEstimate {
    let m = values.len();
    let (mut mean, mut m2) = (0.0, 0.0);
    for (k, v) in values.enumerate() {
        let delta = v - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (v - mean);
    }
    let sd = if m > 1 { (m2 / (m - 1) as f64).sqrt() } else { 0.0 };
    RiskEstimate { value: mean, std_error: sd / (m as f64).sqrt(), n_mc: m }
}

fn check_sample(sample: &DesignSample, p_true: &[f64]) -> Result<()> {
    check_dim(sample.m, p_true.len())?;
    if sample.m == 0 {
        return Err(Error::Precondition("risk needs at least one design draw".into()));
    }
    Ok(())
}

/// `P(Y ≠ η(X))` on a design sample with truth probabilities `p_true`.
pub fn misclassification_risk_on_sample(
    classifier: impl Fn(&[f64]) -> i8,
    p_true: &[f64],
    sample: &DesignSample,
) -> Result<RiskEstimate> {
    check_sample(sample, p_true)?;
    Ok(estimate(
        sample
            .rows()
            .zip(p_true)
            .map(|(x, q)| if classifier(x) == 1 { 1.0 - q } else { *q }),
    ))
}

/// Excess risk of the plug-in rule of `theta` via
/// `E[|2p(X) − 1| · 1{η_θ(X) ≠ η*(X)}]`.
pub fn excess_risk_on_sample(theta: &[f64], p_true: &[f64], sample: &DesignSample) -> Result<RiskEstimate> {
    check_sample(sample, p_true)?;
    check_dim(sample.d, theta.len())?;
    Ok(estimate(sample.rows().zip(p_true).map(|(x, q)| {
        if plug_in_classifier(theta, x) != bayes_label(*q) {
            (2.0 * q - 1.0).abs()
        } else {
            0.0
        }
    })))
}

/// `E[p(1 − p_θ) + (1 − p)p_θ]`: risk of predicting `+1` with probability
/// `p_θ(x)`.
pub fn randomized_risk_on_sample(theta: &[f64], p_true: &[f64], sample: &DesignSample) -> Result<RiskEstimate> {
    check_sample(sample, p_true)?;
    check_dim(sample.d, theta.len())?;
    Ok(estimate(sample.rows().zip(p_true).map(|(x, q)| {
        let p = sigmoid(dot(x, theta));
        q * (1.0 - p) + (1.0 - q) * p
    })))
}

fn logistic_sample(
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<(DesignSample, Vec<f64>)> {
    design.validate()?;
    check_dim(design.dim, theta0.dim())?;
    let sample = design.sample(n_mc, seed);
    let g = Generator::logistic(theta0.clone());
    let p: Vec<f64> = sample.rows().map(|x| g.prob_pos(x)).collect();
    Ok((sample, p))
}

/// Risk of an arbitrary classifier under the logistic law at `theta0`.
pub fn misclassification_risk_mc(
    classifier: impl Fn(&[f64]) -> i8,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let (sample, p) = logistic_sample(theta0, design, n_mc, seed)?;
    misclassification_risk_on_sample(classifier, &p, &sample)
}

pub fn excess_risk_mc(
    theta: &Coefficients,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let (sample, p) = logistic_sample(theta0, design, n_mc, seed)?;
    excess_risk_on_sample(theta.values(), &p, &sample)
}

pub fn randomized_classifier_risk_mc(
    theta: &Coefficients,
    theta0: &Coefficients,
    design: &DesignDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let (sample, p) = logistic_sample(theta0, design, n_mc, seed)?;
    randomized_risk_on_sample(theta.values(), &p, &sample)
}

/// Empirical `P(|σ(Xᵀθ0) − ½| ≤ h)` over `h_grid`.
pub fn margin_curve(
    theta0: &Coefficients,
    design: &DesignDistribution,
    h_grid: &[f64],
    n_mc: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if let Some(h) = h_grid.iter().find(|h| !(**h > 0.0 && **h < 0.5)) {
        return Err(Error::Precondition(format!("margin grid values must lie in (0, ½), got {h}")));
    }
    let (_, p) = logistic_sample(theta0, design, n_mc, seed)?;
    let mut gaps: Vec<f64> = p.iter().map(|q| (q - 0.5).abs()).collect();
    gaps.sort_by(f64::total_cmp);
    Ok(h_grid
        .iter()
        .map(|&h| {
            let below = gaps.partition_point(|g| *g <= h);
            (h, below as f64 / n_mc as f64)
        })
        .collect())
}

/// Least-squares fit `log P = log C + γ log h` over `h ≤ h*`, with `h*` the
/// largest grid value below [`MARGIN_FIT_MAX_H`] whose fit keeps every
/// absolute log-residual within [`MARGIN_FIT_TOLERANCE`]. When no range
/// meets the tolerance the smallest [`MARGIN_FIT_MIN_POINTS`] points are
/// used.
pub fn fit_gamma(curve: &[(f64, f64)]) -> Result<MarginParams> {
    let mut pts: Vec<(f64, f64)> = curve
        .iter()
        .copied()
        .filter(|(h, p)| *p > 0.0 && *h > 0.0 && *h < MARGIN_FIT_MAX_H)
        .collect();
    if curve.iter().all(|(_, p)| *p <= 0.0) {
        return Err(Error::Numerical("margin curve is identically zero on the grid".into()));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < MARGIN_FIT_MIN_POINTS {
        return Err(Error::Precondition(format!(
            "margin fit needs ≥ {MARGIN_FIT_MIN_POINTS} positive points below h = {MARGIN_FIT_MAX_H}, got {}",
            pts.len()
        )));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|(h, p)| (h.ln(), p.ln())).collect();
    let mut chosen = None;
    for k in (MARGIN_FIT_MIN_POINTS..=logs.len()).rev() {
        let (a, b, max_res) = line_fit(&logs[..k]);
        if max_res <= MARGIN_FIT_TOLERANCE {
            chosen = Some((k, a, b));
            break;
        }
    }
    let (k, a, b) = chosen.unwrap_or_else(|| {
        let (a, b, _) = line_fit(&logs[..MARGIN_FIT_MIN_POINTS]);
        (MARGIN_FIT_MIN_POINTS, a, b)
    });
    Ok(MarginParams { c: a.exp(), gamma: b.max(0.0), h_star: pts[k - 1].0 })
}

/// Ordinary least squares `y = a + b·x`; returns `(a, b, max |residual|)`.
pub(crate) fn line_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let max_res = pts.iter().map(|(x, y)| (y - a - b * x).abs()).fold(0.0, f64::max);
    (a, b, max_res)
}
