//! Compatibility numbers of a weighted design,
//!
//! `φ1(s) = inf_{0<‖θ‖₀≤s} ‖W0Xθ‖²·‖θ‖₀ / ‖θ‖₁²` and
//! `φ2(s) = inf_{0<‖θ‖₀≤s} ‖W0Xθ‖² / ‖θ‖₂²`,
//!
//! with `W0 = diag(√(σ(x_iᵀθ0)(1 − σ(x_iᵀθ0))))`, the logistic information
//! weights at the truth.
//!
//! Both are computed exactly by enumeration, so `d` is capped at
//! [`MAX_COMPAT_DIM`]. With `M = (W0X)ᵀ(W0X)`:
//!
//! * `φ2` is the smallest eigenvalue of `M_SS` over supports `|S| = s`
//!   (eigenvalue interlacing covers the smaller supports).
//! * For `φ1`, on a support `T` and sign pattern `σ` the problem is
//!   `min θᵀM_Tθ` subject to `σᵀθ = 1` inside the orthant, with value
//!   `1/(σᵀM_T⁻¹σ)` when the minimizer `M_T⁻¹σ` has signs `σ`. Otherwise the
//!   infimum sits on a face, which is a smaller support and is enumerated
//!   separately.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{dot, sigmoid, Coefficients};

pub const MAX_COMPAT_DIM: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityNumbers {
    pub phi1: f64,
    pub phi2: f64,
}

/// `M = (W0X)ᵀ(W0X)` for a row-major `n × d` design.
pub fn weighted_gram(x: &[f64], d: usize, theta0: &Coefficients) -> Result<DMatrix<f64>> {
    check_dim(d, theta0.dim())?;
    if d == 0 || x.is_empty() || !x.len().is_multiple_of(d) {
        return Err(Error::Precondition("design must be a non-empty n × d array".into()));
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    for r in x.chunks_exact(d) {
        let p = sigmoid(dot(r, theta0.values()));
        let w2 = p * (1.0 - p);
        for i in 0..d {
            for j in i..d {
                m[(i, j)] += w2 * r[i] * r[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    Ok(m)
}

fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

/// Calls `f` on every `k`-subset of `0..d`, in lexicographic order.
fn for_each_subset(d: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > d {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == d - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn lambda_min(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `φ2(s)` from a precomputed Gram matrix.
pub fn phi2_from_gram(m: &DMatrix<f64>, s: usize) -> Result<f64> {
    let d = check_square(m, s)?;
    let mut best = f64::INFINITY;
    for_each_subset(d, s, |idx| best = best.min(lambda_min(&submatrix(m, idx))));
    Ok(best.max(0.0))
}

/// `φ1(s)` from a precomputed Gram matrix.
pub fn phi1_from_gram(m: &DMatrix<f64>, s: usize) -> Result<f64> {
    let d = check_square(m, s)?;
    let mut best = f64::INFINITY;
    for k in 1..=s {
        for_each_subset(d, k, |idx| {
            let mt = submatrix(m, idx);
            if lambda_min(&mt) <= 1e-14 * mt.amax().max(1.0) {
                // a null direction inside the support drives the ratio to 0
                best = 0.0;
                return;
            }
            let Some(inv) = mt.clone().cholesky().map(|c| c.inverse()) else {
                best = 0.0;
                return;
            };
            // sign patterns up to a global flip
            for mask in 0u32..(1u32 << (k - 1)) {
                let sigma = DVector::from_fn(k, |i, _| if i > 0 && mask >> (i - 1) & 1 == 1 { -1.0 } else { 1.0 });
                let v = &inv * &sigma;
                if v.iter().zip(sigma.iter()).all(|(a, b)| a * b > 0.0) {
                    let q = sigma.dot(&v);
                    best = best.min(k as f64 / q);
                }
            }
        });
    }
    Ok(best.max(0.0))
}

fn check_square(m: &DMatrix<f64>, s: usize) -> Result<usize> {
    let d = m.nrows();
    if m.ncols() != d {
        return Err(Error::Precondition("Gram matrix must be square".into()));
    }
    if d > MAX_COMPAT_DIM {
        return Err(Error::Precondition(format!(
            "compatibility numbers are enumerated exactly and need d ≤ {MAX_COMPAT_DIM}, got {d}"
        )));
    }
    if s < 1 || s > d {
        return Err(Error::Precondition(format!("need 1 ≤ s ≤ d, got s = {s}, d = {d}")));
    }
    Ok(d)
}

/// `(φ1(s), φ2(s))` for the design `x` (row-major `n × d`) weighted at `theta0`.
pub fn compatibility_numbers(x: &[f64], d: usize, theta0: &Coefficients, s: usize) -> Result<CompatibilityNumbers> {
    if d > MAX_COMPAT_DIM {
        return Err(Error::Precondition(format!(
            "compatibility numbers are enumerated exactly and need d ≤ {MAX_COMPAT_DIM}, got {d}"
        )));
    }
    let m = weighted_gram(x, d, theta0)?;
    Ok(CompatibilityNumbers { phi1: phi1_from_gram(&m, s)?, phi2: phi2_from_gram(&m, s)? })
}
