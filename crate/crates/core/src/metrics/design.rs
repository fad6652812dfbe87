//! Moment statistics of the design: `K1 = 2E‖X‖`, `K2 = 4E‖X‖²`,
//! `G = E[XXᵀ]` and `λ_min(G)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{Coefficients, Dataset, DesignDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignStats {
    pub k1: f64,
    pub k2: f64,
    /// Second-moment matrix, row by row.
    pub g: Vec<Vec<f64>>,
    pub lambda_min: f64,
    /// Set when `G` was estimated from fewer rows than dimensions, in which
    /// case it is singular and `lambda_min` is 0 by construction.
    pub rank_deficient: bool,
}

impl DesignStats {
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let d = self.g.len();
        DMatrix::from_fn(d, d, |i, j| self.g[i][j])
    }
}

/// Statistics from the rows of a row-major `m × d` block.
pub fn design_stats_from_rows(x: &[f64], d: usize) -> Result<DesignStats> {
    if d == 0 || x.is_empty() || !x.len().is_multiple_of(d) {
        return Err(Error::Precondition("design block must be a non-empty m × d array".into()));
    }
    let m = x.len() / d;
    let (mut s1, mut s2) = (0.0, 0.0);
    let mut g = DMatrix::<f64>::zeros(d, d);
    for r in x.chunks_exact(d) {
        let sq: f64 = r.iter().map(|v| v * v).sum();
        s1 += sq.sqrt();
        s2 += sq;
        for i in 0..d {
            for j in i..d {
                g[(i, j)] += r[i] * r[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            g[(i, j)] /= m as f64;
            g[(j, i)] = g[(i, j)];
        }
    }
    let lambda_min = SymmetricEigen::new(g.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    Ok(DesignStats {
        k1: 2.0 * s1 / m as f64,
        k2: 4.0 * s2 / m as f64,
        g: (0..d).map(|i| g.row(i).iter().copied().collect()).collect(),
        lambda_min: if m < d { 0.0 } else { lambda_min },
        rank_deficient: m < d,
    })
}

/// Monte Carlo statistics of a design law.
pub fn design_stats_mc(design: &DesignDistribution, n_mc: usize, seed: u64) -> Result<DesignStats> {
    design.validate()?;
    let s = design.sample(n_mc, seed);
    design_stats_from_rows(&s.x, s.d)
}

/// Empirical statistics of a dataset's design matrix.
pub fn design_stats_dataset(data: &Dataset) -> Result<DesignStats> {
    let stats = design_stats_from_rows(data.x(), data.d())?;
    if stats.rank_deficient {
        log::warn!("n = {} < d = {}: empirical G is singular", data.n(), data.d());
    }
    Ok(stats)
}

/// `(θ − θ0)ᵀ G (θ − θ0)`.
pub fn weighted_param_error(theta: &Coefficients, theta0: &Coefficients, g: &[Vec<f64>]) -> Result<f64> {
    let diff = theta.sub(theta0)?;
    check_dim(diff.dim(), g.len())?;
    let v = diff.values();
    let mut q = 0.0;
    for (i, row) in g.iter().enumerate() {
        check_dim(v.len(), row.len())?;
        for (j, gij) in row.iter().enumerate() {
            q += v[i] * gij * v[j];
        }
    }
    Ok(q.max(0.0))
}
