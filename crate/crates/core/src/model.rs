//! Logistic observation model, likelihood quantities and synthetic data.
//!
//! Labels are `±1` and the conditional law is `P(Y = y | x) = σ(y·xᵀθ)`.
//! All logistic evaluations go through [`log_sigmoid`] / [`sigmoid`], which
//! branch on the sign of the argument so that nothing overflows for large
//! `|xᵀθ|`.

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng::{rng_from_seed, StreamRng};

/// `σ(t) = 1 / (1 + e^{-t})`.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `log σ(t)`, stable for all finite `t`.
#[inline]
pub fn log_sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        -(-t).exp().ln_1p()
    } else {
        t - t.exp().ln_1p()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// A coefficient vector. Support and sparsity are derived from the values,
/// so they can never disagree with them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coefficients(Vec<f64>);

impl Coefficients {
    pub fn new(values: Vec<f64>) -> Self {
        Coefficients(values)
    }

    pub fn zeros(d: usize) -> Self {
        Coefficients(vec![0.0; d])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// `‖θ‖₀`.
    pub fn s_star(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Coefficients(self.0.iter().map(|v| v * c).collect())
    }

    pub fn sub(&self, other: &Coefficients) -> Result<Coefficients> {
        check_dim(self.dim(), other.dim())?;
        Ok(Coefficients(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    /// `‖θ − other‖₂²`.
    pub fn sq_dist(&self, other: &Coefficients) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum())
    }
}

impl From<Vec<f64>> for Coefficients {
    fn from(v: Vec<f64>) -> Self {
        Coefficients(v)
    }
}

/// Law of the covariate vector `X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignKind {
    /// `N(0, σ² I_d)`.
    Gaussian { sigma2: f64 },
    /// Uniform on the unit sphere `S^{d-1}`.
    UniformSphere,
    /// Degenerate law at a fixed point. Test hook for two-point closed forms.
    PointMass { point: Vec<f64> },
    /// Uniform over a finite list of points. Test hook for exhaustive averages.
    Grid { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDistribution {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: DesignKind,
}

impl DesignDistribution {
    pub fn gaussian(dim: usize, sigma2: f64) -> Result<Self> {
        let d = DesignDistribution {
            dim,
            kind: DesignKind::Gaussian { sigma2 },
        };
        d.validate()?;
        Ok(d)
    }

    /// `N(0, I/d)`, so that `E‖X‖² = 1`.
    pub fn default_gaussian(dim: usize) -> Self {
        DesignDistribution {
            dim,
            kind: DesignKind::Gaussian {
                sigma2: 1.0 / dim as f64,
            },
        }
    }

    pub fn uniform_sphere(dim: usize) -> Self {
        DesignDistribution {
            dim,
            kind: DesignKind::UniformSphere,
        }
    }

    pub fn point_mass(point: Vec<f64>) -> Self {
        DesignDistribution {
            dim: point.len(),
            kind: DesignKind::PointMass { point },
        }
    }

    pub fn grid(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(|p| p.len()).unwrap_or(0);
        let d = DesignDistribution {
            dim,
            kind: DesignKind::Grid { points },
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidConfig("design dimension must be ≥ 1".into()));
        }
        match &self.kind {
            DesignKind::Gaussian { sigma2 } => {
                if !(*sigma2 > 0.0 && sigma2.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "gaussian design needs σ² > 0, got {sigma2}"
                    )));
                }
            }
            DesignKind::UniformSphere => {}
            DesignKind::PointMass { point } => check_dim(self.dim, point.len())?,
            DesignKind::Grid { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidConfig("grid design needs points".into()));
                }
                for p in points {
                    check_dim(self.dim, p.len())?;
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DesignKind::Gaussian { sigma2 } => format!("gaussian(sigma2={sigma2})"),
            DesignKind::UniformSphere => "uniform_sphere".into(),
            DesignKind::PointMass { .. } => "point_mass".into(),
            DesignKind::Grid { points } => format!("grid({})", points.len()),
        }
    }

    /// Draw one covariate vector into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            DesignKind::Gaussian { sigma2 } => {
                let s = sigma2.sqrt();
                for v in out.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = s * z;
                }
            }
            DesignKind::UniformSphere => loop {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    out.iter_mut().for_each(|v| *v /= norm);
                    break;
                }
            },
            DesignKind::PointMass { point } => out.copy_from_slice(point),
            DesignKind::Grid { points } => {
                let k = rng.random_range(0..points.len());
                out.copy_from_slice(&points[k]);
            }
        }
    }

    /// Draw `m` covariate vectors as a row-major `m × d` sample.
    pub fn sample(&self, m: usize, seed: u64) -> DesignSample {
        let mut rng = rng_from_seed(seed);
        self.sample_with(m, &mut rng)
    }

    pub fn sample_with(&self, m: usize, rng: &mut StreamRng) -> DesignSample {
        let d = self.dim;
        let mut x = vec![0.0; m * d];
        for row in x.chunks_exact_mut(d) {
            self.sample_into(rng, row);
        }
        DesignSample { x, m, d }
    }
}

/// A row-major `m × d` block of covariate draws.
#[derive(Debug, Clone)]
pub struct DesignSample {
    pub x: Vec<f64>,
    pub m: usize,
    pub d: usize,
}

impl DesignSample {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.x.chunks_exact(self.d)
    }

    /// `Xθ` over all rows.
    pub fn scores(&self, theta: &[f64]) -> Vec<f64> {
        self.rows().map(|r| dot(r, theta)).collect()
    }
}

/// Link between the linear score `xᵀθ0` and `P(Y = +1 | x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelModel {
    Logistic,
    /// `Φ(scale · t)`.
    Probit { scale: f64 },
    /// Logistic labels flipped independently with probability `rate`.
    LabelFlip { rate: f64 },
}

impl LabelModel {
    /// Probit scale under which `Φ(scale·t)` tracks `σ(t)` (`σ(1.702 z) ≈ Φ(z)`).
    pub const MATCHED_PROBIT_SCALE: f64 = 1.0 / 1.702;

    pub fn prob_pos(&self, score: f64) -> f64 {
        match *self {
            LabelModel::Logistic => sigmoid(score),
            LabelModel::Probit { scale } => normal_cdf(scale * score),
            LabelModel::LabelFlip { rate } => {
                let p = sigmoid(score);
                (1.0 - rate) * p + rate * (1.0 - p)
            }
        }
    }

    pub fn is_logistic(&self) -> bool {
        matches!(self, LabelModel::Logistic)
    }
}

/// The data-generating law of `Y | X`: a coefficient vector and a link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub theta0: Coefficients,
    pub link: LabelModel,
}

impl Generator {
    pub fn logistic(theta0: Coefficients) -> Self {
        Generator {
            theta0,
            link: LabelModel::Logistic,
        }
    }

    pub fn prob_pos(&self, x: &[f64]) -> f64 {
        self.link.prob_pos(dot(x, self.theta0.values()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub design: DesignDistribution,
    pub theta0: Coefficients,
    pub link: LabelModel,
    pub seed: u64,
}

/// Design matrix (row-major `n × d`) and `±1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<i8>,
    n: usize,
    d: usize,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<i8>, d: usize, meta: DatasetMeta) -> Result<Self> {
        let n = y.len();
        if n < 1 {
            return Err(Error::InvalidConfig("dataset needs n ≥ 1".into()));
        }
        if d < 2 {
            return Err(Error::InvalidConfig("dataset needs d ≥ 2".into()));
        }
        check_dim(n * d, x.len())?;
        if let Some(bad) = y.iter().find(|v| **v != 1 && **v != -1) {
            return Err(Error::InvalidConfig(format!("label {bad} is not ±1")));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite design entry".into()));
        }
        Ok(Dataset { x, y, n, d, meta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn labels(&self) -> &[i8] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.x.chunks_exact(self.d)
    }

    /// `Xθ`.
    pub fn scores(&self, theta: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.d, theta.len())?;
        Ok(self.rows().map(|r| dot(r, theta)).collect())
    }

    /// SHA-256 over the raw design and labels; identifies the data a
    /// sample set was drawn against.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        h.update((self.d as u64).to_le_bytes());
        for v in &self.x {
            h.update(v.to_le_bytes());
        }
        for v in &self.y {
            h.update(v.to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// `P(Y = y | x, θ) = σ(y·xᵀθ)`.
pub fn conditional_prob(theta: &Coefficients, x: &[f64], y: i8) -> Result<f64> {
    check_dim(theta.dim(), x.len())?;
    Ok(sigmoid(f64::from(y) * dot(x, theta.values())))
}

/// `Σ_i log σ(y_i x_iᵀθ)`.
pub fn log_likelihood(theta: &Coefficients, data: &Dataset) -> Result<f64> {
    check_dim(data.d, theta.dim())?;
    Ok(log_likelihood_raw(data, theta.values()))
}

pub(crate) fn log_likelihood_raw(data: &Dataset, theta: &[f64]) -> f64 {
    data.rows()
        .zip(&data.y)
        .map(|(r, &y)| log_sigmoid(f64::from(y) * dot(r, theta)))
        .sum()
}

/// `r_n(θ, θ0) = Σ_i log(p_{θ0}(Z_i) / p_θ(Z_i))`.
pub fn neg_log_lik_ratio(theta: &Coefficients, theta0: &Coefficients, data: &Dataset) -> Result<f64> {
    Ok(log_likelihood(theta0, data)? - log_likelihood(theta, data)?)
}

/// `Σ_i y_i x_i (1 − σ(y_i x_iᵀθ))`.
pub fn grad_log_likelihood(theta: &Coefficients, data: &Dataset) -> Result<Vec<f64>> {
    check_dim(data.d, theta.dim())?;
    let mut g = vec![0.0; data.d];
    log_likelihood_and_grad(data, theta.values(), &mut g);
    Ok(g)
}

/// Log-likelihood and its gradient in one pass; `grad` is overwritten.
pub(crate) fn log_likelihood_and_grad(data: &Dataset, theta: &[f64], grad: &mut [f64]) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut ll = 0.0;
    for (r, &y) in data.rows().zip(&data.y) {
        let yf = f64::from(y);
        let t = yf * dot(r, theta);
        // 1 − σ(t) = σ(−t); log σ(t) shares the exponential.
        let (log_s, one_minus) = if t >= 0.0 {
            let e = (-t).exp();
            (-e.ln_1p(), e / (1.0 + e))
        } else {
            let e = t.exp();
            (t - e.ln_1p(), 1.0 / (1.0 + e))
        };
        ll += log_s;
        let w = yf * one_minus;
        for (g, xv) in grad.iter_mut().zip(r) {
            *g += w * xv;
        }
    }
    ll
}

/// Random sparse truth: `s_star` coordinates chosen uniformly, each set to
/// `±magnitude` with a random sign.
pub fn generate_theta0(d: usize, s_star: usize, magnitude: f64, seed: u64) -> Result<Coefficients> {
    if s_star < 1 || s_star > d {
        return Err(Error::Precondition(format!(
            "need 1 ≤ s* ≤ d, got s* = {s_star}, d = {d}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mut values = vec![0.0; d];
    let mut idx = sample_indices(&mut rng, d, s_star).into_vec();
    idx.sort_unstable();
    for i in idx {
        values[i] = if rng.random::<bool>() { magnitude } else { -magnitude };
    }
    Ok(Coefficients(values))
}

/// `n` i.i.d. draws from the design with logistic labels.
pub fn generate_dataset(
    theta0: &Coefficients,
    n: usize,
    design: &DesignDistribution,
    seed: u64,
) -> Result<Dataset> {
    generate_dataset_with(&Generator::logistic(theta0.clone()), n, design, seed)
}

/// `n` i.i.d. draws `(x_i, y_i)` with `P(y_i = +1 | x_i)` given by `generator`.
pub fn generate_dataset_with(
    generator: &Generator,
    n: usize,
    design: &DesignDistribution,
    seed: u64,
) -> Result<Dataset> {
    design.validate()?;
    check_dim(design.dim, generator.theta0.dim())?;
    if n < 1 {
        return Err(Error::Precondition("need n ≥ 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let d = design.dim;
    let mut x = vec![0.0; n * d];
    let mut y = Vec::with_capacity(n);
    for row in x.chunks_exact_mut(d) {
        design.sample_into(&mut rng, row);
        let p = generator.prob_pos(row);
        let u: f64 = rng.random();
        y.push(if u < p { 1 } else { -1 });
    }
    Dataset::new(
        x,
        y,
        d,
        DatasetMeta {
            design: design.clone(),
            theta0: generator.theta0.clone(),
            link: generator.link,
            seed,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use proptest::prelude::*;

    fn meta(d: usize) -> DatasetMeta {
        DatasetMeta {
            design: DesignDistribution::default_gaussian(d),
            theta0: Coefficients::zeros(d),
            link: LabelModel::Logistic,
            seed: 0,
        }
    }

    fn one_point(x: Vec<f64>, y: i8) -> Dataset {
        let d = x.len();
        Dataset::new(x, vec![y], d, meta(d)).unwrap()
    }

    #[test]
    fn conditional_prob_examples() {
        let theta = Coefficients::new(vec![3f64.ln(), 0.0]);
        let x = [1.0, 5.0];
        assert_relative_eq!(conditional_prob(&Coefficients::zeros(2), &x, 1).unwrap(), 0.5);
        assert_relative_eq!(conditional_prob(&theta, &x, 1).unwrap(), 0.75, epsilon = 1e-15);
        assert_relative_eq!(conditional_prob(&theta, &x, -1).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn logistic_is_overflow_safe() {
        assert_eq!(sigmoid(800.0), 1.0);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert_relative_eq!(log_sigmoid(-800.0), -800.0);
        assert_eq!(log_sigmoid(800.0), 0.0);
        assert!(log_sigmoid(-1e308).is_finite());
    }

    #[test]
    fn log_likelihood_examples() {
        let data = generate_dataset(
            &Coefficients::new(vec![1.0, -1.0, 0.0]),
            37,
            &DesignDistribution::default_gaussian(3),
            1,
        )
        .unwrap();
        let ll0 = log_likelihood(&Coefficients::zeros(3), &data).unwrap();
        assert_relative_eq!(ll0, 37.0 * 0.5f64.ln(), epsilon = 1e-12);

        let single = one_point(vec![3f64.ln(), 0.0], 1);
        let ll = log_likelihood(&Coefficients::new(vec![1.0, 7.0]), &single).unwrap();
        assert_relative_eq!(ll, -0.287_682_072_451_780_9, epsilon = 1e-12);

        assert!(matches!(
            log_likelihood(&Coefficients::zeros(2), &data),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_small_cases() {
        let single = one_point(vec![2.0, -4.0], -1);
        let g = grad_log_likelihood(&Coefficients::zeros(2), &single).unwrap();
        assert_eq!(g, vec![-1.0, 2.0]);

        let x = vec![0.3, -1.2, 0.7, 0.3, -1.2, 0.7];
        let balanced = Dataset::new(x, vec![1, -1], 3, meta(3)).unwrap();
        let g = grad_log_likelihood(&Coefficients::zeros(3), &balanced).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn theta0_generation() {
        let dense = generate_theta0(5, 5, 1.0, 3).unwrap();
        assert_eq!(dense.s_star(), 5);
        assert_relative_eq!(dense.l1_norm(), 5.0);
        let sparse = generate_theta0(50, 3, 1.0, 3).unwrap();
        assert_eq!(sparse.s_star(), 3);
        assert_eq!(sparse, generate_theta0(50, 3, 1.0, 3).unwrap());
        assert!(generate_theta0(4, 5, 1.0, 3).is_err());
        assert!(generate_theta0(4, 0, 1.0, 3).is_err());
    }

    #[test]
    fn coin_flip_labels_at_zero_truth() {
        let data = generate_dataset(
            &Coefficients::zeros(4),
            10_000,
            &DesignDistribution::default_gaussian(4),
            11,
        )
        .unwrap();
        let pos = data.labels().iter().filter(|y| **y == 1).count() as f64 / 1e4;
        assert!((pos - 0.5).abs() < 0.02, "{pos}");
    }

    #[test]
    fn sphere_rows_have_unit_norm() {
        let data = generate_dataset(
            &Coefficients::zeros(6),
            500,
            &DesignDistribution::uniform_sphere(6),
            2,
        )
        .unwrap();
        for r in data.rows() {
            let norm = dot(r, r).sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_row_norms_near_one() {
        // E‖X‖ for N(0, I/d) is sqrt(2/d)·Γ((d+1)/2)/Γ(d/2) ≈ 0.995 at d = 50.
        let data = generate_dataset(
            &Coefficients::zeros(50),
            10_000,
            &DesignDistribution::default_gaussian(50),
            5,
        )
        .unwrap();
        let mean = data.rows().map(|r| dot(r, r).sqrt()).sum::<f64>() / 1e4;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn invalid_datasets_are_refused() {
        assert!(Dataset::new(vec![1.0, 2.0], vec![0], 2, meta(2)).is_err());
        assert!(Dataset::new(vec![1.0], vec![1], 1, meta(1)).is_err());
        assert!(Dataset::new(vec![], vec![], 2, meta(2)).is_err());
        assert!(DesignDistribution::gaussian(3, 0.0).is_err());
    }

    fn fd_grad(data: &Dataset, theta: &[f64]) -> Vec<f64> {
        // 5-point central stencil
        let mut out = vec![0.0; theta.len()];
        for j in 0..theta.len() {
            let h = 1e-3 * (1.0 + theta[j].abs());
            let f = |delta: f64| {
                let mut t = theta.to_vec();
                t[j] += delta;
                log_likelihood_raw(data, &t)
            };
            out[j] = (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn probabilities_sum_to_one(t in -50.0f64..50.0) {
            let theta = Coefficients::new(vec![t, 0.0]);
            let p = conditional_prob(&theta, &[1.0, 0.0], 1).unwrap()
                + conditional_prob(&theta, &[1.0, 0.0], -1).unwrap();
            prop_assert!((p - 1.0).abs() < 1e-14);
        }

        #[test]
        fn sigmoid_monotone(a in -40.0f64..40.0, b in -40.0f64..40.0) {
            prop_assume!(a < b - 1e-9);
            prop_assert!(sigmoid(a) <= sigmoid(b));
            prop_assert!(log_sigmoid(a) < log_sigmoid(b));
        }

        #[test]
        fn ratio_antisymmetry_and_lipschitz(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let d = 6;
            let data = generate_dataset(
                &generate_theta0(d, 2, 1.0, seed).unwrap(), 40,
                &DesignDistribution::default_gaussian(d), seed).unwrap();
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let (a, b) = (Coefficients::new(a), Coefficients::new(b));
            let rab = neg_log_lik_ratio(&a, &b, &data).unwrap();
            let rba = neg_log_lik_ratio(&b, &a, &data).unwrap();
            prop_assert!((rab + rba).abs() < 1e-9);
            prop_assert_eq!(neg_log_lik_ratio(&a, &a, &data).unwrap(), 0.0);
            let lip: f64 = data.rows().map(|r| 2.0 * dot(r, r).sqrt()).sum::<f64>()
                * a.sq_dist(&b).unwrap().sqrt();
            prop_assert!(rab.abs() <= lip);
        }

        #[test]
        fn complement_identity(seed in 0u64..1000) {
            let d = 4;
            let data = generate_dataset(
                &generate_theta0(d, 2, 1.5, seed).unwrap(), 25,
                &DesignDistribution::default_gaussian(d), seed + 1).unwrap();
            let theta = generate_theta0(d, 3, 2.0, seed + 2).unwrap();
            let s = data.scores(theta.values()).unwrap();
            let lhs: f64 = s.iter().zip(data.labels())
                .map(|(t, &y)| log_sigmoid(f64::from(y) * t) + log_sigmoid(-f64::from(y) * t))
                .sum();
            let rhs: f64 = s.iter().map(|t| (sigmoid(*t) * (1.0 - sigmoid(*t))).ln()).sum();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
        }

        #[test]
        fn gradient_matches_finite_differences(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let d = 5;
            let data = generate_dataset(
                &generate_theta0(d, 2, 1.0, seed).unwrap(), 30,
                &DesignDistribution::default_gaussian(d), seed).unwrap();
            let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let g = grad_log_likelihood(&Coefficients::new(theta.clone()), &data).unwrap();
            let fd = fd_grad(&data, &theta);
            let num: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = fd.iter().map(|b| b * b).sum::<f64>().sqrt().max(1e-8);
            prop_assert!(num / den <= 1e-6, "rel err {}", num / den);
        }
    }
}
