//! Sparse Bayesian logistic regression under fractional posteriors.
//!
//! * [`model`]: logistic model, designs, data generation.
//! * [`priors`]: scaled Student and spike-and-slab priors.
//! * [`posterior`]: the tempered log target `α·ℓ_n(θ) + log π(θ)`.
//! * [`sampler`]: Langevin samplers for the target.
//! * [`metrics`]: divergences between laws, design statistics and
//!   compatibility numbers.
//! * [`risk`]: classification risks and margin fits.
//! * [`bounds`]: closed-form rates and bounds.
//! * [`harness`]: experiments over grids of sample sizes.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod model;
pub mod persist;
pub mod posterior;
pub mod priors;
pub mod risk;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use model::{Coefficients, Dataset, DesignDistribution, Generator, LabelModel};
pub use posterior::FractionalTarget;
pub use priors::PriorSpec;
pub use sampler::{SampleSet, SamplerConfig};
