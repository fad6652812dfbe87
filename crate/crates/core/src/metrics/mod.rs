//! Divergences between data laws, design statistics and compatibility
//! numbers.

pub mod compat;
pub mod design;
pub mod divergence;

pub use compat::{compatibility_numbers, phi1_from_gram, phi2_from_gram, weighted_gram, CompatibilityNumbers};
pub use design::{design_stats_dataset, design_stats_from_rows, design_stats_mc, weighted_param_error, DesignStats};
pub use divergence::{
    bernoulli_hellinger2, bernoulli_kl, bernoulli_renyi, bernoulli_tv, divergence_from_probs, joint_divergence_on_sample,
    joint_hellinger2_mc, joint_kl_mc, joint_renyi_mc, joint_tv_mc, model_probs, posterior_averaged, truth_probs,
    Divergence, DivergenceEstimate,
};
