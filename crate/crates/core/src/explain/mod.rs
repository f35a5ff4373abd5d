//! Explainability artifacts for trained models.

mod hidden;
mod lda;
mod relevance;

pub use hidden::{hidden_activation_diff, HiddenDiff};
pub use lda::{fisher_lda, lda_separability, FeatureMode, LdaFit, Projection, SeparabilityReport};
pub use relevance::{
    average_relevance, global_relevance, local_relevance, prm_profile, AttributionMap,
    ClassFilter, Normalization, RelevanceVector,
};
