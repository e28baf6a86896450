//! Prediction-preserving program reduction for code-intelligence models.

pub mod lang;
pub mod adversarial;
pub mod corpus;
pub mod ddmin;
pub mod engine;
pub mod features;
pub mod fixtures;
pub mod metrics;
pub mod oracle;
pub mod tree_reduce;
