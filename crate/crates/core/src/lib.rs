//! Semi-supervised wrapper feature selection.
//!
//! The toolkit pseudo-labels unlabeled rows with a self-learning random
//! forest, scores candidate feature subsets by a C-bound on the
//! majority-vote risk corrected for mislabeled pseudo-labels, and searches
//! subsets with a genetic algorithm that uses per-feature weights and
//! discards features that fail a permuted-copy relevance test.
//!
//! Modules, bottom-up:
//!
//! - [`dataset`]: loading, stratified splitting, projection, synthetic data
//! - [`forest`]: random-forest votes, out-of-bag estimates, feature weights
//! - [`bounds`]: margins, margin moments, C-bound and its corrected variants
//! - [`selflearn`]: threshold search and the self-learning loop
//! - [`genetic`]: classic and weight-aware genetic subset search
//! - [`pipeline`]: end-to-end selection, evaluation protocols, statistics

pub mod bounds;
pub mod dataset;
pub mod budget;
mod error;
pub mod forest;
pub mod genetic;
pub mod pipeline;
pub mod seed;
pub mod selflearn;

pub use error::{Error, Result};
