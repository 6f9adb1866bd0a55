//! Text classification features from weighted word graphs.
//!
//! A corpus is turned into a single word graph whose edge weights count
//! adjacent in-sentence co-occurrences ([`graph`]). Weighted random walks
//! ([`walker`]) from every word are anonymized and pooled into a
//! transition probability matrix that serves as the word's embedding
//! ([`embedding`]); documents are the mean of their words. A small
//! feedforward network ([`classifier`]) classifies the document vectors and
//! [`metrics`] scores the result. [`experiments`] drives end-to-end runs,
//! parameter sweeps and reduced-training robustness curves.

pub mod classifier;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod par;
pub mod persistence;
pub mod seed;
pub mod stem;
pub mod synth;
pub mod walker;

pub use error::{Error, Result};
pub use par::Execution;

/// Crate version, suffixed with `git describe` output when built from a checkout.
pub const VERSION: &str = env!("GTPM_BUILD_VERSION");
