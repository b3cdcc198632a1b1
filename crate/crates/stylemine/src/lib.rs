//! Mining roughly parallel sentence pairs from non-parallel style corpora,
//! scoring candidate generations with a contrastive imitation reward, and
//! evaluating style-transfer output.
//!
//! The crate is organized around the pipeline stages:
//!
//! - [`corpus`]: style-labeled sentence corpora in interchange formats.
//! - [`scenegraph`]: scene-entity profiles from parsed triplets or a
//!   heuristic fallback.
//! - [`embed`]: sentence-embedding providers and exact cosine retrieval.
//! - [`align`]: the rd / semb / semb-sas mining strategies and exports.
//! - [`distill`]: saliency-driven sentence selection under a length budget.
//! - [`reward`]: imitation distances, contrastive loss, self-critic
//!   advantage, and the newline-delimited request service.
//! - [`metrics`]: BLEU, i-PINC, GM evaluation.
//! - [`fixtures`]: hermetic fixture verification against committed oracles.

pub mod align;
pub mod corpus;
pub mod distill;
pub mod embed;
mod error;
pub mod fixtures;
pub mod metrics;
pub mod reward;
pub mod scenegraph;

pub use error::{Error, Result};
