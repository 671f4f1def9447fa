//! Mining ordered scalar adjective pairs ("scalemates" such as `warm < hot`)
//! from POS-tagged corpora.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`] streams tagged sentences and [`pattern`] matches six
//!    lexical templates (`X if not Y`, `from X to Y`, ...), emitting each
//!    adjective pair in weak-to-strong order.
//! 2. [`pairs`] pools the matches per unordered pair and resolves the scale
//!    direction by majority, discarding draws.
//! 3. [`similarity`] and [`filters`] prune unrelated, antonymous and
//!    opposite-polarity pairs.
//! 4. [`evaluation`] scores the surviving orderings against a subjectivity
//!    lexicon and arousal norms.

pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod extract;
pub mod filters;
pub mod matchfile;
pub mod pairs;
pub mod pattern;
pub mod pipeline;
pub mod similarity;
pub mod synth;

pub use error::{Error, Result};
