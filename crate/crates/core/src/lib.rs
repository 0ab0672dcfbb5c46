//! Encoder-agnostic entity alignment toolkit.
//!
//! Scores entity pairs across two knowledge graphs by the uniqueness of
//! the attribute values they share, fuses those scores with any
//! externally produced embedding-similarity matrix (result correction
//! or belief-revision combination with confidence grid search), and
//! constructs heterogeneous benchmark variants by lowering the
//! coverage rate of gold pairs. Evaluation is standard ranking:
//! Hits@k and MRR over a held-out test split.
//!
//! The encoder itself stays external: anything that can emit a dense
//! source-by-target similarity matrix plugs in through a binary file
//! format, and a character-trigram name matcher ships as a baseline so
//! the pipeline runs without one.

pub mod attrsim;
pub mod cli;
pub mod coverage;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod interaction;
pub mod kg;
pub mod matrix;
pub mod pipeline;

pub use error::{Error, Result};
pub use interaction::{Belief, PsConfig, RcConfig};
pub use kg::{AlignmentSet, KnowledgeGraph, Split};
pub use matrix::{ScoreDomain, SimilarityMatrix};
