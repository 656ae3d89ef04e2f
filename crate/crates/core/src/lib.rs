//! Ranking engine for technology-assisted review of systematic reviews.
//!
//! A topic is a review with a candidate set of PubMed documents (the "A
//! set"). The pipeline ranks each candidate set with BM25, TF-IDF query
//! expansion and RM3 feedback, optionally fuses the baseline with pooled
//! sentence-similarity scores, then evaluates the rankings with CLEF-TAR
//! metrics and compares models statistically.
//!
//! Runnable examples live in `examples/`:
//!
//! - `tokenize_and_stem`: the text pipeline
//! - `build_index`: indexing and the binary index format
//! - `baseline_run`: BM25 + RM3 over candidate sets
//! - `sentence_rerank`: mock embeddings and score fusion
//! - `embedding_store`: the EMB1 vector file
//! - `evaluate_run`: AP, recall, NCG and normalized area
//! - `compare_models`: ANOVA, t-tests and the significance matrix
//! - `plot_topic_size`: metric against candidate-set size
//! - `synthetic_project`: the generated project used by `selftest`

pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evalmetrics;
pub mod fusion;
pub mod index;
pub mod porter;
pub mod query;
pub mod run;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
