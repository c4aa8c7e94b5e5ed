//! Batch discourse analytics for short social-media texts.
//!
//! The crate is organised as a pipeline of independent building blocks:
//!
//! - [`corpus`]: line-delimited record ingest with time/language filtering, tokenization, lemma tables
//! - [`seedex`]: embedding-filtered, co-occurrence-ranked query expansion
//! - [`relevance`]: seed-term matching with exclusion terms
//! - [`sentiment`]: dual-polarity lexicon scoring and daily metric series
//! - [`topics`]: document embedding, projection, density clustering, class-based term weighting, themes
//! - [`analytics`]: Mann-Kendall trends, threshold peaks, PELT change points, event alignment
//! - [`report`]: configuration, staged orchestration, CSV and SVG output
//!
//! Each stage can be used on its own; [`report::run`] wires them together.

pub mod analytics;
pub mod corpus;
pub mod error;
pub mod relevance;
pub mod report;
pub mod seedex;
pub mod sentiment;
pub mod synthetic;
pub mod topics;

pub use error::{Error, Result};
