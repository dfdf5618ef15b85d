//! Relatedness between documents indexed with a hierarchical controlled
//! vocabulary, and the benchmark protocols used to compare measures.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`vocab`]: vocabulary and corpus ingestion, structural validation.
//! 2. [`infocontent`]: document frequencies and information content.
//! 3. [`termgraph`]: term graphs, shortest-path distances, similarity matrices.
//! 4. [`docvectors`]: binary, IC-weighted and qualifier-augmented vectors.
//! 5. [`relatedness`]: Salton's cosine, soft cosine, maximum term similarities.
//! 6. [`benchmark`]: topic pairs, Cliff's delta, the classification test, sweeps.
//!
//! [`mesh`] converts MeSH descriptor files into the canonical vocabulary
//! format and [`synthetic`] generates labelled test corpora.

pub mod benchmark;
pub mod docvectors;
pub mod error;
pub mod infocontent;
pub mod mesh;
pub mod relatedness;
pub mod synthetic;
pub mod termgraph;
pub mod vocab;

pub use error::{Error, Result};
