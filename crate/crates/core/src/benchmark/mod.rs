//! Benchmark protocols for relatedness measures.
//!
//! Test 1 compares scores of same-topic pairs (both documents relevant) with
//! separate-topic pairs (exactly one relevant) through Cliff's δ. Test 2
//! classifies held-out documents by their most related sampled document and
//! summarizes the confusion matrix with the Matthews correlation coefficient.

mod classify;
mod judgements;
mod stats;
mod sweep;

pub use classify::{
    cell_rng, classification_test, sample_indices, uniform_index, ClassificationParams,
};
pub use judgements::{
    build_pairs, filter_topics, ingest_judgements, topic_docs, write_judgements,
    RelevanceJudgement, RelevanceLevel, TopicDocs, TopicPair, TopicPairSet, DEFAULT_MIN_FRAC,
};
pub use stats::{
    ccc, cliffs_delta, cliffs_dominance, mcc, mean, pearson, skewness, Confusion, Mcc,
};
pub use sweep::{
    bench_header, evaluate, grid_needs_ic, parameter_sweep, parse_grid, results_row, run_benchmark,
    score_pairs, write_distribution, write_results, BenchResult, PairScores, Preset,
    RESULTS_HEADER,
};
