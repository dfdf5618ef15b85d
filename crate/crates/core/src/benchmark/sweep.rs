//! Running both benchmark tests for one configuration or a whole grid.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classification_test, ClassificationParams};
use super::judgements::{RelevanceJudgement, TopicPair, TopicPairSet};
use super::stats::{cliffs_delta, mcc, mean, skewness, Confusion};
use crate::error::{Error, Result};
use crate::relatedness::{Artifacts, MethodConfig, Scorer, VectorKind};
use crate::termgraph::GraphKind;
use crate::vocab::DocId;

/// Test-1 scores split by group. Failed pairs are counted, not scored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PairScores {
    pub same: Vec<f64>,
    pub separate: Vec<f64>,
    pub n_errors: usize,
    pub first_error: Option<String>,
}

/// Scores every test-1 pair. Each distinct document pair is scored once even
/// when it occurs under several topics.
pub fn score_pairs(scorer: &Scorer, pairs: &TopicPairSet) -> PairScores {
    let mut unique: Vec<(&DocId, &DocId)> = pairs
        .same_topic
        .iter()
        .chain(&pairs.separate_topic)
        .map(|p| (&p.a, &p.b))
        .collect();
    unique.sort();
    unique.dedup();
    let scored: HashMap<(&DocId, &DocId), std::result::Result<f64, String>> = unique
        .par_iter()
        .map(|&(a, b)| {
            let s = scorer
                .score(a.as_str(), b.as_str())
                .and_then(|s| {
                    if s.is_nan() {
                        Err(Error::NanScore)
                    } else {
                        Ok(s)
                    }
                })
                .map_err(|e| e.to_string());
            ((a, b), s)
        })
        .collect();
    let mut out = PairScores::default();
    let mut collect = |group: &[TopicPair], into: &mut Vec<f64>| {
        for p in group {
            match &scored[&(&p.a, &p.b)] {
                Ok(s) => into.push(*s),
                Err(e) => {
                    out.n_errors += 1;
                    out.first_error.get_or_insert_with(|| e.clone());
                }
            }
        }
    };
    let (mut same, mut separate) = (Vec::new(), Vec::new());
    collect(&pairs.same_topic, &mut same);
    collect(&pairs.separate_topic, &mut separate);
    out.same = same;
    out.separate = separate;
    out
}

/// `group<TAB>score` lines for plotting score densities.
pub fn write_distribution<W: Write>(scores: &PairScores, mut out: W) -> Result<()> {
    for s in &scores.same {
        writeln!(out, "same\t{s:.16e}")?;
    }
    for s in &scores.separate {
        writeln!(out, "separate\t{s:.16e}")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub config: MethodConfig,
    pub delta: Option<f64>,
    pub phi: Option<f64>,
    pub mcc_degenerate: bool,
    pub confusion: Option<Confusion>,
    pub mean_same: Option<f64>,
    pub mean_sep: Option<f64>,
    pub skew_same: Option<f64>,
    pub skew_sep: Option<f64>,
    pub n_same: usize,
    pub n_sep: usize,
    /// Test-1 pairs that could not be scored.
    pub n_errors: usize,
    pub failures: Vec<String>,
}

impl BenchResult {
    fn failed(config: MethodConfig, message: String) -> Self {
        Self {
            config,
            delta: None,
            phi: None,
            mcc_degenerate: false,
            confusion: None,
            mean_same: None,
            mean_sep: None,
            skew_same: None,
            skew_sep: None,
            n_same: 0,
            n_sep: 0,
            n_errors: 0,
            failures: vec![message],
        }
    }
}

/// Both tests for one scorer. Failures of individual statistics are recorded
/// in `failures` and leave the matching fields empty.
pub fn evaluate(
    scorer: &Scorer,
    filtered: &[RelevanceJudgement],
    pairs: &TopicPairSet,
    params: &ClassificationParams,
) -> (BenchResult, PairScores) {
    let config = *scorer.config();
    let scores = score_pairs(scorer, pairs);
    let mut failures = Vec::new();
    if let Some(e) = &scores.first_error {
        failures.push(format!(
            "{} test-1 pairs failed, first: {e}",
            scores.n_errors
        ));
    }
    let mut keep = |what: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            failures.push(format!("{what}: {e}"));
            None
        }
    };
    let delta = keep("delta", cliffs_delta(&scores.same, &scores.separate));
    let mean_same = keep("mean_same", mean(&scores.same));
    let mean_sep = keep("mean_sep", mean(&scores.separate));
    let skew_same = keep("skew_same", skewness(&scores.same));
    let skew_sep = keep("skew_sep", skewness(&scores.separate));
    let score = |a: &DocId, b: &DocId| scorer.score(a.as_str(), b.as_str());
    let (confusion, phi, mcc_degenerate) = match classification_test(filtered, &score, params) {
        Ok(c) => {
            let m = mcc(&c);
            if m.degenerate {
                failures.push("phi: degenerate confusion matrix, reported as 0".into());
            }
            (Some(c), Some(m.value), m.degenerate)
        }
        Err(e) => {
            failures.push(format!("phi: {e}"));
            (None, None, false)
        }
    };
    let result = BenchResult {
        config,
        delta,
        phi,
        mcc_degenerate,
        confusion,
        mean_same,
        mean_sep,
        skew_same,
        skew_sep,
        n_same: scores.same.len(),
        n_sep: scores.separate.len(),
        n_errors: scores.n_errors,
        failures,
    };
    (result, scores)
}

pub fn run_benchmark(
    art: &Artifacts<'_>,
    filtered: &[RelevanceJudgement],
    pairs: &TopicPairSet,
    config: MethodConfig,
    params: &ClassificationParams,
) -> (BenchResult, Option<PairScores>) {
    match art.scorer(config) {
        Ok(scorer) => {
            let (r, s) = evaluate(&scorer, filtered, pairs, params);
            (r, Some(s))
        }
        Err(e) => (BenchResult::failed(config, e.to_string()), None),
    }
}

/// One result per grid cell, in grid order. Cells share the artifact caches;
/// a failing cell is recorded and the sweep continues.
pub fn parameter_sweep(
    art: &Artifacts<'_>,
    filtered: &[RelevanceJudgement],
    pairs: &TopicPairSet,
    grid: &[MethodConfig],
    params: &ClassificationParams,
) -> Vec<BenchResult> {
    grid.iter()
        .map(|&config| run_benchmark(art, filtered, pairs, config, params).0)
        .collect()
}

pub const RESULTS_HEADER: &str =
    "method,vector,graph,w,lambda,slim,delta,phi,mean_same,mean_sep,skew_same,skew_sep,n_errors";

/// `#bench ...` line recording the protocol parameters of a results file.
pub fn bench_header(params: &ClassificationParams, min_frac: f64) -> String {
    format!(
        "#bench seed={} iterations={} sample_size={} min_frac={}",
        params.seed, params.iterations, params.sample_size, min_frac
    )
}

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x}"))
}

pub fn results_row(r: &BenchResult) -> String {
    let c = &r.config;
    let mut row = String::new();
    write!(
        row,
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        c.method_label(),
        c.vector_label(),
        c.graph_label(),
        c.w,
        c.lambda_label(),
        c.slim,
        na(r.delta),
        na(r.phi),
        na(r.mean_same),
        na(r.mean_sep),
        na(r.skew_same),
        na(r.skew_sep),
        r.n_errors
    )
    .expect("writing to a String");
    row
}

/// Writes the optional `#` header line, the column header and one row per result.
pub fn write_results<W: Write>(
    results: &[BenchResult],
    header: Option<&str>,
    mut out: W,
) -> Result<()> {
    if let Some(h) = header {
        writeln!(out, "{h}")?;
    }
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in results {
        writeln!(out, "{}", results_row(r))?;
    }
    Ok(())
}

/// Named parameter grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// The nine headline parameterizations.
    Table1,
    /// Salton's cosine: w 1..=10 × IC × qualifiers.
    Fig2,
    /// Soft cosine: w 1..=10 × λ 1..=5 × graph × IC.
    Fig3,
    /// MTS: w 1..=20 plus slim × (minimum distance, λ 1..=5) × graph.
    Fig4,
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Preset::Table1),
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            other => Err(Error::InvalidParameter(format!("unknown preset `{other}`"))),
        }
    }
}

const LAMBDAS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
const GRAPHS: [GraphKind; 2] = [GraphKind::Unweighted, GraphKind::IcWeighted];
const VECTORS: [VectorKind; 2] = [VectorKind::Binary, VectorKind::Ic];

impl Preset {
    pub fn grid(self, eps: f64) -> Vec<MethodConfig> {
        use GraphKind::{IcWeighted as Dic, Unweighted as G1};
        use VectorKind::{Binary, Ic};
        let mut grid = match self {
            Preset::Table1 => vec![
                MethodConfig::salton(Binary, 1.0),
                MethodConfig::salton(Binary, 3.0),
                MethodConfig::salton(Ic, 2.0),
                MethodConfig::soft(Binary, G1, 4.0, 1.0),
                MethodConfig::soft(Binary, Dic, 4.0, 1.0),
                MethodConfig::soft(Ic, G1, 3.0, 1.0),
                MethodConfig::soft(Ic, Dic, 3.0, 1.0),
                MethodConfig::mts(G1, 16.0, 1.0),
                MethodConfig::mts(Dic, 16.0, 2.0),
            ],
            Preset::Fig2 => {
                let mut g = Vec::new();
                for qualifiers in [false, true] {
                    for vector in VECTORS {
                        for w in 1..=10 {
                            g.push(MethodConfig {
                                qualifiers,
                                ..MethodConfig::salton(vector, w as f64)
                            });
                        }
                    }
                }
                g
            }
            Preset::Fig3 => {
                let mut g = Vec::new();
                for vector in VECTORS {
                    for graph in GRAPHS {
                        for lambda in LAMBDAS {
                            for w in 1..=10 {
                                g.push(MethodConfig::soft(vector, graph, w as f64, lambda));
                            }
                        }
                    }
                }
                g
            }
            Preset::Fig4 => {
                let mut g = Vec::new();
                for graph in GRAPHS {
                    let mut rows: Vec<(f64, bool)> = vec![(1.0, true)];
                    rows.extend((1..=20).map(|w| (w as f64, false)));
                    for (w, slim) in rows {
                        g.push(MethodConfig {
                            slim,
                            raw_distance: true,
                            ..MethodConfig::mts(graph, w, 1.0)
                        });
                        for lambda in LAMBDAS {
                            g.push(MethodConfig {
                                slim,
                                ..MethodConfig::mts(graph, w, lambda)
                            });
                        }
                    }
                }
                g
            }
        };
        for c in &mut grid {
            c.eps = eps;
        }
        grid
    }
}

/// Reads a grid as a JSON array of configurations; omitted fields take
/// their defaults.
pub fn parse_grid(json: &str) -> Result<Vec<MethodConfig>> {
    let grid: Vec<MethodConfig> = serde_json::from_str(json)
        .map_err(|e| Error::InvalidParameter(format!("grid file: {e}")))?;
    for c in &grid {
        c.validate()?;
    }
    Ok(grid)
}

/// True when some cell reads information content.
pub fn grid_needs_ic(grid: &[MethodConfig]) -> bool {
    grid.iter().any(MethodConfig::needs_ic)
}
