//! Undirected term graphs over parent-child links.
//!
//! Two edge weightings exist: unit weights ([`GraphKind::Unweighted`]) and
//! the absolute IC difference between the linked terms
//! ([`GraphKind::IcWeighted`]). Distances are shortest-path costs and turn
//! into similarities through `exp(-dist / lambda)`.

mod search;
mod simmatrix;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infocontent::IcTable;
use crate::vocab::{TermIdx, Vocabulary};

pub use search::{shortest_distance, single_source, DistanceTable, SearchScratch};
pub use simmatrix::{
    read_simmatrix, similarity_matrix, similarity_matrix_unpruned, write_simmatrix, SimMatrix,
    SimMeta, DEFAULT_EPS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    /// Every parent-child edge has weight 1.
    #[serde(rename = "g1")]
    Unweighted,
    /// Edge weight is `|IC(child) - IC(parent)|`.
    #[serde(rename = "dic")]
    IcWeighted,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Unweighted => "g1",
            GraphKind::IcWeighted => "dic",
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g1" => Ok(GraphKind::Unweighted),
            "dic" => Ok(GraphKind::IcWeighted),
            other => Err(Error::InvalidParameter(format!(
                "unknown graph kind `{other}` (expected g1 or dic)"
            ))),
        }
    }
}

/// A parent-child link with its weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub child: TermIdx,
    pub parent: TermIdx,
    pub weight: f64,
}

/// Compressed adjacency over all vocabulary terms.
#[derive(Clone, Debug)]
pub struct TermGraph {
    kind: GraphKind,
    offsets: Vec<usize>,
    adjacency: Vec<(TermIdx, f64)>,
    edges: Vec<Edge>,
}

impl TermGraph {
    fn from_edges(kind: GraphKind, n: usize, mut edges: Vec<Edge>) -> Self {
        edges.sort_by_key(|e| (e.child, e.parent));
        let mut degree = vec![0usize; n];
        for e in &edges {
            degree[e.child.index()] += 1;
            degree[e.parent.index()] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![(TermIdx(0), 0.0); offsets[n]];
        for e in &edges {
            adjacency[fill[e.child.index()]] = (e.parent, e.weight);
            fill[e.child.index()] += 1;
            adjacency[fill[e.parent.index()]] = (e.child, e.weight);
            fill[e.parent.index()] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_by_key(|&(t, _)| t);
        }
        Self {
            kind,
            offsets,
            adjacency,
            edges,
        }
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, t: TermIdx) -> &[(TermIdx, f64)] {
        &self.adjacency[self.offsets[t.index()]..self.offsets[t.index() + 1]]
    }

    pub fn edge_weight(&self, a: TermIdx, b: TermIdx) -> Option<f64> {
        let ns = self.neighbors(a);
        ns.binary_search_by_key(&b, |&(t, _)| t)
            .ok()
            .map(|i| ns[i].1)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }
}

fn parent_child_pairs(vocab: &Vocabulary) -> impl Iterator<Item = (TermIdx, TermIdx)> + '_ {
    vocab
        .indices()
        .flat_map(move |c| vocab.parents(c).iter().map(move |&p| (c, p)))
}

pub fn build_unweighted_graph(vocab: &Vocabulary) -> TermGraph {
    let edges = parent_child_pairs(vocab)
        .map(|(child, parent)| Edge {
            child,
            parent,
            weight: 1.0,
        })
        .collect();
    TermGraph::from_edges(GraphKind::Unweighted, vocab.len(), edges)
}

pub fn build_ic_weighted_graph(vocab: &Vocabulary, ic: &IcTable) -> Result<TermGraph> {
    if ic.values().len() != vocab.len() {
        let missing = vocab
            .terms()
            .get(ic.values().len())
            .map(|t| t.id.to_string())
            .unwrap_or_default();
        return Err(Error::MissingIc(missing));
    }
    let edges = parent_child_pairs(vocab)
        .map(|(child, parent)| Edge {
            child,
            parent,
            weight: (ic.ic(child) - ic.ic(parent)).abs(),
        })
        .collect();
    Ok(TermGraph::from_edges(
        GraphKind::IcWeighted,
        vocab.len(),
        edges,
    ))
}

/// `exp(-dist / lambda)`; unreachable pairs map to 0.
pub fn distance_to_similarity(dist: Option<f64>, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(match dist {
        Some(d) => (-d / lambda).exp(),
        None => 0.0,
    })
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )))
    }
}
