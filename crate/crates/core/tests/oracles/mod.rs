//! Brute-force reference implementations used by the property and
//! acceptance tests. Each one follows the textbook definition directly and
//! shares no code with the library beyond its data types.
#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use vocab_relate::vocab::{Annotation, DocId, Document, Term, TermId, Vocabulary};

/// Naive Cliff's δ numerator over every pair.
pub fn cliff_numerator(same: &[f64], separate: &[f64]) -> i128 {
    let mut acc = 0i128;
    for &x in same {
        for &y in separate {
            if x > y {
                acc += 1;
            } else if x < y {
                acc -= 1;
            }
        }
    }
    acc
}

pub fn cliff_delta(same: &[f64], separate: &[f64]) -> f64 {
    cliff_numerator(same, separate) as f64 / (same.len() as f64 * separate.len() as f64)
}

/// All-pairs shortest paths over an undirected weighted edge list.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, w) in edges {
        if w < d[a][b] {
            d[a][b] = w;
            d[b][a] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// `reach[i][j]`: `j` is a proper descendant of `i` when following child links.
pub fn descendants(n: usize, parent_links: &[(usize, usize)]) -> Vec<BTreeSet<usize>> {
    let mut children = vec![Vec::new(); n];
    for &(child, parent) in parent_links {
        children[parent].push(child);
    }
    (0..n)
        .map(|root| {
            let mut seen = BTreeSet::new();
            let mut stack = children[root].clone();
            while let Some(x) = stack.pop() {
                if seen.insert(x) {
                    stack.extend(children[x].iter().copied());
                }
            }
            seen
        })
        .collect()
}

/// Nodes lying on some directed cycle of child -> parent links.
pub fn cyclic_nodes(n: usize, parent_links: &[(usize, usize)]) -> BTreeSet<usize> {
    let reach = descendants(n, parent_links);
    (0..n).filter(|&i| reach[i].contains(&i)).collect()
}

/// IC per term, straight from the definition: −ln(own + descendant counts
/// over the sum of that quantity across all terms); a zero count gives
/// ln(denominator).
pub fn information_content(counts: &[u64], reach: &[BTreeSet<usize>]) -> (Vec<u64>, Vec<f64>) {
    let agg: Vec<u64> = (0..counts.len())
        .map(|i| counts[i] + reach[i].iter().map(|&d| counts[d]).sum::<u64>())
        .collect();
    let den: u64 = agg.iter().sum();
    let ic = agg
        .iter()
        .map(|&a| {
            if a == 0 {
                (den as f64).ln()
            } else {
                -(a as f64 / den as f64).ln()
            }
        })
        .collect();
    (agg, ic)
}

/// Salton's cosine over dense vectors.
pub fn cosine(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nx * ny)
}

/// Unweighted MTS: mean over both term sets of each term's best match.
pub fn mts_unweighted(a: &[usize], b: &[usize], sim: impl Fn(usize, usize) -> f64) -> f64 {
    let best =
        |t: usize, other: &[usize]| other.iter().map(|&u| sim(t, u)).fold(f64::MIN, f64::max);
    let total: f64 =
        a.iter().map(|&t| best(t, b)).sum::<f64>() + b.iter().map(|&t| best(t, a)).sum::<f64>();
    total / (a.len() + b.len()) as f64
}

pub fn term_name(i: usize) -> String {
    format!("t{i:02}")
}

/// Vocabulary over `n` terms named `t00..` with the given child -> parent links.
pub fn vocabulary(n: usize, parent_links: &[(usize, usize)]) -> Vocabulary {
    let terms = (0..n)
        .map(|i| Term {
            id: TermId::new(term_name(i)).unwrap(),
            label: String::new(),
            parents: parent_links
                .iter()
                .filter(|&&(c, _)| c == i)
                .map(|&(_, p)| TermId::new(term_name(p)).unwrap())
                .collect(),
        })
        .collect();
    Vocabulary::new(terms, Vec::new()).unwrap()
}

pub fn document(id: &str, terms: &[(usize, bool)]) -> Document {
    Document::new(
        DocId::new(id).unwrap(),
        terms.iter().map(|&(t, major)| Annotation {
            term: TermId::new(term_name(t)).unwrap(),
            is_major: major,
            qualifiers: Default::default(),
        }),
    )
}

/// Random DAG: each node `i > 0` links to up to three parents below it.
pub fn dag(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes).prop_flat_map(|n| {
        let links = (1..n)
            .map(|i| proptest::collection::btree_set(0..i, 0..=3.min(i)))
            .collect::<Vec<_>>();
        (Just(n), links).prop_map(|(n, sets)| {
            let mut out = Vec::new();
            for (k, parents) in sets.into_iter().enumerate() {
                out.extend(parents.into_iter().map(|p| (k + 1, p)));
            }
            (n, out)
        })
    })
}

/// Score lists drawn from a coarse grid, so ties are common.
pub fn score_list(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec((-6i32..=6).prop_map(|v| v as f64 / 4.0), 1..=max_len)
}
