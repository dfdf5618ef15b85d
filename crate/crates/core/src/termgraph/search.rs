use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use super::{GraphKind, TermGraph};
use crate::vocab::TermIdx;

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: TermIdx,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on (cost, node).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable per-thread buffers for single-source searches.
pub struct SearchScratch {
    dist: Vec<f64>,
    settled: Vec<bool>,
    touched: Vec<TermIdx>,
    heap: BinaryHeap<Frontier>,
    queue: VecDeque<TermIdx>,
}

impl SearchScratch {
    pub fn new(n: usize) -> Self {
        Self {
            dist: vec![f64::INFINITY; n],
            settled: vec![false; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for t in self.touched.drain(..) {
            self.dist[t.index()] = f64::INFINITY;
            self.settled[t.index()] = false;
        }
        self.heap.clear();
        self.queue.clear();
    }
}

/// Shortest-path costs from `source` to every node whose cost is at most
/// `max_cost`, in settling order. Unit-weight graphs use breadth-first search,
/// weighted graphs Dijkstra (zero weights allowed).
pub fn single_source(
    graph: &TermGraph,
    source: TermIdx,
    max_cost: f64,
    scratch: &mut SearchScratch,
) -> Vec<(TermIdx, f64)> {
    let mut out = Vec::new();
    single_source_visit(graph, source, max_cost, scratch, |t, d| {
        out.push((t, d));
        true
    });
    out
}

/// Calls `visit` for each settled node; returning `false` stops the search.
fn single_source_visit(
    graph: &TermGraph,
    source: TermIdx,
    max_cost: f64,
    scratch: &mut SearchScratch,
    mut visit: impl FnMut(TermIdx, f64) -> bool,
) {
    scratch.reset();
    scratch.dist[source.index()] = 0.0;
    scratch.touched.push(source);

    if graph.kind() == GraphKind::Unweighted {
        scratch.queue.push_back(source);
        while let Some(v) = scratch.queue.pop_front() {
            let d = scratch.dist[v.index()];
            if !visit(v, d) {
                return;
            }
            let nd = d + 1.0;
            if nd > max_cost {
                continue;
            }
            for &(u, _) in graph.neighbors(v) {
                if scratch.dist[u.index()].is_infinite() {
                    scratch.dist[u.index()] = nd;
                    scratch.touched.push(u);
                    scratch.queue.push_back(u);
                }
            }
        }
        return;
    }

    scratch.heap.push(Frontier {
        cost: 0.0,
        node: source,
    });
    while let Some(Frontier { cost, node: v }) = scratch.heap.pop() {
        if scratch.settled[v.index()] {
            continue;
        }
        scratch.settled[v.index()] = true;
        if !visit(v, cost) {
            return;
        }
        for &(u, w) in graph.neighbors(v) {
            if scratch.settled[u.index()] {
                continue;
            }
            let nd = cost + w;
            if nd <= max_cost && nd < scratch.dist[u.index()] {
                if scratch.dist[u.index()].is_infinite() {
                    scratch.touched.push(u);
                }
                scratch.dist[u.index()] = nd;
                scratch.heap.push(Frontier { cost: nd, node: u });
            }
        }
    }
}

/// Exact shortest-path cost between two terms, `None` when disconnected.
pub fn shortest_distance(graph: &TermGraph, a: TermIdx, b: TermIdx) -> Option<f64> {
    let mut scratch = SearchScratch::new(graph.node_count());
    let mut found = None;
    single_source_visit(graph, a, f64::INFINITY, &mut scratch, |t, d| {
        if t == b {
            found = Some(d);
            false
        } else {
            true
        }
    });
    found
}

/// Dense exact distances among a set of terms.
///
/// For each unordered pair the value found by the search from the smaller
/// term index is used in both directions, so the table is exactly symmetric.
#[derive(Clone, Debug)]
pub struct DistanceTable {
    terms: Vec<TermIdx>,
    position: Vec<u32>,
    dist: Vec<f64>,
}

const ABSENT: u32 = u32::MAX;

impl DistanceTable {
    pub fn compute(graph: &TermGraph, terms: &[TermIdx]) -> Self {
        let mut terms = terms.to_vec();
        terms.sort();
        terms.dedup();
        let k = terms.len();
        let mut position = vec![ABSENT; graph.node_count()];
        for (i, t) in terms.iter().enumerate() {
            position[t.index()] = i as u32;
        }
        let rows: Vec<Vec<f64>> = terms
            .par_iter()
            .enumerate()
            .map_init(
                || SearchScratch::new(graph.node_count()),
                |scratch, (i, &src)| {
                    let mut row = vec![f64::INFINITY; k - i];
                    single_source_visit(graph, src, f64::INFINITY, scratch, |t, d| {
                        let p = position[t.index()];
                        if p != ABSENT && p as usize >= i {
                            row[p as usize - i] = d;
                        }
                        true
                    });
                    row
                },
            )
            .collect();
        let mut dist = vec![f64::INFINITY; k * k];
        for (i, row) in rows.iter().enumerate() {
            for (off, &d) in row.iter().enumerate() {
                let j = i + off;
                dist[i * k + j] = d;
                dist[j * k + i] = d;
            }
        }
        Self {
            terms,
            position,
            dist,
        }
    }

    pub fn terms(&self) -> &[TermIdx] {
        &self.terms
    }

    /// `None` when either term is outside the table or the pair is disconnected.
    pub fn get(&self, a: TermIdx, b: TermIdx) -> Option<f64> {
        let pa = *self.position.get(a.index())?;
        let pb = *self.position.get(b.index())?;
        if pa == ABSENT || pb == ABSENT {
            return None;
        }
        let d = self.dist[pa as usize * self.terms.len() + pb as usize];
        d.is_finite().then_some(d)
    }

    pub fn max_finite(&self) -> f64 {
        self.dist
            .iter()
            .copied()
            .filter(|d| d.is_finite())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infocontent::IcTable;
    use crate::termgraph::{build_ic_weighted_graph, build_unweighted_graph};
    use crate::vocab::test_util::vocab;

    #[test]
    fn self_distance_and_chain() {
        let v = vocab(&[("r", &[]), ("c", &["r"]), ("g", &["c"]), ("x", &[])]);
        let g = build_unweighted_graph(&v);
        let r = v.idx("r").unwrap();
        let gg = v.idx("g").unwrap();
        assert_eq!(shortest_distance(&g, r, r), Some(0.0));
        assert_eq!(shortest_distance(&g, r, gg), Some(2.0));
        assert_eq!(shortest_distance(&g, gg, r), Some(2.0));
        assert_eq!(shortest_distance(&g, r, v.idx("x").unwrap()), None);
    }

    #[test]
    fn bounded_search_prunes() {
        let v = vocab(&[("a", &[]), ("b", &["a"]), ("c", &["b"]), ("d", &["c"])]);
        let g = build_unweighted_graph(&v);
        let mut scratch = SearchScratch::new(v.len());
        let hits = single_source(&g, v.idx("a").unwrap(), 1.5, &mut scratch);
        assert_eq!(hits.len(), 2);
        let hits = single_source(&g, v.idx("a").unwrap(), f64::INFINITY, &mut scratch);
        assert_eq!(hits.len(), 4);
    }

    #[test]
    fn zero_weight_edges() {
        let v = vocab(&[("a", &[]), ("b", &["a"]), ("c", &["b"])]);
        // ic(a)=ic(b) gives a free edge; a-c costs |ic(b)-ic(c)| only.
        let ic = IcTable::from_values(vec![1.0, 1.0, 3.5]);
        let g = build_ic_weighted_graph(&v, &ic).unwrap();
        let a = v.idx("a").unwrap();
        assert_eq!(shortest_distance(&g, a, v.idx("b").unwrap()), Some(0.0));
        assert_eq!(shortest_distance(&g, a, v.idx("c").unwrap()), Some(2.5));
    }

    #[test]
    fn distance_table_matches_pairwise() {
        let v = vocab(&[
            ("r", &[]),
            ("a", &["r"]),
            ("b", &["r"]),
            ("g", &["a", "b"]),
            ("z", &[]),
        ]);
        let g = build_unweighted_graph(&v);
        let all: Vec<TermIdx> = v.indices().collect();
        let table = DistanceTable::compute(&g, &all);
        for &x in &all {
            for &y in &all {
                assert_eq!(table.get(x, y), shortest_distance(&g, x, y));
            }
        }
        assert_eq!(table.max_finite(), 2.0);
    }
}
