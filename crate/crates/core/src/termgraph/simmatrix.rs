use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::search::{single_source, SearchScratch};
use super::{check_lambda, GraphKind, TermGraph};
use crate::error::{Error, Result};
use crate::vocab::{TermIdx, Vocabulary};

/// Default sparsification cutoff.
pub const DEFAULT_EPS: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimMeta {
    pub graph: GraphKind,
    pub lambda: f64,
    pub eps: f64,
}

impl SimMeta {
    pub fn header(&self) -> String {
        format!(
            "#simmatrix graph={} lambda={} eps={}",
            self.graph, self.lambda, self.eps
        )
    }
}

/// Sparse symmetric term-similarity matrix with an implicit unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SimMatrix {
    meta: SimMeta,
    rows: Vec<Vec<(TermIdx, f64)>>,
}

impl SimMatrix {
    /// The identity matrix of dimension `n`.
    pub fn diagonal(n: usize, meta: SimMeta) -> Self {
        Self {
            meta,
            rows: vec![Vec::new(); n],
        }
    }

    /// Builds from off-diagonal pairs; each unordered pair may appear once.
    pub fn from_pairs(
        n: usize,
        meta: SimMeta,
        pairs: impl IntoIterator<Item = (TermIdx, TermIdx, f64)>,
    ) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        for (a, b, s) in pairs {
            if a == b || a.index() >= n || b.index() >= n {
                return Err(Error::InvalidParameter(format!(
                    "bad similarity entry ({}, {})",
                    a.0, b.0
                )));
            }
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "similarity {s} outside (0, 1]"
                )));
            }
            rows[a.index()].push((b, s));
            rows[b.index()].push((a, s));
        }
        for row in &mut rows {
            row.sort_by_key(|&(t, _)| t);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidParameter("duplicate similarity entry".into()));
            }
        }
        Ok(Self { meta, rows })
    }

    pub fn meta(&self) -> SimMeta {
        self.meta
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, a: TermIdx, b: TermIdx) -> f64 {
        if a == b {
            return 1.0;
        }
        let row = &self.rows[a.index()];
        match row.binary_search_by_key(&b, |&(t, _)| t) {
            Ok(i) => row[i].1,
            Err(_) => 0.0,
        }
    }

    /// Stored off-diagonal entries of `a`, sorted by column.
    pub fn row(&self, a: TermIdx) -> &[(TermIdx, f64)] {
        &self.rows[a.index()]
    }

    /// Off-diagonal entries with `a < b`, in row-major order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (TermIdx, TermIdx, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            let a = TermIdx(i as u32);
            row.iter()
                .filter(move |&&(b, _)| b > a)
                .map(move |&(b, s)| (a, b, s))
        })
    }

    pub fn stored_pairs(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// Materializes `exp(-dist / lambda)` for every pair of `restrict` terms (all
/// terms when `None`) whose similarity exceeds `eps`. Each search is cut off at
/// cost `-lambda * ln(eps)`.
pub fn similarity_matrix(
    graph: &TermGraph,
    lambda: f64,
    eps: f64,
    restrict: Option<&[TermIdx]>,
) -> Result<SimMatrix> {
    build(graph, lambda, eps, restrict, true)
}

/// As [`similarity_matrix`] but every search runs to exhaustion before the
/// cutoff is applied. Used to audit the pruned search.
pub fn similarity_matrix_unpruned(
    graph: &TermGraph,
    lambda: f64,
    eps: f64,
    restrict: Option<&[TermIdx]>,
) -> Result<SimMatrix> {
    build(graph, lambda, eps, restrict, false)
}

fn build(
    graph: &TermGraph,
    lambda: f64,
    eps: f64,
    restrict: Option<&[TermIdx]>,
    prune: bool,
) -> Result<SimMatrix> {
    check_lambda(lambda)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in [0, 1), got {eps}"
        )));
    }
    let n = graph.node_count();
    let mut sources: Vec<TermIdx> = match restrict {
        Some(r) => r.to_vec(),
        None => (0..n as u32).map(TermIdx).collect(),
    };
    sources.sort();
    sources.dedup();
    if let Some(bad) = sources.iter().find(|t| t.index() >= n) {
        return Err(Error::InvalidParameter(format!(
            "restricted term index {} out of range",
            bad.0
        )));
    }
    let mut wanted = vec![false; n];
    for t in &sources {
        wanted[t.index()] = true;
    }

    let max_cost = if prune && eps > 0.0 {
        // Slightly generous so rounding never drops an entry the exact test keeps.
        let bound = -lambda * eps.ln();
        bound * (1.0 + 1e-9) + 1e-12
    } else {
        f64::INFINITY
    };

    // The pair (a, b) with a < b is taken from the search rooted at a.
    let upper: Vec<Vec<(TermIdx, TermIdx, f64)>> = sources
        .par_iter()
        .map_init(
            || SearchScratch::new(n),
            |scratch, &src| {
                let mut hits: Vec<(TermIdx, TermIdx, f64)> =
                    single_source(graph, src, max_cost, scratch)
                        .into_iter()
                        .filter(|&(t, _)| t > src && wanted[t.index()])
                        .map(|(t, d)| (src, t, (-d / lambda).exp()))
                        .filter(|&(_, _, s)| s > eps)
                        .collect();
                hits.sort_by_key(|&(_, t, _)| t);
                hits
            },
        )
        .collect();

    SimMatrix::from_pairs(
        n,
        SimMeta {
            graph: graph.kind(),
            lambda,
            eps,
        },
        upper.into_iter().flatten(),
    )
}

pub fn write_simmatrix<W: Write>(sm: &SimMatrix, vocab: &Vocabulary, mut out: W) -> Result<()> {
    writeln!(out, "{}", sm.meta.header())?;
    for (a, b, s) in sm.upper_entries() {
        writeln!(out, "{}\t{}\t{:.16e}", vocab.id(a), vocab.id(b), s)?;
    }
    Ok(())
}

pub fn read_simmatrix<R: BufRead>(reader: R, vocab: &Vocabulary) -> Result<SimMatrix> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::SimMatrixHeader("missing header".into()))??;
    let meta = parse_header(&header)?;
    let mut pairs = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            line: n + 2,
            message,
        };
        let mut fields = line.split('\t');
        let (Some(a), Some(b), Some(s), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(malformed("expected three tab-separated fields".into()));
        };
        let s: f64 = s
            .parse()
            .map_err(|e| malformed(format!("bad similarity `{s}`: {e}")))?;
        pairs.push((vocab.require(a)?, vocab.require(b)?, s));
    }
    SimMatrix::from_pairs(vocab.len(), meta, pairs)
}

fn parse_header(line: &str) -> Result<SimMeta> {
    let bad = |m: &str| Error::SimMatrixHeader(format!("{m}: `{line}`"));
    let mut parts = line.split_whitespace();
    if parts.next() != Some("#simmatrix") {
        return Err(bad("expected `#simmatrix`"));
    }
    let (mut graph, mut lambda, mut eps) = (None, None, None);
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| bad("expected key=value"))?;
        match k {
            "graph" => graph = Some(v.parse::<GraphKind>()?),
            "lambda" => lambda = Some(v.parse::<f64>().map_err(|_| bad("bad lambda"))?),
            "eps" => eps = Some(v.parse::<f64>().map_err(|_| bad("bad eps"))?),
            _ => return Err(bad("unknown key")),
        }
    }
    Ok(SimMeta {
        graph: graph.ok_or_else(|| bad("missing graph"))?,
        lambda: lambda.ok_or_else(|| bad("missing lambda"))?,
        eps: eps.ok_or_else(|| bad("missing eps"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termgraph::build_unweighted_graph;
    use crate::vocab::test_util::vocab;

    fn chain() -> Vocabulary {
        vocab(&[("r", &[]), ("c", &["r"]), ("g", &["c"])])
    }

    #[test]
    fn high_cutoff_keeps_only_diagonal() {
        let v = vocab(&[("r", &[]), ("a", &["r"]), ("b", &["r"]), ("g", &["a", "b"])]);
        let sm = similarity_matrix(&build_unweighted_graph(&v), 1.0, 0.9, None).unwrap();
        assert_eq!(sm.stored_pairs(), 0);
        assert_eq!(sm.get(TermIdx(1), TermIdx(1)), 1.0);
    }

    #[test]
    fn chain_values() {
        let v = chain();
        let sm = similarity_matrix(&build_unweighted_graph(&v), 1.0, 0.01, None).unwrap();
        let r = v.idx("r").unwrap();
        let g = v.idx("g").unwrap();
        assert!((sm.get(r, g) - 0.135_335_283_236_612_7).abs() < 1e-15);
        assert_eq!(sm.get(r, g), sm.get(g, r));
        assert_eq!(sm.stored_pairs(), 3);
    }

    #[test]
    fn restricted_rows() {
        let v = chain();
        let r = v.idx("r").unwrap();
        let sm = similarity_matrix(&build_unweighted_graph(&v), 1.0, 0.01, Some(&[r])).unwrap();
        assert_eq!(sm.stored_pairs(), 0);
        let c = v.idx("c").unwrap();
        let sm = similarity_matrix(&build_unweighted_graph(&v), 1.0, 0.01, Some(&[r, c])).unwrap();
        assert_eq!(sm.stored_pairs(), 1);
        assert!(sm.row(v.idx("g").unwrap()).is_empty());
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = build_unweighted_graph(&chain());
        assert!(similarity_matrix(&g, 0.0, 0.1, None).is_err());
        assert!(similarity_matrix(&g, 1.0, 1.0, None).is_err());
        assert!(similarity_matrix(&g, 1.0, -0.1, None).is_err());
    }

    #[test]
    fn file_roundtrip_is_bit_exact() {
        let v = chain();
        let sm = similarity_matrix(&build_unweighted_graph(&v), 3.0, 0.0, None).unwrap();
        let mut buf = Vec::new();
        write_simmatrix(&sm, &v, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("#simmatrix graph=g1 lambda=3 eps=0\n"));
        let back = read_simmatrix(buf.as_slice(), &v).unwrap();
        assert_eq!(sm, back);
        for (x, y) in sm.upper_entries().zip(back.upper_entries()) {
            assert_eq!(x.2.to_bits(), y.2.to_bits());
        }
    }

    #[test]
    fn header_errors() {
        let v = chain();
        assert!(read_simmatrix("".as_bytes(), &v).is_err());
        assert!(read_simmatrix("#simmatrix graph=g1 lambda=1\n".as_bytes(), &v).is_err());
        assert!(read_simmatrix("#sim graph=g1 lambda=1 eps=0\n".as_bytes(), &v).is_err());
        assert!(read_simmatrix(
            "#simmatrix graph=g1 lambda=1 eps=0\nr\tc\t1.5\n".as_bytes(),
            &v
        )
        .is_err());
    }
}
