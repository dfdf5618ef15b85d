//! Term frequencies, descendant closure and corpus-based information content.
//!
//! A term's aggregate count is its own document frequency plus the frequency
//! of every direct or indirect descendant, each descendant counted once even
//! when reachable along several paths. Information content is the negative
//! natural log of the aggregate's share of the summed aggregates.

use std::collections::BTreeSet;
use std::io::BufRead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vocab::{Corpus, TermId, TermIdx, Vocabulary};

/// Number of documents annotated with each term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqTable {
    counts: Vec<u64>,
    pub total_docs: u64,
}

impl FreqTable {
    pub fn from_counts(counts: Vec<u64>, total_docs: u64) -> Self {
        Self { counts, total_docs }
    }

    pub fn count(&self, t: TermIdx) -> u64 {
        self.counts[t.index()]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

pub fn term_frequencies(corpus: &Corpus, vocab: &Vocabulary) -> FreqTable {
    let mut counts = vec![0u64; vocab.len()];
    for doc in corpus.documents.values() {
        // Annotations are unique per term, so each document adds at most 1.
        for a in &doc.annotations {
            if let Some(t) = vocab.idx(a.term.as_str()) {
                counts[t.index()] += 1;
            }
        }
    }
    FreqTable {
        counts,
        total_docs: corpus.len() as u64,
    }
}

/// Reads `term_id<TAB>count` lines. Terms absent from the file get count 0.
pub fn read_freq_table<R: BufRead>(reader: R, vocab: &Vocabulary) -> Result<FreqTable> {
    let mut counts = vec![0u64; vocab.len()];
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            line: n + 1,
            message,
        };
        let (term, count) = line
            .split_once('\t')
            .ok_or_else(|| malformed("expected `term_id<TAB>count`".into()))?;
        let t = vocab.require(term)?;
        counts[t.index()] = count
            .trim()
            .parse()
            .map_err(|e| malformed(format!("bad count `{count}`: {e}")))?;
    }
    Ok(FreqTable {
        counts,
        total_docs: 0,
    })
}

/// Descendant sets `D_i` of every term, excluding the term itself.
#[derive(Clone, Debug)]
pub struct DescendantClosure {
    sets: Vec<Vec<TermIdx>>,
}

impl DescendantClosure {
    /// Sorted descendants of `t`.
    pub fn descendants(&self, t: TermIdx) -> &[TermIdx] {
        &self.sets[t.index()]
    }

    pub fn ids(&self, vocab: &Vocabulary, t: TermIdx) -> BTreeSet<TermId> {
        self.descendants(t)
            .iter()
            .map(|&d| vocab.id(d).clone())
            .collect()
    }
}

pub fn descendant_closure(vocab: &Vocabulary) -> Result<DescendantClosure> {
    vocab.topological_order()?;
    let sets = vocab
        .indices()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|t| {
            let mut seen = vec![false; vocab.len()];
            let mut stack: Vec<TermIdx> = vocab.children(t).to_vec();
            let mut out = Vec::new();
            while let Some(c) = stack.pop() {
                if std::mem::replace(&mut seen[c.index()], true) {
                    continue;
                }
                out.push(c);
                stack.extend_from_slice(vocab.children(c));
            }
            out.sort();
            out
        })
        .collect();
    Ok(DescendantClosure { sets })
}

#[derive(Clone, Debug)]
pub struct IcTable {
    ic: Vec<f64>,
    aggregate: Vec<u64>,
    denominator: u64,
    zero_aggregate: Vec<TermIdx>,
}

impl IcTable {
    pub fn ic(&self, t: TermIdx) -> f64 {
        self.ic[t.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.ic
    }

    pub fn aggregate(&self, t: TermIdx) -> u64 {
        self.aggregate[t.index()]
    }

    /// Sum of all aggregates.
    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// Terms whose aggregate count is 0; they carry the maximum finite IC.
    pub fn zero_aggregate(&self) -> &[TermIdx] {
        &self.zero_aggregate
    }

    /// Table with explicit values, for callers that bring their own weights.
    pub fn from_values(ic: Vec<f64>) -> Self {
        let n = ic.len();
        Self {
            ic,
            aggregate: vec![0; n],
            denominator: 0,
            zero_aggregate: Vec::new(),
        }
    }

    /// Same table with every IC multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ic: self.ic.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }
}

pub fn information_content(
    freq: &FreqTable,
    closure: &DescendantClosure,
    vocab: &Vocabulary,
) -> Result<IcTable> {
    if freq.counts.len() != vocab.len() || closure.sets.len() != vocab.len() {
        return Err(Error::InvalidParameter(
            "frequency table and closure must cover the same vocabulary".into(),
        ));
    }
    let aggregate: Vec<u64> = vocab
        .indices()
        .map(|t| {
            freq.count(t)
                + closure
                    .descendants(t)
                    .iter()
                    .map(|&d| freq.count(d))
                    .sum::<u64>()
        })
        .collect();
    let denominator: u64 = aggregate.iter().sum();
    if denominator == 0 {
        return Err(Error::NoTermOccurrences);
    }
    let max_ic = -(1.0 / denominator as f64).ln();
    let mut zero_aggregate = Vec::new();
    let ic = aggregate
        .iter()
        .enumerate()
        .map(|(i, &agg)| {
            if agg == 0 {
                zero_aggregate.push(TermIdx(i as u32));
                max_ic
            } else {
                -(agg as f64 / denominator as f64).ln()
            }
        })
        .collect();
    Ok(IcTable {
        ic,
        aggregate,
        denominator,
        zero_aggregate,
    })
}

/// Convenience: frequencies from `corpus`, closure and IC in one call.
pub fn corpus_information_content(corpus: &Corpus, vocab: &Vocabulary) -> Result<IcTable> {
    let freq = term_frequencies(corpus, vocab);
    let closure = descendant_closure(vocab)?;
    information_content(&freq, &closure, vocab)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::test_util::{doc, vocab};

    fn fixture_vocab() -> Vocabulary {
        vocab(&[("r", &[]), ("c1", &["r"]), ("c2", &["r"])])
    }

    #[test]
    fn counts_documents_per_term() {
        let v = vocab(&[("t1", &[]), ("t2", &[]), ("t3", &[])]);
        let corpus = Corpus::from_documents([
            doc("d1", &[("t1", false, &[]), ("t2", true, &[])]),
            doc("d2", &[("t1", false, &[])]),
            doc("d3", &[("t2", false, &[]), ("t3", false, &[])]),
        ]);
        let f = term_frequencies(&corpus, &v);
        assert_eq!(f.counts(), &[2, 2, 1]);
        assert_eq!(f.total_docs, 3);

        let empty = term_frequencies(&Corpus::default(), &v);
        assert!(empty.counts().iter().all(|&c| c == 0));
    }

    #[test]
    fn closure_chain_diamond_isolated() {
        let chain = vocab(&[("r", &[]), ("c", &["r"]), ("g", &["c"])]);
        let d = descendant_closure(&chain).unwrap();
        let ids = |v: &Vocabulary, t: &str| -> Vec<String> {
            d_ids(&descendant_closure(v).unwrap(), v, t)
        };
        assert_eq!(d.descendants(chain.idx("r").unwrap()).len(), 2);
        assert_eq!(ids(&chain, "c"), ["g"]);
        assert!(ids(&chain, "g").is_empty());

        let diamond = vocab(&[("r", &[]), ("a", &["r"]), ("b", &["r"]), ("g", &["a", "b"])]);
        assert_eq!(ids(&diamond, "r"), ["a", "b", "g"]);

        let single = vocab(&[("x", &[])]);
        assert!(ids(&single, "x").is_empty());
    }

    fn d_ids(d: &DescendantClosure, v: &Vocabulary, t: &str) -> Vec<String> {
        d.ids(v, v.idx(t).unwrap())
            .into_iter()
            .map(|i| i.to_string())
            .collect()
    }

    #[test]
    fn closure_rejects_cycle() {
        let v = vocab(&[("a", &["b"]), ("b", &["a"])]);
        assert!(matches!(descendant_closure(&v), Err(Error::Cycle(_))));
    }

    #[test]
    fn ic_fixture() {
        let v = fixture_vocab();
        let f = FreqTable::from_counts(
            ["c1", "c2", "r"]
                .iter()
                .map(|id| match *id {
                    "r" => 1,
                    "c1" => 2,
                    _ => 3,
                })
                .collect(),
            0,
        );
        let ic = information_content(&f, &descendant_closure(&v).unwrap(), &v).unwrap();
        let r = v.idx("r").unwrap();
        let c1 = v.idx("c1").unwrap();
        let c2 = v.idx("c2").unwrap();
        assert_eq!(ic.aggregate(r), 6);
        assert_eq!(ic.aggregate(c1), 2);
        assert_eq!(ic.aggregate(c2), 3);
        assert_eq!(ic.denominator(), 11);
        assert!((ic.ic(r) - 0.606_135_803_570_316_3).abs() < 1e-12);
        assert!((ic.ic(c1) - 1.704_748_092_238_425_3).abs() < 1e-12);
    }

    #[test]
    fn ic_identity_and_symmetry() {
        let single = vocab(&[("x", &[])]);
        let ic = information_content(
            &FreqTable::from_counts(vec![5], 5),
            &descendant_closure(&single).unwrap(),
            &single,
        )
        .unwrap();
        assert_eq!(ic.ic(TermIdx(0)), 0.0);

        let v = fixture_vocab();
        let ic = information_content(
            &FreqTable::from_counts(vec![4, 4, 0], 0),
            &descendant_closure(&v).unwrap(),
            &v,
        )
        .unwrap();
        assert_eq!(ic.ic(v.idx("c1").unwrap()), ic.ic(v.idx("c2").unwrap()));
    }

    #[test]
    fn zero_aggregate_gets_max_ic_and_all_zero_errors() {
        let v = fixture_vocab();
        let closure = descendant_closure(&v).unwrap();
        let ic =
            information_content(&FreqTable::from_counts(vec![3, 0, 0], 0), &closure, &v).unwrap();
        let c2 = v.idx("c2").unwrap();
        assert_eq!(ic.zero_aggregate(), &[c2]);
        assert_eq!(ic.ic(c2), (6.0f64).ln());
        assert!(matches!(
            information_content(&FreqTable::from_counts(vec![0, 0, 0], 0), &closure, &v),
            Err(Error::NoTermOccurrences)
        ));
    }

    #[test]
    fn reads_frequency_file() {
        let v = fixture_vocab();
        let f = read_freq_table("r\t1\nc2\t7\n".as_bytes(), &v).unwrap();
        assert_eq!(f.count(v.idx("c2").unwrap()), 7);
        assert_eq!(f.count(v.idx("c1").unwrap()), 0);
        assert!(read_freq_table("r 1\n".as_bytes(), &v).is_err());
        assert!(read_freq_table("zz\t1\n".as_bytes(), &v).is_err());
    }
}
