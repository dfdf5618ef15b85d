//! Document relatedness measures.
//!
//! * Salton's cosine over binary, IC-weighted or qualifier-augmented vectors.
//! * Soft cosine, which credits similar but non-identical terms through a
//!   term-similarity matrix `S`: `xᵀSy / (√(xᵀSx) √(yᵀSy))`.
//! * Maximum term similarities (MTS): the weighted mean, over the terms of
//!   both documents, of each term's best match in the other document.
//!
//! Every measure is exactly symmetric in its arguments.

mod scorer;

use std::cmp::Ordering;

use crate::docvectors::{check_major_weight, QualifiedTermVector, TermVector};
use crate::error::{Error, Result};
use crate::termgraph::{DistanceTable, SimMatrix};
use crate::vocab::{Document, TermIdx, Vocabulary};

pub use scorer::{
    pairwise_scores, Artifacts, Method, MethodConfig, PairScore, Scorer, SimMatrixStore, VectorKind,
};

/// Pairwise term similarity used by MTS.
pub trait TermSimilarity {
    fn sim(&self, a: TermIdx, b: TermIdx) -> f64;
}

impl TermSimilarity for SimMatrix {
    #[inline]
    fn sim(&self, a: TermIdx, b: TermIdx) -> f64 {
        self.get(a, b)
    }
}

impl<F: Fn(TermIdx, TermIdx) -> f64> TermSimilarity for F {
    fn sim(&self, a: TermIdx, b: TermIdx) -> f64 {
        self(a, b)
    }
}

/// Similarity from exact shortest-path distances, bypassing the sparsified matrix.
pub struct ExactSimilarity<'a> {
    pub distances: &'a DistanceTable,
    pub lambda: f64,
}

impl TermSimilarity for ExactSimilarity<'_> {
    fn sim(&self, a: TermIdx, b: TermIdx) -> f64 {
        if a == b {
            return 1.0;
        }
        match self.distances.get(a, b) {
            Some(d) => (-d / self.lambda).exp(),
            None => 0.0,
        }
    }
}

fn cosine(dot: f64, norm_sq_x: f64, norm_sq_y: f64) -> Result<f64> {
    if norm_sq_x <= 0.0 || norm_sq_y <= 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (norm_sq_x * norm_sq_y).sqrt()).min(1.0))
}

pub fn salton_cosine(x: &TermVector, y: &TermVector) -> Result<f64> {
    cosine(x.dot(y), x.norm_sq(), y.norm_sq())
}

/// Salton's cosine in the joint space of terms and term-qualifier pairs.
pub fn salton_cosine_qualified(x: &QualifiedTermVector, y: &QualifiedTermVector) -> Result<f64> {
    cosine(x.dot(y), x.norm_sq(), y.norm_sq())
}

/// `xᵀSy` over the sparse supports.
pub fn bilinear_form(x: &TermVector, s: &SimMatrix, y: &TermVector) -> f64 {
    let mut acc = 0.0;
    for &(i, xi) in x.entries() {
        let mut row = 0.0;
        for &(j, yj) in y.entries() {
            row += s.get(i, j) * yj;
        }
        acc += xi * row;
    }
    acc
}

fn vector_order(x: &TermVector, y: &TermVector) -> Ordering {
    for (a, b) in x.entries().iter().zip(y.entries()) {
        let o = a.0.cmp(&b.0).then_with(|| a.1.total_cmp(&b.1));
        if o != Ordering::Equal {
            return o;
        }
    }
    x.len().cmp(&y.len())
}

/// Soft cosine given precomputed self forms `xᵀSx` and `yᵀSy`.
pub(crate) fn soft_cosine_with_forms(
    x: &TermVector,
    y: &TermVector,
    s: &SimMatrix,
    x_form: f64,
    y_form: f64,
) -> f64 {
    // The numerator is evaluated in one canonical operand order so that
    // swapping the documents reproduces the same bits.
    let numerator = if vector_order(x, y) == Ordering::Greater {
        bilinear_form(y, s, x)
    } else {
        bilinear_form(x, s, y)
    };
    (numerator / (x_form * y_form).sqrt()).min(1.0)
}

pub(crate) fn self_form(x: &TermVector, s: &SimMatrix, label: &str) -> Result<f64> {
    if x.is_empty() || x.norm_sq() <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let form = bilinear_form(x, s, x);
    if form > 0.0 {
        Ok(form)
    } else {
        Err(Error::NonPositiveQuadraticForm {
            doc: label.to_string(),
            value: form,
        })
    }
}

pub fn soft_cosine(x: &TermVector, y: &TermVector, s: &SimMatrix) -> Result<f64> {
    let x_form = self_form(x, s, "first operand")?;
    let y_form = self_form(y, s, "second operand")?;
    Ok(soft_cosine_with_forms(x, y, s, x_form, y_form))
}

/// A document's terms with their major flags, sorted by term.
pub type TermList = Vec<(TermIdx, bool)>;

pub fn term_list(doc: &Document, vocab: &Vocabulary) -> Result<TermList> {
    if doc.is_empty() {
        return Err(Error::EmptyDocument(doc.id.to_string()));
    }
    let mut out = doc
        .annotations
        .iter()
        .map(|a| Ok((vocab.require(a.term.as_str())?, a.is_major)))
        .collect::<Result<TermList>>()?;
    out.sort();
    Ok(out)
}

/// Drops minor terms for the slim variant.
pub fn slim_terms(terms: &[(TermIdx, bool)]) -> TermList {
    terms.iter().copied().filter(|&(_, major)| major).collect()
}

fn one_sided(
    from: &[(TermIdx, bool)],
    to: &[(TermIdx, bool)],
    best: &impl Fn(TermIdx, &[(TermIdx, bool)]) -> f64,
    w: f64,
) -> (f64, f64) {
    from.iter().fold((0.0, 0.0), |(num, den), &(t, major)| {
        let wt = if major { w } else { 1.0 };
        (num + best(t, to) * wt, den + wt)
    })
}

/// MTS over resolved term lists. Callers apply the slim filter first.
pub fn mts_terms(
    a: &[(TermIdx, bool)],
    b: &[(TermIdx, bool)],
    sim: &impl TermSimilarity,
    w: f64,
) -> Result<f64> {
    check_major_weight(w)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::ZeroVector);
    }
    let best = |t: TermIdx, other: &[(TermIdx, bool)]| {
        other
            .iter()
            .map(|&(u, _)| sim.sim(t, u))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (num_a, den_a) = one_sided(a, b, &best, w);
    let (num_b, den_b) = one_sided(b, a, &best, w);
    Ok(((num_a + num_b) / (den_a + den_b)).clamp(0.0, 1.0))
}

pub fn mts(
    doc_a: &Document,
    doc_b: &Document,
    vocab: &Vocabulary,
    sim: &impl TermSimilarity,
    w: f64,
    slim: bool,
) -> Result<f64> {
    let (mut a, mut b) = (term_list(doc_a, vocab)?, term_list(doc_b, vocab)?);
    if slim {
        a = slim_terms(&a);
        if a.is_empty() {
            return Err(Error::NoMajorTerms(doc_a.id.to_string()));
        }
        b = slim_terms(&b);
        if b.is_empty() {
            return Err(Error::NoMajorTerms(doc_b.id.to_string()));
        }
    }
    mts_terms(&a, &b, sim, w)
}

/// Minimum-distance variant of MTS: the negated weighted mean of each term's
/// smallest distance to the other document. Disconnected pairs count as
/// `unreachable`.
pub fn mts_min_distance(
    a: &[(TermIdx, bool)],
    b: &[(TermIdx, bool)],
    distances: &DistanceTable,
    unreachable: f64,
    w: f64,
) -> Result<f64> {
    check_major_weight(w)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::ZeroVector);
    }
    let nearest = |t: TermIdx, other: &[(TermIdx, bool)]| {
        other
            .iter()
            .map(|&(u, _)| {
                if t == u {
                    0.0
                } else {
                    distances.get(t, u).unwrap_or(unreachable)
                }
            })
            .fold(f64::INFINITY, f64::min)
    };
    let (num_a, den_a) = one_sided(a, b, &nearest, w);
    let (num_b, den_b) = one_sided(b, a, &nearest, w);
    Ok(-((num_a + num_b) / (den_a + den_b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termgraph::{GraphKind, SimMeta};
    use crate::vocab::test_util::{doc, vocab};

    fn meta() -> SimMeta {
        SimMeta {
            graph: GraphKind::Unweighted,
            lambda: 1.0,
            eps: 0.0,
        }
    }

    fn tv(entries: &[(u32, f64)]) -> TermVector {
        TermVector::from_entries(entries.iter().map(|&(t, w)| (TermIdx(t), w)).collect())
    }

    #[test]
    fn salton_fixtures() {
        let a = tv(&[(0, 1.0), (1, 1.0)]);
        let b = tv(&[(0, 1.0), (2, 1.0)]);
        assert_eq!(salton_cosine(&a, &a).unwrap(), 1.0);
        assert_eq!(salton_cosine(&a, &tv(&[(5, 1.0)])).unwrap(), 0.0);
        assert!((salton_cosine(&a, &b).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            salton_cosine(&a, &TermVector::default()),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn soft_cosine_fixtures() {
        let s = SimMatrix::from_pairs(3, meta(), [(TermIdx(0), TermIdx(1), 0.5)]).unwrap();
        let x = tv(&[(0, 1.0)]);
        let y = tv(&[(1, 1.0)]);
        assert_eq!(soft_cosine(&x, &y, &s).unwrap(), 0.5);
        let z = tv(&[(0, 2.0), (1, 0.3), (2, 1.0)]);
        assert!((soft_cosine(&z, &z, &s).unwrap() - 1.0).abs() < 1e-12);

        let id = SimMatrix::diagonal(3, meta());
        let a = tv(&[(0, 1.5), (2, 0.5)]);
        assert_eq!(
            soft_cosine(&a, &z, &id).unwrap(),
            salton_cosine(&a, &z).unwrap()
        );
        assert!(soft_cosine(&TermVector::default(), &z, &id).is_err());
    }

    #[test]
    fn soft_cosine_rejects_non_positive_form() {
        let s = SimMatrix::diagonal(2, meta());
        let zero = tv(&[(0, 0.0)]);
        assert!(soft_cosine(&zero, &tv(&[(1, 1.0)]), &s).is_err());
    }

    #[test]
    fn mts_fixtures() {
        let v = vocab(&[("t1", &[]), ("t2", &[]), ("t3", &[])]);
        let (t1, t2, t3) = (TermIdx(0), TermIdx(1), TermIdx(2));
        let s = SimMatrix::from_pairs(3, meta(), [(t2, t3, 0.4), (t2, t1, 0.1), (t1, t3, 0.2)])
            .unwrap();
        let a = doc("a", &[("t1", false, &[]), ("t2", false, &[])]);
        let b = doc("b", &[("t1", false, &[]), ("t3", false, &[])]);
        for w in [1.0, 2.0, 7.0] {
            assert!((mts(&a, &b, &v, &s, w, false).unwrap() - 0.7).abs() < 1e-12);
        }
        let a_major = doc("a", &[("t1", true, &[]), ("t2", false, &[])]);
        assert!((mts(&a_major, &b, &v, &s, 2.0, false).unwrap() - 0.76).abs() < 1e-12);
        assert_eq!(mts(&a, &a, &v, &s, 3.0, false).unwrap(), 1.0);
        assert!(matches!(
            mts(&a, &b, &v, &s, 1.0, true),
            Err(Error::NoMajorTerms(_))
        ));
        assert_eq!(mts(&a_major, &a_major, &v, &s, 1.0, true).unwrap(), 1.0);
    }
}
