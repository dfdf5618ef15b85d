//! Sparse document vectors: binary, IC/major-weighted, and qualifier-augmented.

use crate::error::{Error, Result};
use crate::infocontent::IcTable;
use crate::vocab::{Document, QualifierIdx, TermIdx, Vocabulary};

/// Sparse non-negative term weights, sorted by term.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TermVector {
    entries: Vec<(TermIdx, f64)>,
}

impl TermVector {
    /// Entries need not be sorted; terms must be unique.
    pub fn from_entries(mut entries: Vec<(TermIdx, f64)>) -> Self {
        entries.sort_by_key(|&(t, _)| t);
        debug_assert!(entries.windows(2).all(|w| w[0].0 != w[1].0));
        Self { entries }
    }

    pub fn entries(&self) -> &[(TermIdx, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, t: TermIdx) -> f64 {
        self.entries
            .binary_search_by_key(&t, |&(x, _)| x)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn dot(&self, other: &TermVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum()
    }
}

/// Term weights plus indicator entries for each (term, qualifier) pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QualifiedTermVector {
    pub term_part: TermVector,
    /// Sorted, unique; every term also appears in `term_part`.
    pub qual_part: Vec<(TermIdx, QualifierIdx)>,
}

impl QualifiedTermVector {
    pub fn dot(&self, other: &QualifiedTermVector) -> f64 {
        let (a, b) = (&self.qual_part, &other.qual_part);
        let (mut i, mut j, mut shared) = (0, 0, 0usize);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        self.term_part.dot(&other.term_part) + shared as f64
    }

    pub fn norm_sq(&self) -> f64 {
        self.term_part.norm_sq() + self.qual_part.len() as f64
    }
}

pub(crate) fn check_major_weight(w: f64) -> Result<()> {
    if w >= 1.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "major weight must be >= 1, got {w}"
        )))
    }
}

/// Base weight per term (IC, or 1 without a table), multiplied by `w` for
/// major terms.
pub fn weighted_vector(
    doc: &Document,
    vocab: &Vocabulary,
    ic: Option<&IcTable>,
    w: f64,
) -> Result<TermVector> {
    check_major_weight(w)?;
    if doc.is_empty() {
        return Err(Error::EmptyDocument(doc.id.to_string()));
    }
    let entries = doc
        .annotations
        .iter()
        .map(|a| {
            let t = vocab.require(a.term.as_str())?;
            let base = match ic {
                Some(table) => *table
                    .values()
                    .get(t.index())
                    .ok_or_else(|| Error::MissingIc(a.term.to_string()))?,
                None => 1.0,
            };
            Ok((t, if a.is_major { base * w } else { base }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TermVector::from_entries(entries))
}

/// Weight 1 on every annotated term; major status is ignored.
pub fn binary_vector(doc: &Document, vocab: &Vocabulary) -> Result<TermVector> {
    weighted_vector(doc, vocab, None, 1.0)
}

/// Minor term -> IC, major term -> IC * w.
pub fn ic_weighted_vector(
    doc: &Document,
    vocab: &Vocabulary,
    ic: &IcTable,
    w: f64,
) -> Result<TermVector> {
    weighted_vector(doc, vocab, Some(ic), w)
}

/// `term_part` as [`weighted_vector`]; `qual_part` marks each (term, qualifier)
/// pair present. Major status does not scale qualifier entries.
pub fn qualified_vector(
    doc: &Document,
    vocab: &Vocabulary,
    ic: Option<&IcTable>,
    w: f64,
) -> Result<QualifiedTermVector> {
    let term_part = weighted_vector(doc, vocab, ic, w)?;
    let mut qual_part = Vec::new();
    for a in &doc.annotations {
        let t = vocab.require(a.term.as_str())?;
        for q in &a.qualifiers {
            let qi = vocab
                .qualifier_idx(q.as_str())
                .ok_or_else(|| Error::UnknownDocQualifier {
                    doc: doc.id.to_string(),
                    qualifier: q.to_string(),
                })?;
            qual_part.push((t, qi));
        }
    }
    qual_part.sort();
    qual_part.dedup();
    Ok(QualifiedTermVector {
        term_part,
        qual_part,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::test_util::doc;
    use crate::vocab::{parse_vocabulary, Document};

    fn fixture() -> Vocabulary {
        parse_vocabulary(
            r#"{"kind":"qualifier","id":"q1"}
{"kind":"qualifier","id":"q2"}
{"id":"t1"}
{"id":"t2"}
{"id":"t3"}"#
                .as_bytes(),
        )
        .unwrap()
    }

    fn ic(v: &Vocabulary) -> IcTable {
        // t1 carries the fixture IC of a child term, t2 that of the root.
        let mut vals = vec![0.0; v.len()];
        vals[v.idx("t1").unwrap().index()] = 1.704_748_092_238_425_3;
        vals[v.idx("t2").unwrap().index()] = 0.606_135_803_570_315_6;
        vals[v.idx("t3").unwrap().index()] = 1.299_282_984_130_260_9;
        IcTable::from_values(vals)
    }

    #[test]
    fn binary_ignores_major() {
        let v = fixture();
        let d = doc("d", &[("t1", true, &[]), ("t2", false, &[])]);
        let x = binary_vector(&d, &v).unwrap();
        assert_eq!(x.entries(), &[(TermIdx(0), 1.0), (TermIdx(1), 1.0)]);
    }

    #[test]
    fn empty_document_errors() {
        let v = fixture();
        let d = Document::new(crate::vocab::DocId::new("e").unwrap(), []);
        assert!(matches!(
            binary_vector(&d, &v),
            Err(Error::EmptyDocument(_))
        ));
        assert!(matches!(
            ic_weighted_vector(&d, &v, &ic(&v), 2.0),
            Err(Error::EmptyDocument(_))
        ));
    }

    #[test]
    fn ic_weighting() {
        let v = fixture();
        let table = ic(&v);
        let t1 = v.idx("t1").unwrap();
        let minor = ic_weighted_vector(&doc("d", &[("t1", false, &[])]), &v, &table, 3.0).unwrap();
        assert_eq!(minor.get(t1), 1.704_748_092_238_425_3);
        let major = ic_weighted_vector(&doc("d", &[("t1", true, &[])]), &v, &table, 3.0).unwrap();
        assert!((major.get(t1) - 5.114_244_276_715_276).abs() < 1e-12);
        let w1 = ic_weighted_vector(&doc("d", &[("t1", true, &[])]), &v, &table, 1.0).unwrap();
        assert_eq!(w1, minor);
        assert!(ic_weighted_vector(&doc("d", &[("t1", true, &[])]), &v, &table, 0.5).is_err());
    }

    #[test]
    fn qualified_parts() {
        let v = fixture();
        let table = ic(&v);
        let d = doc("d", &[("t2", false, &["q1", "q2"])]);
        let x = qualified_vector(&d, &v, Some(&table), 1.0).unwrap();
        let t2 = v.idx("t2").unwrap();
        assert_eq!(x.term_part.entries(), &[(t2, 0.606_135_803_570_315_6)]);
        assert_eq!(
            x.qual_part,
            vec![(t2, QualifierIdx(0)), (t2, QualifierIdx(1))]
        );

        let plain = doc("d", &[("t1", false, &[]), ("t3", false, &[])]);
        let x = qualified_vector(&plain, &v, Some(&table), 1.0).unwrap();
        assert!(x.qual_part.is_empty());
        assert_eq!(
            x.term_part,
            ic_weighted_vector(&plain, &v, &table, 1.0).unwrap()
        );
        assert_eq!(x, qualified_vector(&plain, &v, Some(&table), 2.0).unwrap());
    }

    #[test]
    fn binary_equals_unit_ic() {
        let v = fixture();
        let d = doc("d", &[("t1", true, &["q1"]), ("t3", false, &[])]);
        let ones = IcTable::from_values(vec![1.0; v.len()]);
        assert_eq!(
            binary_vector(&d, &v).unwrap(),
            ic_weighted_vector(&d, &v, &ones, 1.0).unwrap()
        );
    }
}
