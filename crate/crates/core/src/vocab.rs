//! Vocabulary and corpus data model.
//!
//! A [`Vocabulary`] is a set of terms linked to their parents (a DAG, since a
//! term may sit at several positions of the hierarchy) plus an inventory of
//! qualifiers. A [`Corpus`] holds documents annotated with vocabulary terms,
//! each flagged major or minor and optionally carrying qualifiers.
//!
//! Both are read from line-delimited JSON. Terms are stored sorted by id, so
//! a [`TermIdx`] order is the lexicographic order of the ids.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            /// Fails on an empty string.
            pub fn new(id: impl Into<String>) -> Result<Self> {
                let id = id.into();
                if id.is_empty() {
                    return Err(Error::InvalidParameter(concat!("empty ", stringify!($name)).into()));
                }
                Ok(Self(id))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

string_id!(
    /// Identifier of a vocabulary term (e.g. a MeSH descriptor UI).
    TermId
);
string_id!(
    /// Identifier of a qualifier (subheading).
    QualifierId
);
string_id!(
    /// Identifier of an annotated document.
    DocId
);
string_id!(
    /// Identifier of a benchmark topic.
    TopicId
);

/// Dense position of a term inside its [`Vocabulary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermIdx(pub u32);

impl TermIdx {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense position of a qualifier inside its [`Vocabulary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QualifierIdx(pub u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub id: TermId,
    pub label: String,
    pub parents: BTreeSet<TermId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Qualifier {
    pub id: QualifierId,
    pub label: String,
}

/// Terms, their parent links and the qualifier inventory. Immutable once built.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    terms: Vec<Term>,
    index: HashMap<TermId, TermIdx>,
    parents: Vec<Vec<TermIdx>>,
    children: Vec<Vec<TermIdx>>,
    qualifiers: Vec<Qualifier>,
    qualifier_index: HashMap<QualifierId, QualifierIdx>,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.qualifiers == other.qualifiers
    }
}

impl Vocabulary {
    /// Builds a vocabulary, rejecting duplicate ids, self-parents and dangling
    /// parent references. Cycles are allowed here and reported by [`validate`].
    pub fn new(terms: Vec<Term>, qualifiers: Vec<Qualifier>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let mut terms = terms;
        terms.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in terms.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateTerm(pair[0].id.to_string()));
            }
        }
        let index: HashMap<TermId, TermIdx> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), TermIdx(i as u32)))
            .collect();

        let mut parents = vec![Vec::new(); terms.len()];
        let mut children = vec![Vec::new(); terms.len()];
        for (i, term) in terms.iter().enumerate() {
            for parent in &term.parents {
                if *parent == term.id {
                    return Err(Error::SelfParent(term.id.to_string()));
                }
                let p = *index.get(parent).ok_or_else(|| Error::DanglingParent {
                    term: term.id.to_string(),
                    parent: parent.to_string(),
                })?;
                parents[i].push(p);
                children[p.index()].push(TermIdx(i as u32));
            }
        }

        let mut qualifiers = qualifiers;
        qualifiers.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in qualifiers.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateQualifier(pair[0].id.to_string()));
            }
        }
        let qualifier_index = qualifiers
            .iter()
            .enumerate()
            .map(|(i, q)| (q.id.clone(), QualifierIdx(i as u32)))
            .collect();

        Ok(Self {
            terms,
            index,
            parents,
            children,
            qualifiers,
            qualifier_index,
        })
    }

    /// Number of terms, `n`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term(&self, idx: TermIdx) -> &Term {
        &self.terms[idx.index()]
    }

    pub fn id(&self, idx: TermIdx) -> &TermId {
        &self.terms[idx.index()].id
    }

    pub fn idx(&self, id: &str) -> Option<TermIdx> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<TermIdx> {
        self.idx(id)
            .ok_or_else(|| Error::UnknownTerm(id.to_string()))
    }

    pub fn parents(&self, idx: TermIdx) -> &[TermIdx] {
        &self.parents[idx.index()]
    }

    pub fn children(&self, idx: TermIdx) -> &[TermIdx] {
        &self.children[idx.index()]
    }

    pub fn indices(&self) -> impl Iterator<Item = TermIdx> {
        (0..self.terms.len() as u32).map(TermIdx)
    }

    /// Number of parent-child pairs, `m`.
    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn qualifiers(&self) -> &[Qualifier] {
        &self.qualifiers
    }

    pub fn qualifier_idx(&self, id: &str) -> Option<QualifierIdx> {
        self.qualifier_index.get(id).copied()
    }

    /// Kahn ordering with parents before children. Fails on a directed cycle.
    pub fn topological_order(&self) -> Result<Vec<TermIdx>> {
        let mut pending: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut queue: VecDeque<TermIdx> =
            self.indices().filter(|t| pending[t.index()] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(t) = queue.pop_front() {
            order.push(t);
            for &c in self.children(t) {
                pending[c.index()] -= 1;
                if pending[c.index()] == 0 {
                    queue.push_back(c);
                }
            }
        }
        if order.len() != self.len() {
            let stuck = self
                .indices()
                .find(|t| pending[t.index()] > 0)
                .expect("cycle member");
            return Err(Error::Cycle(self.id(stuck).to_string()));
        }
        Ok(order)
    }
}

#[derive(Deserialize)]
struct VocabRecord {
    #[serde(default)]
    kind: Option<String>,
    #[serde(default)]
    id: Option<String>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    parents: Vec<String>,
}

#[derive(Serialize)]
struct TermRecordOut<'a> {
    id: &'a str,
    label: &'a str,
    parents: Vec<&'a str>,
}

#[derive(Serialize)]
struct QualifierRecordOut<'a> {
    kind: &'static str,
    id: &'a str,
    label: &'a str,
}

/// Header record written at the top of canonical vocabulary files.
pub const VOCABULARY_HEADER: &str =
    r#"{"kind":"header","format":"vocab-relate/vocabulary","version":1}"#;

fn malformed(line: usize, message: impl Into<String>) -> Error {
    Error::Malformed {
        line,
        message: message.into(),
    }
}

/// Reads a vocabulary from line-delimited JSON.
///
/// Term records carry `id`, `label` and `parents`. Records with
/// `"kind": "qualifier"` declare qualifiers; `"kind": "header"` records are
/// skipped. Blank lines are ignored, as are unknown keys.
pub fn parse_vocabulary<R: BufRead>(reader: R) -> Result<Vocabulary> {
    let mut terms = Vec::new();
    let mut qualifiers = Vec::new();
    let mut seen_terms = BTreeSet::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: VocabRecord =
            serde_json::from_str(&line).map_err(|e| malformed(line_no, e.to_string()))?;
        let id = || -> Result<String> {
            match &rec.id {
                Some(id) if !id.is_empty() => Ok(id.clone()),
                _ => Err(malformed(line_no, "missing or empty `id`")),
            }
        };
        match rec.kind.as_deref() {
            None | Some("term") => {
                let id = TermId::new(id()?)?;
                if !seen_terms.insert(id.clone()) {
                    return Err(Error::DuplicateTerm(id.to_string()));
                }
                let parents = rec
                    .parents
                    .iter()
                    .map(|p| {
                        TermId::new(p.as_str()).map_err(|_| malformed(line_no, "empty parent id"))
                    })
                    .collect::<Result<BTreeSet<_>>>()?;
                terms.push(Term {
                    id,
                    label: rec.label.clone().unwrap_or_default(),
                    parents,
                });
            }
            Some("qualifier") => qualifiers.push(Qualifier {
                id: QualifierId::new(id()?)?,
                label: rec.label.clone().unwrap_or_default(),
            }),
            Some("header") => {}
            Some(other) => {
                return Err(malformed(line_no, format!("unknown record kind `{other}`")))
            }
        }
    }
    Vocabulary::new(terms, qualifiers)
}

pub fn write_vocabulary<W: Write>(vocab: &Vocabulary, out: W) -> Result<()> {
    write_vocabulary_records(vocab.terms(), vocab.qualifiers(), out)
}

/// Writes the canonical format from raw records, without validating them.
pub fn write_vocabulary_records<W: Write>(
    terms: &[Term],
    qualifiers: &[Qualifier],
    mut out: W,
) -> Result<()> {
    writeln!(out, "{VOCABULARY_HEADER}")?;
    for q in qualifiers {
        let rec = QualifierRecordOut {
            kind: "qualifier",
            id: q.id.as_str(),
            label: &q.label,
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&rec).expect("serializable")
        )?;
    }
    for t in terms {
        let rec = TermRecordOut {
            id: t.id.as_str(),
            label: &t.label,
            parents: t.parents.iter().map(TermId::as_str).collect(),
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&rec).expect("serializable")
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub term: TermId,
    pub is_major: bool,
    pub qualifiers: BTreeSet<QualifierId>,
}

/// A document and its term annotations, at most one per term, sorted by term id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub id: DocId,
    pub annotations: Vec<Annotation>,
}

impl Document {
    /// Builds a document, merging repeated terms (major wins, qualifiers union).
    pub fn new(id: DocId, annotations: impl IntoIterator<Item = Annotation>) -> Self {
        let mut merged: BTreeMap<TermId, Annotation> = BTreeMap::new();
        for a in annotations {
            merge_annotation(&mut merged, a);
        }
        Self {
            id,
            annotations: merged.into_values().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }
}

fn merge_annotation(into: &mut BTreeMap<TermId, Annotation>, a: Annotation) -> bool {
    match into.get_mut(&a.term) {
        Some(existing) => {
            existing.is_major |= a.is_major;
            existing.qualifiers.extend(a.qualifiers);
            true
        }
        None => {
            into.insert(a.term.clone(), a);
            false
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    pub documents: BTreeMap<DocId, Document>,
}

impl Corpus {
    pub fn from_documents(docs: impl IntoIterator<Item = Document>) -> Self {
        let mut corpus = Corpus::default();
        for d in docs {
            match corpus.documents.get_mut(&d.id) {
                Some(existing) => {
                    let mut merged: BTreeMap<TermId, Annotation> = existing
                        .annotations
                        .drain(..)
                        .map(|a| (a.term.clone(), a))
                        .collect();
                    for a in d.annotations {
                        merge_annotation(&mut merged, a);
                    }
                    existing.annotations = merged.into_values().collect();
                }
                None => {
                    corpus.documents.insert(d.id.clone(), d);
                }
            }
        }
        corpus
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&Document> {
        self.get(id)
            .ok_or_else(|| Error::UnknownDocument(id.to_string()))
    }

    pub fn empty_documents(&self) -> Vec<&DocId> {
        self.documents
            .values()
            .filter(|d| d.is_empty())
            .map(|d| &d.id)
            .collect()
    }
}

/// How unknown terms and qualifiers are handled while reading a corpus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum IngestMode {
    Strict,
    #[default]
    Lenient,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub skipped_terms: usize,
    pub skipped_qualifiers: usize,
    pub merged_annotations: usize,
    pub merged_documents: usize,
    pub empty_documents: Vec<DocId>,
}

#[derive(Deserialize)]
struct CorpusRecord {
    id: String,
    #[serde(default)]
    terms: Vec<AnnotationRecord>,
}

#[derive(Deserialize, Serialize)]
struct AnnotationRecord {
    term: String,
    #[serde(default)]
    major: bool,
    #[serde(default)]
    qualifiers: Vec<String>,
}

#[derive(Serialize)]
struct CorpusRecordOut<'a> {
    id: &'a str,
    terms: Vec<AnnotationRecord>,
}

/// Reads a corpus from line-delimited JSON, resolving terms and qualifiers
/// against `vocab`.
pub fn parse_corpus<R: BufRead>(
    reader: R,
    vocab: &Vocabulary,
    mode: IngestMode,
) -> Result<(Corpus, IngestReport)> {
    let mut report = IngestReport::default();
    let mut documents: BTreeMap<DocId, BTreeMap<TermId, Annotation>> = BTreeMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| malformed(line_no, e.to_string()))?;
        let doc_id = DocId::new(rec.id).map_err(|_| malformed(line_no, "empty document id"))?;
        if documents.contains_key(&doc_id) {
            report.merged_documents += 1;
        }
        let annotations = documents.entry(doc_id.clone()).or_default();
        for a in rec.terms {
            if vocab.idx(&a.term).is_none() {
                match mode {
                    IngestMode::Strict => {
                        return Err(Error::UnknownDocTerm {
                            doc: doc_id.to_string(),
                            term: a.term,
                        })
                    }
                    IngestMode::Lenient => {
                        report.skipped_terms += 1;
                        continue;
                    }
                }
            }
            let mut qualifiers = BTreeSet::new();
            for q in a.qualifiers {
                if vocab.qualifier_idx(&q).is_none() {
                    match mode {
                        IngestMode::Strict => {
                            return Err(Error::UnknownDocQualifier {
                                doc: doc_id.to_string(),
                                qualifier: q,
                            })
                        }
                        IngestMode::Lenient => {
                            report.skipped_qualifiers += 1;
                            continue;
                        }
                    }
                }
                qualifiers.insert(
                    QualifierId::new(q).map_err(|_| malformed(line_no, "empty qualifier id"))?,
                );
            }
            let annotation = Annotation {
                term: TermId::new(a.term).map_err(|_| malformed(line_no, "empty term id"))?,
                is_major: a.major,
                qualifiers,
            };
            if merge_annotation(annotations, annotation) {
                report.merged_annotations += 1;
            }
        }
    }
    let corpus = Corpus {
        documents: documents
            .into_iter()
            .map(|(id, anns)| {
                let doc = Document {
                    id: id.clone(),
                    annotations: anns.into_values().collect(),
                };
                (id, doc)
            })
            .collect(),
    };
    report.empty_documents = corpus.empty_documents().into_iter().cloned().collect();
    Ok((corpus, report))
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    for doc in corpus.documents.values() {
        let rec = CorpusRecordOut {
            id: doc.id.as_str(),
            terms: doc
                .annotations
                .iter()
                .map(|a| AnnotationRecord {
                    term: a.term.to_string(),
                    major: a.is_major,
                    qualifiers: a.qualifiers.iter().map(ToString::to_string).collect(),
                })
                .collect(),
        };
        writeln!(
            out,
            "{}",
            serde_json::to_string(&rec).expect("serializable")
        )?;
    }
    Ok(())
}

/// Structural summary of a vocabulary.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub n_terms: usize,
    pub n_edges: usize,
    pub n_qualifiers: usize,
    pub n_roots: usize,
    /// One representative directed cycle per cyclic strongly connected component,
    /// each listed from its smallest id along parent links.
    pub cycles: Vec<Vec<TermId>>,
    /// Every term that lies on some directed cycle.
    pub cyclic_terms: BTreeSet<TermId>,
    /// Terms with neither parents nor children.
    pub orphans: Vec<TermId>,
}

impl ValidationReport {
    pub fn is_acyclic(&self) -> bool {
        self.cycles.is_empty()
    }
}

pub fn validate(vocab: &Vocabulary) -> ValidationReport {
    let n = vocab.len();
    let components = strongly_connected_components(vocab);
    let mut cycles = Vec::new();
    let mut cyclic_terms = BTreeSet::new();
    for comp in &components {
        // Self-loops are rejected at construction, so only multi-node
        // components can hold a cycle.
        if comp.len() < 2 {
            continue;
        }
        let mut members = vec![false; n];
        for &t in comp {
            members[t.index()] = true;
            cyclic_terms.insert(vocab.id(t).clone());
        }
        let start = *comp.iter().min().expect("non-empty component");
        cycles.push(
            cycle_through(vocab, start, &members)
                .into_iter()
                .map(|t| vocab.id(t).clone())
                .collect(),
        );
    }
    cycles.sort();

    let orphans = vocab
        .indices()
        .filter(|&t| vocab.parents(t).is_empty() && vocab.children(t).is_empty())
        .map(|t| vocab.id(t).clone())
        .collect();

    ValidationReport {
        n_terms: n,
        n_edges: vocab.edge_count(),
        n_qualifiers: vocab.qualifiers().len(),
        n_roots: vocab
            .indices()
            .filter(|&t| vocab.parents(t).is_empty())
            .count(),
        cycles,
        cyclic_terms,
        orphans,
    }
}

/// Shortest child-to-parent cycle from `start` back to itself inside one component.
fn cycle_through(vocab: &Vocabulary, start: TermIdx, members: &[bool]) -> Vec<TermIdx> {
    let mut prev: HashMap<TermIdx, TermIdx> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        for &p in vocab.parents(t) {
            if !members[p.index()] {
                continue;
            }
            if p == start {
                let mut path = vec![t];
                let mut cur = t;
                while cur != start {
                    cur = prev[&cur];
                    path.push(cur);
                }
                path.reverse();
                return path;
            }
            if let std::collections::hash_map::Entry::Vacant(e) = prev.entry(p) {
                e.insert(t);
                queue.push_back(p);
            }
        }
    }
    unreachable!("strongly connected component without a cycle")
}

/// Iterative Tarjan over child -> parent edges.
fn strongly_connected_components(vocab: &Vocabulary) -> Vec<Vec<TermIdx>> {
    const UNSEEN: usize = usize::MAX;
    let n = vocab.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut next = 0usize;
    let mut out = Vec::new();

    for root in vocab.indices() {
        if index[root.index()] != UNSEEN {
            continue;
        }
        let mut call: Vec<(TermIdx, usize)> = vec![(root, 0)];
        index[root.index()] = next;
        low[root.index()] = next;
        next += 1;
        stack.push(root);
        on_stack[root.index()] = true;

        while let Some(&mut (v, ref mut edge)) = call.last_mut() {
            let parents = vocab.parents(v);
            if *edge < parents.len() {
                let w = parents[*edge];
                *edge += 1;
                if index[w.index()] == UNSEEN {
                    index[w.index()] = next;
                    low[w.index()] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w.index()] = true;
                    call.push((w, 0));
                } else if on_stack[w.index()] {
                    low[v.index()] = low[v.index()].min(index[w.index()]);
                }
            } else {
                call.pop();
                if let Some(&(u, _)) = call.last() {
                    low[u.index()] = low[u.index()].min(low[v.index()]);
                }
                if low[v.index()] == index[v.index()] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w.index()] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort();
                    out.push(comp);
                }
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod test_util {
    use super::*;

    /// Builds a vocabulary from `(id, parents)` pairs.
    pub fn vocab(spec: &[(&str, &[&str])]) -> Vocabulary {
        Vocabulary::new(
            spec.iter()
                .map(|(id, parents)| Term {
                    id: TermId::new(*id).unwrap(),
                    label: id.to_uppercase(),
                    parents: parents.iter().map(|p| TermId::new(*p).unwrap()).collect(),
                })
                .collect(),
            Vec::new(),
        )
        .unwrap()
    }

    pub fn doc(id: &str, terms: &[(&str, bool, &[&str])]) -> Document {
        Document::new(
            DocId::new(id).unwrap(),
            terms.iter().map(|(t, major, quals)| Annotation {
                term: TermId::new(*t).unwrap(),
                is_major: *major,
                qualifiers: quals
                    .iter()
                    .map(|q| QualifierId::new(*q).unwrap())
                    .collect(),
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::test_util::vocab;
    use super::*;

    const TWO_LINE: &str = r#"{"id": "r", "label": "Root", "parents": []}
{"id": "c", "label": "Child", "parents": ["r"]}
"#;

    #[test]
    fn parses_minimal_vocabulary() {
        let v = parse_vocabulary(TWO_LINE.as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.edge_count(), 1);
        let c = v.idx("c").unwrap();
        assert_eq!(v.id(v.parents(c)[0]).as_str(), "r");
    }

    #[test]
    fn dangling_parent_names_the_id() {
        let err =
            parse_vocabulary(r#"{"id":"c","label":"","parents":["nope"]}"#.as_bytes()).unwrap_err();
        match err {
            Error::DanglingParent { parent, .. } => assert_eq!(parent, "nope"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "{\"id\":\"a\"}\n\nnot json\n";
        match parse_vocabulary(input.as_bytes()).unwrap_err() {
            Error::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_and_self_parent_rejected() {
        let dup = "{\"id\":\"a\"}\n{\"id\":\"a\"}\n";
        assert!(matches!(
            parse_vocabulary(dup.as_bytes()),
            Err(Error::DuplicateTerm(_))
        ));
        let selfp = r#"{"id":"a","parents":["a"]}"#;
        assert!(matches!(
            parse_vocabulary(selfp.as_bytes()),
            Err(Error::SelfParent(_))
        ));
        assert!(matches!(
            parse_vocabulary("".as_bytes()),
            Err(Error::EmptyVocabulary)
        ));
    }

    #[test]
    fn qualifier_and_header_records() {
        let input = format!(
            "{VOCABULARY_HEADER}\n{}\n{}\n",
            r#"{"kind":"qualifier","id":"Q1","label":"rehabilitation"}"#,
            r#"{"id":"t","label":"T","parents":[],"extra":1}"#
        );
        let v = parse_vocabulary(input.as_bytes()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.qualifiers().len(), 1);
        assert!(v.qualifier_idx("Q1").is_some());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let input = format!(
            "{}\n{}\n{}\n{}\n",
            r#"{"kind":"qualifier","id":"Q2","label":"q two"}"#,
            r#"{"id":"g","label":"G \"quoted\"","parents":["a","b"]}"#,
            r#"{"id":"a","label":"A","parents":["r"]}"#,
            r#"{"id":"b","label":"B","parents":["r"]}"#,
        ) + r#"{"id":"r","label":"R","parents":[]}"#;
        let v = parse_vocabulary(input.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_vocabulary(&v, &mut buf).unwrap();
        let back = parse_vocabulary(buf.as_slice()).unwrap();
        assert_eq!(v, back);
    }

    fn small_vocab() -> Vocabulary {
        let input = r#"{"kind":"qualifier","id":"q1"}
{"kind":"qualifier","id":"q2"}
{"id":"t1"}
{"id":"t2"}
"#;
        parse_vocabulary(input.as_bytes()).unwrap()
    }

    #[test]
    fn parses_one_document() {
        let v = small_vocab();
        let input = r#"{"id":"d1","terms":[{"term":"t1","major":true},{"term":"t2","major":false,"qualifiers":["q1"]}]}"#;
        let (corpus, report) = parse_corpus(input.as_bytes(), &v, IngestMode::Strict).unwrap();
        assert_eq!(corpus.len(), 1);
        let d = corpus.get("d1").unwrap();
        assert_eq!(d.annotations.len(), 2);
        assert!(d.annotations[0].is_major);
        assert_eq!(report, IngestReport::default());
    }

    #[test]
    fn unknown_term_strict_vs_lenient() {
        let v = small_vocab();
        let input = r#"{"id":"d1","terms":[{"term":"zz"},{"term":"t1","qualifiers":["qx","q1"]}]}"#;
        match parse_corpus(input.as_bytes(), &v, IngestMode::Strict).unwrap_err() {
            Error::UnknownDocTerm { doc, term } => {
                assert_eq!(doc, "d1");
                assert_eq!(term, "zz");
            }
            other => panic!("unexpected {other:?}"),
        }
        let (corpus, report) = parse_corpus(input.as_bytes(), &v, IngestMode::Lenient).unwrap();
        assert_eq!(report.skipped_terms, 1);
        assert_eq!(report.skipped_qualifiers, 1);
        assert_eq!(corpus.get("d1").unwrap().annotations.len(), 1);
    }

    #[test]
    fn duplicate_annotations_merge() {
        let v = small_vocab();
        let input = r#"{"id":"d1","terms":[{"term":"t1","qualifiers":["q1"]},{"term":"t1","major":true,"qualifiers":["q2"]}]}
{"id":"d1","terms":[{"term":"t2"}]}
{"id":"d2","terms":[]}
"#;
        let (corpus, report) = parse_corpus(input.as_bytes(), &v, IngestMode::Strict).unwrap();
        let d = corpus.get("d1").unwrap();
        assert_eq!(d.annotations.len(), 2);
        assert!(d.annotations[0].is_major);
        assert_eq!(d.annotations[0].qualifiers.len(), 2);
        assert_eq!(report.merged_annotations, 1);
        assert_eq!(report.merged_documents, 1);
        assert_eq!(report.empty_documents, vec![DocId::new("d2").unwrap()]);
    }

    #[test]
    fn corpus_write_parse_roundtrip() {
        let v = small_vocab();
        let input = r#"{"id":"d1","terms":[{"term":"t2","major":true,"qualifiers":["q2","q1"]},{"term":"t1"}]}"#;
        let (corpus, _) = parse_corpus(input.as_bytes(), &v, IngestMode::Strict).unwrap();
        let mut buf = Vec::new();
        write_corpus(&corpus, &mut buf).unwrap();
        let (back, _) = parse_corpus(buf.as_slice(), &v, IngestMode::Strict).unwrap();
        assert_eq!(corpus, back);
    }

    #[test]
    fn validate_reports_two_cycle() {
        let v = vocab(&[("a", &["b"]), ("b", &["a"]), ("c", &[])]);
        let report = validate(&v);
        assert_eq!(report.cycles.len(), 1);
        let ids: Vec<&str> = report.cycles[0].iter().map(TermId::as_str).collect();
        assert_eq!(ids, ["a", "b"]);
        assert!(v.topological_order().is_err());
    }

    #[test]
    fn validate_forest_and_orphans() {
        let v = vocab(&[("r", &[]), ("c", &["r"]), ("g", &["c"]), ("lonely", &[])]);
        let report = validate(&v);
        assert!(report.is_acyclic());
        assert_eq!(report.orphans, vec![TermId::new("lonely").unwrap()]);
        assert_eq!(report.n_roots, 2);
        assert_eq!(report.n_edges, 2);
        assert_eq!(v.topological_order().unwrap().len(), 4);
    }
}
