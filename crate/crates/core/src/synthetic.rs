//! Labelled synthetic corpora for sanity checks and fixtures.
//!
//! Each topic owns a subtree of the vocabulary: a topic root with `branches`
//! inner terms, each holding leaves, so the topic pool has `terms_per_topic`
//! terms. A document of topic `t` annotates `terms_per_doc` distinct terms
//! from that pool. Documents are relevant to their own topic and judged not
//! relevant to every other topic.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::benchmark::{
    sample_indices, uniform_index, write_judgements, RelevanceJudgement, RelevanceLevel,
};
use crate::error::{Error, Result};
use crate::vocab::{
    write_corpus, write_vocabulary, Annotation, Corpus, DocId, Document, Qualifier, QualifierId,
    Term, TermId, TopicId, Vocabulary,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub topics: usize,
    pub terms_per_topic: usize,
    pub terms_per_doc: usize,
    pub docs_per_topic: usize,
    pub qualifiers: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            topics: 3,
            terms_per_topic: 10,
            terms_per_doc: 5,
            docs_per_topic: 20,
            qualifiers: 3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticData {
    pub vocab: Vocabulary,
    pub corpus: Corpus,
    pub judgements: Vec<RelevanceJudgement>,
}

fn term(id: String, parents: &[&str]) -> Term {
    Term {
        label: format!("Term {id}"),
        parents: parents
            .iter()
            .map(|p| TermId::new(*p).expect("non-empty"))
            .collect(),
        id: TermId::new(id).expect("non-empty"),
    }
}

/// Pool term ids of topic `t`: inner terms first, then leaves.
fn build_topic(t: usize, pool: usize, terms: &mut Vec<Term>) -> Vec<String> {
    let root = format!("T{t}");
    terms.push(term(root.clone(), &["ROOT"]));
    let branches = 2.min(pool);
    let inner: Vec<String> = (0..branches).map(|b| format!("T{t}.{b}")).collect();
    for id in &inner {
        terms.push(term(id.clone(), &[root.as_str()]));
    }
    let mut ids = inner.clone();
    for k in 0..pool - branches {
        let id = format!("T{t}.{}.{k}", k % branches);
        terms.push(term(id.clone(), &[inner[k % branches].as_str()]));
        ids.push(id);
    }
    ids
}

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData> {
    if spec.topics < 2 || spec.terms_per_doc == 0 || spec.terms_per_doc > spec.terms_per_topic {
        return Err(Error::InvalidParameter(
            "need at least 2 topics and 1 <= terms_per_doc <= terms_per_topic".into(),
        ));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut terms = vec![term("ROOT".into(), &[])];
    let pools: Vec<Vec<String>> = (0..spec.topics)
        .map(|t| build_topic(t, spec.terms_per_topic, &mut terms))
        .collect();
    let qualifiers: Vec<Qualifier> = (0..spec.qualifiers)
        .map(|q| Qualifier {
            id: QualifierId::new(format!("Q{q}")).expect("non-empty"),
            label: format!("Qualifier {q}"),
        })
        .collect();
    let vocab = Vocabulary::new(terms, qualifiers.clone())?;

    let mut documents = Vec::new();
    let mut members: Vec<Vec<DocId>> = vec![Vec::new(); spec.topics];
    for (t, pool) in pools.iter().enumerate() {
        for d in 0..spec.docs_per_topic {
            let id = DocId::new(format!("t{t}d{d:03}"))?;
            let picks = sample_indices(&mut rng, pool.len(), spec.terms_per_doc);
            let annotations: Vec<Annotation> = picks
                .iter()
                .enumerate()
                .map(|(i, &p)| {
                    // The first pick is always major; later picks with chance 1/4.
                    let is_major = i == 0 || rng.next_u32() % 4 == 0;
                    let mut quals = BTreeSet::new();
                    if !qualifiers.is_empty() && rng.next_u32() % 2 == 0 {
                        quals.insert(
                            qualifiers[uniform_index(&mut rng, qualifiers.len())]
                                .id
                                .clone(),
                        );
                    }
                    Annotation {
                        term: TermId::new(pool[p].clone()).expect("non-empty"),
                        is_major,
                        qualifiers: quals,
                    }
                })
                .collect();
            members[t].push(id.clone());
            documents.push(Document::new(id, annotations));
        }
    }

    let mut judgements = Vec::new();
    for t in 0..spec.topics {
        let topic = TopicId::new(format!("topic{t}"))?;
        for (owner, docs) in members.iter().enumerate() {
            let level = if owner == t {
                RelevanceLevel::Relevant
            } else {
                RelevanceLevel::NotRelevant
            };
            judgements.extend(docs.iter().map(|doc| RelevanceJudgement {
                topic: topic.clone(),
                doc: doc.clone(),
                level,
            }));
        }
    }
    judgements.sort_by(|a, b| (&a.topic, &a.doc).cmp(&(&b.topic, &b.doc)));
    Ok(SyntheticData {
        vocab,
        corpus: Corpus::from_documents(documents),
        judgements,
    })
}

pub const VOCAB_FILE: &str = "vocab.jsonl";
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const JUDGEMENTS_FILE: &str = "judgements.tsv";

impl SyntheticData {
    /// Writes the three canonical input files into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut v = Vec::new();
        write_vocabulary(&self.vocab, &mut v)?;
        std::fs::write(dir.join(VOCAB_FILE), v)?;
        let mut c = Vec::new();
        write_corpus(&self.corpus, &mut c)?;
        std::fs::write(dir.join(CORPUS_FILE), c)?;
        let mut j = Vec::new();
        write_judgements(&self.judgements, &mut j)?;
        std::fs::File::create(dir.join(JUDGEMENTS_FILE))?.write_all(&j)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::validate;

    #[test]
    fn shape() {
        let data = generate(&SyntheticSpec::default()).unwrap();
        assert_eq!(data.vocab.len(), 1 + 3 * 11);
        assert!(validate(&data.vocab).is_acyclic());
        assert_eq!(data.corpus.len(), 60);
        for doc in data.corpus.documents.values() {
            assert_eq!(doc.annotations.len(), 5);
            assert!(doc.annotations.iter().any(|a| a.is_major));
            let topic = &doc.id.as_str()[1..2];
            assert!(doc
                .annotations
                .iter()
                .all(|a| a.term.as_str().starts_with(&format!("T{topic}."))));
        }
        assert_eq!(data.judgements.len(), 3 * 60);
    }

    #[test]
    fn deterministic() {
        let spec = SyntheticSpec {
            seed: 9,
            ..SyntheticSpec::default()
        };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(
            generate(&spec).unwrap().corpus,
            generate(&SyntheticSpec::default()).unwrap().corpus
        );
    }
}
