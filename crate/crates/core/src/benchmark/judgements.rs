//! Relevance judgements, topic filtering and test-1 pair construction.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{DocId, TopicId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelevanceLevel {
    NotRelevant = 0,
    PossiblyRelevant = 1,
    Relevant = 2,
}

impl RelevanceLevel {
    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "0" => Some(Self::NotRelevant),
            "1" => Some(Self::PossiblyRelevant),
            "2" => Some(Self::Relevant),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelevanceJudgement {
    pub topic: TopicId,
    pub doc: DocId,
    pub level: RelevanceLevel,
}

/// Reads `topic<TAB>doc<TAB>level` lines. Blank lines and `#` comments are
/// skipped. A repeated (topic, doc) keeps its highest level. Output is sorted
/// by topic, then document.
pub fn ingest_judgements<R: BufRead>(reader: R) -> Result<Vec<RelevanceJudgement>> {
    let mut best: BTreeMap<(TopicId, DocId), RelevanceLevel> = BTreeMap::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            line: n + 1,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(malformed(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let topic = TopicId::new(fields[0].trim()).map_err(|e| malformed(e.to_string()))?;
        let doc = DocId::new(fields[1].trim()).map_err(|e| malformed(e.to_string()))?;
        let level = RelevanceLevel::from_code(fields[2].trim())
            .ok_or_else(|| malformed(format!("unknown relevance level `{}`", fields[2])))?;
        let slot = best.entry((topic, doc)).or_insert(level);
        *slot = (*slot).max(level);
    }
    Ok(best
        .into_iter()
        .map(|((topic, doc), level)| RelevanceJudgement { topic, doc, level })
        .collect())
}

pub fn write_judgements<W: Write>(judgements: &[RelevanceJudgement], mut out: W) -> Result<()> {
    for j in judgements {
        writeln!(out, "{}\t{}\t{}", j.topic, j.doc, j.level.code())?;
    }
    Ok(())
}

pub const DEFAULT_MIN_FRAC: f64 = 0.10;

/// Keeps topics whose share of possibly-relevant plus relevant judgements is
/// at least `min_frac`, then drops every possibly-relevant judgement.
pub fn filter_topics(judgements: &[RelevanceJudgement], min_frac: f64) -> Vec<RelevanceJudgement> {
    let mut counts: BTreeMap<&TopicId, (usize, usize)> = BTreeMap::new();
    for j in judgements {
        let c = counts.entry(&j.topic).or_default();
        c.1 += 1;
        if j.level != RelevanceLevel::NotRelevant {
            c.0 += 1;
        }
    }
    judgements
        .iter()
        .filter(|j| {
            let (positive, total) = counts[&j.topic];
            positive as f64 / total as f64 >= min_frac
        })
        .filter(|j| j.level != RelevanceLevel::PossiblyRelevant)
        .cloned()
        .collect()
}

/// Judged documents of one topic, each list sorted by id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TopicDocs {
    pub relevant: Vec<DocId>,
    pub not_relevant: Vec<DocId>,
}

/// Groups judgements by topic. Possibly-relevant judgements are ignored.
pub fn topic_docs(judgements: &[RelevanceJudgement]) -> BTreeMap<TopicId, TopicDocs> {
    let mut out: BTreeMap<TopicId, TopicDocs> = BTreeMap::new();
    for j in judgements {
        let entry = out.entry(j.topic.clone()).or_default();
        match j.level {
            RelevanceLevel::Relevant => entry.relevant.push(j.doc.clone()),
            RelevanceLevel::NotRelevant => entry.not_relevant.push(j.doc.clone()),
            RelevanceLevel::PossiblyRelevant => {}
        }
    }
    for docs in out.values_mut() {
        docs.relevant.sort();
        docs.relevant.dedup();
        docs.not_relevant.sort();
        docs.not_relevant.dedup();
    }
    out
}

/// An unordered document pair under one topic, stored with `a < b`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TopicPair {
    pub topic: TopicId,
    pub a: DocId,
    pub b: DocId,
}

impl TopicPair {
    fn new(topic: &TopicId, x: &DocId, y: &DocId) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        Self {
            topic: topic.clone(),
            a: a.clone(),
            b: b.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TopicPairSet {
    /// Both documents relevant to the topic.
    pub same_topic: Vec<TopicPair>,
    /// Exactly one document relevant to the topic.
    pub separate_topic: Vec<TopicPair>,
}

/// Enumerates every unordered pair of judged documents per topic. Pairs of two
/// not-relevant documents belong to neither group. A document pair judged
/// under several topics appears once per topic.
pub fn build_pairs(filtered: &[RelevanceJudgement]) -> TopicPairSet {
    let mut set = TopicPairSet::default();
    for (topic, docs) in topic_docs(filtered) {
        let rel = &docs.relevant;
        for (i, x) in rel.iter().enumerate() {
            for y in &rel[i + 1..] {
                set.same_topic.push(TopicPair::new(&topic, x, y));
            }
            for y in &docs.not_relevant {
                if x != y {
                    set.separate_topic.push(TopicPair::new(&topic, x, y));
                }
            }
        }
    }
    set.same_topic.sort();
    set.separate_topic.sort();
    set
}

#[cfg(test)]
mod tests {
    use super::*;

    fn j(topic: &str, doc: &str, level: RelevanceLevel) -> RelevanceJudgement {
        RelevanceJudgement {
            topic: TopicId::new(topic).unwrap(),
            doc: DocId::new(doc).unwrap(),
            level,
        }
    }

    use RelevanceLevel::*;

    #[test]
    fn ingest_keeps_maximum() {
        let js = ingest_judgements("t\td\t0\nt\td\t2\n\n# note\nt\te\t1\n".as_bytes()).unwrap();
        assert_eq!(
            js,
            vec![j("t", "d", Relevant), j("t", "e", PossiblyRelevant)]
        );
        assert!(ingest_judgements("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(
            ingest_judgements("t\td\t3\n".as_bytes()),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            ingest_judgements("t\td\t1\nt d 1\n".as_bytes()),
            Err(Error::Malformed { line: 2, .. })
        ));
        assert!(ingest_judgements("\td\t1\n".as_bytes()).is_err());
    }

    #[test]
    fn round_trip() {
        let js = vec![j("a", "d1", Relevant), j("a", "d2", NotRelevant)];
        let mut buf = Vec::new();
        write_judgements(&js, &mut buf).unwrap();
        assert_eq!(ingest_judgements(buf.as_slice()).unwrap(), js);
    }

    #[test]
    fn filter_rule() {
        let mut js: Vec<_> = (0..19)
            .map(|i| j("low", &format!("n{i:02}"), NotRelevant))
            .collect();
        js.push(j("low", "r", Relevant));
        js.extend((0..8).map(|i| j("ok", &format!("n{i}"), NotRelevant)));
        js.push(j("ok", "p1", PossiblyRelevant));
        js.push(j("ok", "p2", PossiblyRelevant));
        let kept = filter_topics(&js, DEFAULT_MIN_FRAC);
        assert_eq!(kept.len(), 8);
        assert!(kept
            .iter()
            .all(|k| k.topic.as_str() == "ok" && k.level == NotRelevant));
    }

    #[test]
    fn pair_groups() {
        let js = vec![
            j("t", "d1", Relevant),
            j("t", "d2", Relevant),
            j("t", "d3", NotRelevant),
            j("t", "d4", NotRelevant),
            j("u", "d3", NotRelevant),
            j("u", "d5", NotRelevant),
        ];
        let set = build_pairs(&js);
        let names = |ps: &[TopicPair]| {
            ps.iter()
                .map(|p| format!("{}{}", p.a, p.b))
                .collect::<Vec<_>>()
        };
        assert_eq!(names(&set.same_topic), ["d1d2"]);
        assert_eq!(names(&set.separate_topic), ["d1d3", "d1d4", "d2d3", "d2d4"]);
    }

    #[test]
    fn pairs_are_keyed_by_topic() {
        let js = vec![
            j("t", "x", Relevant),
            j("t", "y", Relevant),
            j("u", "x", Relevant),
            j("u", "y", Relevant),
        ];
        assert_eq!(build_pairs(&js).same_topic.len(), 2);
    }
}
