//! The sampling classification test.
//!
//! Each (topic, iteration) draws its sample from its own ChaCha20 stream,
//! keyed by SHA-256 over a domain tag, the run seed, the topic id and the
//! iteration number. Results therefore do not depend on scheduling.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::judgements::{topic_docs, RelevanceJudgement, TopicDocs};
use super::stats::Confusion;
use crate::error::{Error, Result};
use crate::vocab::{DocId, TopicId};

const RNG_DOMAIN: &[u8] = b"vocab-relate:classification";

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ClassificationParams {
    pub iterations: u32,
    pub sample_size: usize,
    pub seed: u64,
}

impl Default for ClassificationParams {
    fn default() -> Self {
        Self {
            iterations: 50,
            sample_size: 10,
            seed: 0,
        }
    }
}

/// The generator for one (topic, iteration) cell.
pub fn cell_rng(seed: u64, topic: &TopicId, iteration: u32) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(RNG_DOMAIN);
    h.update(seed.to_le_bytes());
    h.update((topic.as_str().len() as u64).to_le_bytes());
    h.update(topic.as_str().as_bytes());
    h.update(iteration.to_le_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}

/// Uniform integer in `0..n` by rejection on 64-bit draws.
pub fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    assert!(n > 0, "uniform_index over an empty range");
    let n = n as u64;
    // Draws below 2^64 mod n would bias the remainder.
    let reject_below = n.wrapping_neg() % n;
    loop {
        let r = rng.next_u64();
        if r >= reject_below {
            return (r % n) as usize;
        }
    }
}

/// `k` distinct indices from `0..n` via a partial Fisher-Yates shuffle, in
/// draw order.
pub fn sample_indices(rng: &mut impl RngCore, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "sample larger than population");
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + uniform_index(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// Relatedness among one topic's judged documents; relevant documents first.
struct TopicScores {
    n_relevant: usize,
    n: usize,
    scores: Vec<f64>,
}

impl TopicScores {
    fn compute<F>(docs: &TopicDocs, score: &F) -> Result<Self>
    where
        F: Fn(&DocId, &DocId) -> Result<f64> + Sync,
    {
        let all: Vec<&DocId> = docs.relevant.iter().chain(&docs.not_relevant).collect();
        let n = all.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                ((i + 1)..n)
                    .map(|j| {
                        let s = score(all[i], all[j]).map_err(|e| Error::PairScore {
                            a: all[i].to_string(),
                            b: all[j].to_string(),
                            message: e.to_string(),
                        })?;
                        if s.is_nan() {
                            return Err(Error::NanScore);
                        }
                        Ok(s)
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut scores = vec![f64::NAN; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, s) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                scores[i * n + j] = s;
                scores[j * n + i] = s;
            }
        }
        Ok(Self {
            n_relevant: docs.relevant.len(),
            n,
            scores,
        })
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i * self.n + j]
    }

    fn run_iteration(&self, rng: &mut ChaCha20Rng, k: usize) -> Confusion {
        let n_rel = self.n_relevant;
        let relevant = sample_indices(rng, n_rel, k);
        let not_relevant: Vec<usize> = sample_indices(rng, self.n - n_rel, k)
            .into_iter()
            .map(|i| i + n_rel)
            .collect();
        let mut sampled = vec![false; self.n];
        for &i in relevant.iter().chain(&not_relevant) {
            sampled[i] = true;
        }
        let best = |p: usize, group: &[usize]| {
            group
                .iter()
                .map(|&q| self.get(p, q))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let mut c = Confusion::default();
        for p in (0..self.n).filter(|&p| !sampled[p]) {
            // A tie falls to NOT_RELEVANT.
            let predicted = best(p, &relevant) > best(p, &not_relevant);
            c.record(predicted, p < n_rel);
        }
        c
    }
}

/// Runs the classification test over filtered judgements. Every topic needs
/// at least `sample_size` relevant and `sample_size` not-relevant documents.
/// Any failed score aborts the test.
pub fn classification_test<F>(
    filtered: &[RelevanceJudgement],
    score: &F,
    params: &ClassificationParams,
) -> Result<Confusion>
where
    F: Fn(&DocId, &DocId) -> Result<f64> + Sync,
{
    if params.iterations == 0 || params.sample_size == 0 {
        return Err(Error::InvalidParameter(
            "iterations and sample size must be positive".into(),
        ));
    }
    let topics = topic_docs(filtered);
    if topics.is_empty() {
        return Err(Error::EmptyInput("judgements"));
    }
    let k = params.sample_size;
    for (topic, docs) in &topics {
        for (kind, available) in [
            ("relevant", docs.relevant.len()),
            ("not-relevant", docs.not_relevant.len()),
        ] {
            if available < k {
                return Err(Error::TopicTooSmall {
                    topic: topic.to_string(),
                    kind,
                    available,
                    needed: k,
                });
            }
        }
    }
    let mut total = Confusion::default();
    for (topic, docs) in &topics {
        let scores = TopicScores::compute(docs, score)?;
        let per_iteration: Vec<Confusion> = (0..params.iterations)
            .into_par_iter()
            .map(|it| scores.run_iteration(&mut cell_rng(params.seed, topic, it), k))
            .collect();
        for c in &per_iteration {
            total.merge(c);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::judgements::RelevanceLevel;

    fn judgements(n_rel: usize, n_not: usize) -> Vec<RelevanceJudgement> {
        let mk = |prefix: &str, i: usize, level| RelevanceJudgement {
            topic: TopicId::new("t").unwrap(),
            doc: DocId::new(format!("{prefix}{i:03}")).unwrap(),
            level,
        };
        (0..n_rel)
            .map(|i| mk("r", i, RelevanceLevel::Relevant))
            .chain((0..n_not).map(|i| mk("n", i, RelevanceLevel::NotRelevant)))
            .collect()
    }

    fn same_prefix(a: &DocId, b: &DocId) -> Result<f64> {
        Ok(if a.as_str()[..1] == b.as_str()[..1] {
            1.0
        } else {
            0.0
        })
    }

    #[test]
    fn sampling_is_uniform_and_distinct() {
        let mut rng = cell_rng(7, &TopicId::new("t").unwrap(), 0);
        let s = sample_indices(&mut rng, 20, 20);
        let mut sorted = s.clone();
        sorted.sort();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
        let mut counts = [0usize; 5];
        for _ in 0..5000 {
            counts[uniform_index(&mut rng, 5)] += 1;
        }
        assert!(
            counts.iter().all(|&c| (850..1150).contains(&c)),
            "{counts:?}"
        );
    }

    #[test]
    fn streams_differ_by_cell() {
        let t = TopicId::new("t").unwrap();
        let u = TopicId::new("u").unwrap();
        let draw = |mut r: ChaCha20Rng| r.next_u64();
        assert_eq!(draw(cell_rng(1, &t, 0)), draw(cell_rng(1, &t, 0)));
        assert_ne!(draw(cell_rng(1, &t, 0)), draw(cell_rng(1, &t, 1)));
        assert_ne!(draw(cell_rng(1, &t, 0)), draw(cell_rng(2, &t, 0)));
        assert_ne!(draw(cell_rng(1, &t, 0)), draw(cell_rng(1, &u, 0)));
    }

    #[test]
    fn perfect_separation() {
        let params = ClassificationParams {
            iterations: 3,
            sample_size: 2,
            seed: 1,
        };
        let c = classification_test(&judgements(5, 6), &same_prefix, &params).unwrap();
        assert_eq!(
            c,
            Confusion {
                tp: 9,
                fp: 0,
                tn: 12,
                fn_: 0
            }
        );
    }

    #[test]
    fn ties_are_not_relevant() {
        let params = ClassificationParams {
            iterations: 2,
            sample_size: 1,
            seed: 3,
        };
        let flat = |_: &DocId, _: &DocId| Ok(0.5);
        let c = classification_test(&judgements(3, 3), &flat, &params).unwrap();
        assert_eq!((c.tp, c.fp), (0, 0));
        assert_eq!(c.total(), 8);
    }

    #[test]
    fn errors() {
        let params = ClassificationParams::default();
        assert!(matches!(
            classification_test(&judgements(9, 30), &same_prefix, &params),
            Err(Error::TopicTooSmall { available: 9, .. })
        ));
        let failing = |_: &DocId, _: &DocId| Err(Error::ZeroVector);
        let small = ClassificationParams {
            sample_size: 1,
            ..params
        };
        assert!(matches!(
            classification_test(&judgements(2, 2), &failing, &small),
            Err(Error::PairScore { .. })
        ));
    }
}
