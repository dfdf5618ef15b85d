use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    mts_min_distance, mts_terms, salton_cosine_qualified, self_form, slim_terms,
    soft_cosine_with_forms, term_list, ExactSimilarity, TermList,
};
use crate::docvectors::{
    check_major_weight, qualified_vector, weighted_vector, QualifiedTermVector, TermVector,
};
use crate::error::{Error, Result};
use crate::infocontent::IcTable;
use crate::termgraph::{
    build_ic_weighted_graph, build_unweighted_graph, check_lambda, similarity_matrix,
    DistanceTable, GraphKind, SimMatrix, SimMeta, TermGraph, DEFAULT_EPS,
};
use crate::vocab::{Corpus, DocId, TermIdx, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Salton,
    Soft,
    Mts,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Salton => "salton",
            Method::Soft => "soft",
            Method::Mts => "mts",
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "salton" => Ok(Method::Salton),
            "soft" => Ok(Method::Soft),
            "mts" => Ok(Method::Mts),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorKind {
    Binary,
    Ic,
}

impl VectorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VectorKind::Binary => "binary",
            VectorKind::Ic => "ic",
        }
    }
}

impl FromStr for VectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(VectorKind::Binary),
            "ic" => Ok(VectorKind::Ic),
            other => Err(Error::InvalidParameter(format!(
                "unknown vector kind `{other}`"
            ))),
        }
    }
}

/// Full parameterization of one relatedness measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    pub method: Method,
    pub vector: VectorKind,
    pub qualifiers: bool,
    pub graph: GraphKind,
    pub w: f64,
    pub lambda: f64,
    pub eps: f64,
    pub slim: bool,
    /// MTS on negated minimum term distances instead of similarities.
    pub raw_distance: bool,
    /// MTS similarities from exact distances instead of the sparsified matrix.
    pub exact: bool,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            method: Method::Salton,
            vector: VectorKind::Binary,
            qualifiers: false,
            graph: GraphKind::Unweighted,
            w: 1.0,
            lambda: 1.0,
            eps: DEFAULT_EPS,
            slim: false,
            raw_distance: false,
            exact: false,
        }
    }
}

impl MethodConfig {
    pub fn salton(vector: VectorKind, w: f64) -> Self {
        Self {
            method: Method::Salton,
            vector,
            w,
            ..Self::default()
        }
    }

    pub fn soft(vector: VectorKind, graph: GraphKind, w: f64, lambda: f64) -> Self {
        Self {
            method: Method::Soft,
            vector,
            graph,
            w,
            lambda,
            ..Self::default()
        }
    }

    pub fn mts(graph: GraphKind, w: f64, lambda: f64) -> Self {
        Self {
            method: Method::Mts,
            graph,
            w,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_major_weight(self.w)?;
        check_lambda(self.lambda)?;
        if !(0.0..1.0).contains(&self.eps) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in [0, 1), got {}",
                self.eps
            )));
        }
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.qualifiers && self.method != Method::Salton {
            return bad("qualifiers are only defined for Salton's cosine");
        }
        if self.method != Method::Mts && (self.slim || self.raw_distance || self.exact) {
            return bad("slim, raw-distance and exact modes apply to mts only");
        }
        if self.raw_distance && self.exact {
            return bad("raw-distance and exact modes are exclusive");
        }
        Ok(())
    }

    fn uses_graph(&self) -> bool {
        self.method != Method::Salton
    }

    fn uses_lambda(&self) -> bool {
        self.uses_graph() && !self.raw_distance
    }

    /// Whether the measure reads information content.
    pub fn needs_ic(&self) -> bool {
        (self.method != Method::Mts && self.vector == VectorKind::Ic)
            || (self.uses_graph() && self.graph == GraphKind::IcWeighted)
    }

    /// Column value for the vector representation.
    pub fn vector_label(&self) -> String {
        if self.method == Method::Mts {
            return "-".into();
        }
        let mut s = self.vector.as_str().to_string();
        if self.qualifiers {
            s.push_str("+qual");
        }
        s
    }

    pub fn method_label(&self) -> &'static str {
        if self.raw_distance {
            "mts-dist"
        } else {
            self.method.as_str()
        }
    }

    pub fn graph_label(&self) -> &'static str {
        if self.uses_graph() {
            self.graph.as_str()
        } else {
            "-"
        }
    }

    pub fn lambda_label(&self) -> String {
        if self.uses_lambda() {
            format!("{}", self.lambda)
        } else {
            "-".into()
        }
    }

    /// `#method ...` line echoing every parameter.
    pub fn header(&self) -> String {
        format!(
            "#method method={} vector={} qualifiers={} graph={} w={} lambda={} eps={} slim={} raw_distance={} exact={}",
            self.method.as_str(),
            self.vector.as_str(),
            self.qualifiers,
            self.graph,
            self.w,
            self.lambda,
            self.eps,
            self.slim,
            self.raw_distance,
            self.exact
        )
    }
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} vector={} graph={} w={} lambda={}{}",
            self.method_label(),
            self.vector_label(),
            self.graph_label(),
            self.w,
            self.lambda_label(),
            if self.slim { " slim" } else { "" }
        )
    }
}

/// Persistent storage for similarity matrices, e.g. an on-disk cache.
pub trait SimMatrixStore: Send + Sync {
    fn load(&self, meta: &SimMeta) -> Option<SimMatrix>;
    fn store(&self, matrix: &SimMatrix);
}

type SimKey = (GraphKind, u64, u64);

/// Vocabulary-level artifacts shared by every measure over one corpus:
/// the IC table, both term graphs, similarity matrices and distance tables.
/// Graphs and matrices are built lazily and cached.
pub struct Artifacts<'a> {
    vocab: &'a Vocabulary,
    corpus: &'a Corpus,
    ic: Option<IcTable>,
    restrict: Vec<TermIdx>,
    unweighted: OnceLock<TermGraph>,
    weighted: OnceLock<Result<TermGraph, String>>,
    sims: Mutex<HashMap<SimKey, Arc<SimMatrix>>>,
    distances: Mutex<HashMap<GraphKind, Arc<DistanceTable>>>,
    store: Option<Box<dyn SimMatrixStore + 'a>>,
}

impl<'a> Artifacts<'a> {
    /// `ic` may be `None` when no measure needs IC weights.
    pub fn new(vocab: &'a Vocabulary, corpus: &'a Corpus, ic: Option<IcTable>) -> Self {
        let mut restrict: Vec<TermIdx> = corpus
            .documents
            .values()
            .flat_map(|d| d.annotations.iter())
            .filter_map(|a| vocab.idx(a.term.as_str()))
            .collect();
        restrict.sort();
        restrict.dedup();
        Self {
            vocab,
            corpus,
            ic,
            restrict,
            unweighted: OnceLock::new(),
            weighted: OnceLock::new(),
            sims: Mutex::new(HashMap::new()),
            distances: Mutex::new(HashMap::new()),
            store: None,
        }
    }

    pub fn with_store(mut self, store: impl SimMatrixStore + 'a) -> Self {
        self.store = Some(Box::new(store));
        self
    }

    pub fn vocab(&self) -> &'a Vocabulary {
        self.vocab
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    /// Terms occurring in the corpus; similarity matrices cover only these.
    pub fn corpus_terms(&self) -> &[TermIdx] {
        &self.restrict
    }

    pub fn ic(&self) -> Result<&IcTable> {
        self.ic
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("measure needs an IC table".into()))
    }

    pub fn graph(&self, kind: GraphKind) -> Result<&TermGraph> {
        match kind {
            GraphKind::Unweighted => Ok(self
                .unweighted
                .get_or_init(|| build_unweighted_graph(self.vocab))),
            GraphKind::IcWeighted => self
                .weighted
                .get_or_init(|| {
                    self.ic()
                        .and_then(|ic| build_ic_weighted_graph(self.vocab, ic))
                        .map_err(|e| e.to_string())
                })
                .as_ref()
                .map_err(|e| Error::InvalidParameter(e.clone())),
        }
    }

    pub fn simmatrix(&self, graph: GraphKind, lambda: f64, eps: f64) -> Result<Arc<SimMatrix>> {
        let key = (graph, lambda.to_bits(), eps.to_bits());
        if let Some(sm) = self.sims.lock().expect("cache lock").get(&key) {
            return Ok(sm.clone());
        }
        let meta = SimMeta { graph, lambda, eps };
        let sm = match self.store.as_ref().and_then(|s| s.load(&meta)) {
            Some(sm) => sm,
            None => {
                let sm = similarity_matrix(self.graph(graph)?, lambda, eps, Some(&self.restrict))?;
                if let Some(store) = &self.store {
                    store.store(&sm);
                }
                sm
            }
        };
        let sm = Arc::new(sm);
        self.sims
            .lock()
            .expect("cache lock")
            .insert(key, sm.clone());
        Ok(sm)
    }

    pub fn distances(&self, graph: GraphKind) -> Result<Arc<DistanceTable>> {
        if let Some(d) = self.distances.lock().expect("cache lock").get(&graph) {
            return Ok(d.clone());
        }
        let table = Arc::new(DistanceTable::compute(self.graph(graph)?, &self.restrict));
        self.distances
            .lock()
            .expect("cache lock")
            .insert(graph, table.clone());
        Ok(table)
    }

    /// Prepares every corpus document for `config`.
    pub fn scorer(&self, config: MethodConfig) -> Result<Scorer> {
        Scorer::new(self, config)
    }
}

enum Prepared {
    Vector { vector: TermVector, form: f64 },
    Qualified(QualifiedTermVector),
    Terms(TermList),
}

enum Backend {
    Salton,
    Soft(Arc<SimMatrix>),
    MtsMatrix(Arc<SimMatrix>),
    MtsExact(Arc<DistanceTable>, f64),
    MtsDistance(Arc<DistanceTable>, f64),
}

/// Scores document pairs of one corpus under one [`MethodConfig`].
pub struct Scorer {
    config: MethodConfig,
    index: HashMap<DocId, usize>,
    ids: Vec<DocId>,
    prepared: Vec<std::result::Result<Prepared, String>>,
    backend: Backend,
}

impl Scorer {
    fn new(art: &Artifacts<'_>, config: MethodConfig) -> Result<Self> {
        config.validate()?;
        let ic = if config.needs_ic() {
            Some(art.ic()?)
        } else {
            None
        };
        let backend = match config.method {
            Method::Salton => Backend::Salton,
            Method::Soft => {
                Backend::Soft(art.simmatrix(config.graph, config.lambda, config.eps)?)
            }
            Method::Mts if config.raw_distance => {
                let table = art.distances(config.graph)?;
                // Disconnected pairs sit one unit beyond the farthest finite pair.
                let unreachable = table.max_finite() + 1.0;
                Backend::MtsDistance(table, unreachable)
            }
            Method::Mts if config.exact => {
                Backend::MtsExact(art.distances(config.graph)?, config.lambda)
            }
            Method::Mts => {
                Backend::MtsMatrix(art.simmatrix(config.graph, config.lambda, config.eps)?)
            }
        };
        let vector_ic = match config.vector {
            VectorKind::Ic => ic,
            VectorKind::Binary => None,
        };
        let docs: Vec<_> = art.corpus.documents.values().collect();
        let prepared = docs
            .par_iter()
            .map(|doc| {
                let vocab = art.vocab;
                let p: Result<Prepared> = match (&backend, config.qualifiers) {
                    (Backend::Salton, true) => {
                        qualified_vector(doc, vocab, vector_ic, config.w).map(Prepared::Qualified)
                    }
                    (Backend::Salton, false) => weighted_vector(doc, vocab, vector_ic, config.w)
                        .and_then(|v| {
                            let form = v.norm_sq();
                            if form > 0.0 {
                                Ok(Prepared::Vector { vector: v, form })
                            } else {
                                Err(Error::ZeroVector)
                            }
                        }),
                    (Backend::Soft(s), _) => weighted_vector(doc, vocab, vector_ic, config.w)
                        .and_then(|v| {
                            let form = self_form(&v, s, doc.id.as_str())?;
                            Ok(Prepared::Vector { vector: v, form })
                        }),
                    _ => term_list(doc, vocab).and_then(|terms| {
                        if config.slim {
                            let majors = slim_terms(&terms);
                            if majors.is_empty() {
                                return Err(Error::NoMajorTerms(doc.id.to_string()));
                            }
                            Ok(Prepared::Terms(majors))
                        } else {
                            Ok(Prepared::Terms(terms))
                        }
                    }),
                };
                p.map_err(|e| e.to_string())
            })
            .collect();
        let ids: Vec<DocId> = docs.iter().map(|d| d.id.clone()).collect();
        let index = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        Ok(Self {
            config,
            index,
            ids,
            prepared,
            backend,
        })
    }

    pub fn config(&self) -> &MethodConfig {
        &self.config
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn doc_id(&self, i: usize) -> &DocId {
        &self.ids[i]
    }

    pub fn score(&self, a: &str, b: &str) -> Result<f64> {
        let i = self
            .doc_index(a)
            .ok_or_else(|| Error::UnknownDocument(a.to_string()))?;
        let j = self
            .doc_index(b)
            .ok_or_else(|| Error::UnknownDocument(b.to_string()))?;
        self.score_idx(i, j)
    }

    /// Scores documents by their position in the corpus' id order.
    pub fn score_idx(&self, i: usize, j: usize) -> Result<f64> {
        let fail = |message: String| Error::PairScore {
            a: self.ids[i].to_string(),
            b: self.ids[j].to_string(),
            message,
        };
        let x = self.prepared[i].as_ref().map_err(|e| fail(e.clone()))?;
        let y = self.prepared[j].as_ref().map_err(|e| fail(e.clone()))?;
        let score = match (&self.backend, x, y) {
            (
                Backend::Salton,
                Prepared::Vector {
                    vector: vx,
                    form: fx,
                },
                Prepared::Vector {
                    vector: vy,
                    form: fy,
                },
            ) => Ok((vx.dot(vy) / (fx * fy).sqrt()).min(1.0)),
            (Backend::Salton, Prepared::Qualified(qx), Prepared::Qualified(qy)) => {
                salton_cosine_qualified(qx, qy)
            }
            (
                Backend::Soft(s),
                Prepared::Vector {
                    vector: vx,
                    form: fx,
                },
                Prepared::Vector {
                    vector: vy,
                    form: fy,
                },
            ) => Ok(soft_cosine_with_forms(vx, vy, s, *fx, *fy)),
            (Backend::MtsMatrix(s), Prepared::Terms(ta), Prepared::Terms(tb)) => {
                mts_terms(ta, tb, s.as_ref(), self.config.w)
            }
            (Backend::MtsExact(table, lambda), Prepared::Terms(ta), Prepared::Terms(tb)) => {
                mts_terms(
                    ta,
                    tb,
                    &ExactSimilarity {
                        distances: table,
                        lambda: *lambda,
                    },
                    self.config.w,
                )
            }
            (
                Backend::MtsDistance(table, unreachable),
                Prepared::Terms(ta),
                Prepared::Terms(tb),
            ) => mts_min_distance(ta, tb, table, *unreachable, self.config.w),
            _ => unreachable!("documents prepared for a different backend"),
        };
        score.map_err(|e| fail(e.to_string()))
    }
}

/// One scored pair; a failure is kept alongside the successes.
#[derive(Debug)]
pub struct PairScore {
    pub a: DocId,
    pub b: DocId,
    pub score: Result<f64>,
}

/// Scores `pairs` in parallel on the current rayon pool; output order matches input.
pub fn pairwise_scores(scorer: &Scorer, pairs: &[(DocId, DocId)]) -> Vec<PairScore> {
    pairs
        .par_iter()
        .map(|(a, b)| PairScore {
            a: a.clone(),
            b: b.clone(),
            score: scorer.score(a.as_str(), b.as_str()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infocontent::corpus_information_content;
    use crate::vocab::test_util::{doc, vocab};

    fn setup() -> (Vocabulary, Corpus) {
        let v = vocab(&[
            ("r", &[]),
            ("a", &["r"]),
            ("b", &["r"]),
            ("a1", &["a"]),
            ("b1", &["b"]),
        ]);
        let c = Corpus::from_documents([
            doc("d1", &[("a", true, &[]), ("a1", false, &[])]),
            doc("d2", &[("a1", true, &[]), ("b", false, &[])]),
            doc("d3", &[("b1", true, &[])]),
            doc("empty", &[]),
        ]);
        (v, c)
    }

    fn all_configs() -> Vec<MethodConfig> {
        let mut out = vec![
            MethodConfig::salton(VectorKind::Binary, 1.0),
            MethodConfig::salton(VectorKind::Ic, 2.0),
            MethodConfig::soft(VectorKind::Binary, GraphKind::Unweighted, 4.0, 1.0),
            MethodConfig::soft(VectorKind::Ic, GraphKind::IcWeighted, 3.0, 1.0),
            MethodConfig::mts(GraphKind::Unweighted, 16.0, 1.0),
            MethodConfig::mts(GraphKind::IcWeighted, 16.0, 2.0),
        ];
        out.push(MethodConfig {
            slim: true,
            ..MethodConfig::mts(GraphKind::Unweighted, 1.0, 1.0)
        });
        out.push(MethodConfig {
            raw_distance: true,
            ..MethodConfig::mts(GraphKind::Unweighted, 2.0, 1.0)
        });
        out.push(MethodConfig {
            exact: true,
            ..MethodConfig::mts(GraphKind::IcWeighted, 2.0, 1.0)
        });
        out
    }

    #[test]
    fn every_config_scores_symmetrically() {
        let (v, c) = setup();
        let ic = corpus_information_content(&c, &v).unwrap();
        let art = Artifacts::new(&v, &c, Some(ic));
        for cfg in all_configs() {
            let s = art.scorer(cfg).unwrap();
            for a in ["d1", "d2", "d3"] {
                for b in ["d1", "d2", "d3"] {
                    let x = s.score(a, b).unwrap();
                    assert_eq!(x.to_bits(), s.score(b, a).unwrap().to_bits(), "{cfg}");
                    assert!(x.is_finite());
                }
                if !cfg.raw_distance {
                    assert!((s.score(a, a).unwrap() - 1.0).abs() < 1e-12, "{cfg}");
                }
            }
        }
    }

    #[test]
    fn empty_document_is_a_pair_error() {
        let (v, c) = setup();
        let art = Artifacts::new(&v, &c, None);
        let s = art
            .scorer(MethodConfig::salton(VectorKind::Binary, 1.0))
            .unwrap();
        match s.score("d1", "empty").unwrap_err() {
            Error::PairScore { b, .. } => assert_eq!(b, "empty"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            s.score("d1", "nope"),
            Err(Error::UnknownDocument(_))
        ));
    }

    #[test]
    fn pairwise_preserves_order() {
        let (v, c) = setup();
        let art = Artifacts::new(&v, &c, None);
        let s = art
            .scorer(MethodConfig::soft(
                VectorKind::Binary,
                GraphKind::Unweighted,
                1.0,
                1.0,
            ))
            .unwrap();
        assert!(pairwise_scores(&s, &[]).is_empty());
        let id = |x: &str| DocId::new(x).unwrap();
        let pairs = vec![
            (id("d2"), id("d2")),
            (id("d1"), id("empty")),
            (id("d3"), id("d1")),
        ];
        let out = pairwise_scores(&s, &pairs);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].score.as_ref().unwrap(), &1.0);
        assert!(out[1].score.is_err());
        assert_eq!(out[2].a, id("d3"));
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            MethodConfig {
                qualifiers: true,
                ..MethodConfig::soft(VectorKind::Ic, GraphKind::Unweighted, 1.0, 1.0)
            },
            MethodConfig {
                slim: true,
                ..MethodConfig::salton(VectorKind::Binary, 1.0)
            },
            MethodConfig {
                w: 0.5,
                ..MethodConfig::default()
            },
            MethodConfig {
                lambda: 0.0,
                ..MethodConfig::default()
            },
            MethodConfig {
                eps: 1.0,
                ..MethodConfig::default()
            },
            MethodConfig {
                raw_distance: true,
                exact: true,
                ..MethodConfig::mts(GraphKind::Unweighted, 1.0, 1.0)
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        let (v, c) = setup();
        let art = Artifacts::new(&v, &c, None);
        assert!(art
            .scorer(MethodConfig::salton(VectorKind::Ic, 1.0))
            .is_err());
    }

    #[test]
    fn labels_and_header() {
        let cfg = MethodConfig::soft(VectorKind::Ic, GraphKind::IcWeighted, 3.0, 1.0);
        assert_eq!(
            cfg.header(),
            "#method method=soft vector=ic qualifiers=false graph=dic w=3 lambda=1 eps=0.0001 slim=false raw_distance=false exact=false"
        );
        let salton = MethodConfig {
            qualifiers: true,
            ..MethodConfig::salton(VectorKind::Binary, 2.0)
        };
        assert_eq!(salton.vector_label(), "binary+qual");
        assert_eq!(salton.graph_label(), "-");
        assert_eq!(salton.lambda_label(), "-");
        let raw = MethodConfig {
            raw_distance: true,
            ..MethodConfig::mts(GraphKind::Unweighted, 2.0, 1.0)
        };
        assert_eq!(raw.method_label(), "mts-dist");
        assert_eq!(raw.lambda_label(), "-");
    }
}
