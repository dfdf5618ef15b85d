use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate term id `{0}`")]
    DuplicateTerm(String),

    #[error("duplicate qualifier id `{0}`")]
    DuplicateQualifier(String),

    #[error("term `{term}` references unknown parent `{parent}`")]
    DanglingParent { term: String, parent: String },

    #[error("term `{0}` lists itself as a parent")]
    SelfParent(String),

    #[error("vocabulary contains no terms")]
    EmptyVocabulary,

    #[error(
        "vocabulary hierarchy contains a cycle through `{0}` (run validation for the full report)"
    )]
    Cycle(String),

    #[error("unknown term `{0}`")]
    UnknownTerm(String),

    #[error("document `{doc}` references unknown term `{term}`")]
    UnknownDocTerm { doc: String, term: String },

    #[error("document `{doc}` references unknown qualifier `{qualifier}`")]
    UnknownDocQualifier { doc: String, qualifier: String },

    #[error("unknown document `{0}`")]
    UnknownDocument(String),

    #[error("empty document `{0}`")]
    EmptyDocument(String),

    #[error("empty document (zero vector)")]
    ZeroVector,

    #[error("document `{0}` has no major terms")]
    NoMajorTerms(String),

    #[error("no term occurrences in the frequency table")]
    NoTermOccurrences,

    #[error("missing information content for term `{0}`")]
    MissingIc(String),

    #[error("non-positive quadratic form {value} for `{doc}`")]
    NonPositiveQuadraticForm { doc: String, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{what} needs at least {needed} values, got {got}")]
    TooFewValues {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("zero variance: {0}")]
    ZeroVariance(&'static str),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("NaN score encountered")]
    NanScore,

    #[error("topic `{topic}` has {available} {kind} documents, need {needed}")]
    TopicTooSmall {
        topic: String,
        kind: &'static str,
        available: usize,
        needed: usize,
    },

    #[error("score for pair ({a}, {b}) failed: {message}")]
    PairScore {
        a: String,
        b: String,
        message: String,
    },

    #[error("similarity matrix header: {0}")]
    SimMatrixHeader(String),

    #[error("MeSH source: {0}")]
    MeshSource(String),

    #[error(
        "descriptor `{descriptor}` tree number `{tree_number}` has no owning parent descriptor"
    )]
    UnresolvableTreeNumber {
        descriptor: String,
        tree_number: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
