//! `vocab-relate`: build relatedness artifacts, score document pairs and run
//! the benchmark protocols from the command line.

mod commands;
mod support;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vocab_relate::benchmark::{ClassificationParams, DEFAULT_MIN_FRAC};
use vocab_relate::relatedness::{Method, MethodConfig, VectorKind};
use vocab_relate::termgraph::{GraphKind, DEFAULT_EPS};

#[derive(Parser)]
#[command(
    name = "vocab-relate",
    version,
    about = "Publication relatedness from controlled vocabularies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert MeSH descriptor (and qualifier) files to a canonical vocabulary.
    ConvertMesh(ConvertMeshArgs),
    /// Information content of every term.
    Ic(PlainArgs),
    /// Term graph edges with their weights.
    Graph(GraphArgs),
    /// Sparsified term-similarity matrix.
    Simmatrix(GraphArgs),
    /// Relatedness of document pairs.
    Relate(RelateArgs),
    /// Both benchmark tests for one configuration.
    Bench(BenchArgs),
    /// Benchmark over a parameter grid.
    Sweep(SweepArgs),
    /// Summary counts, or agreement between two score files.
    Stats(StatsArgs),
}

#[derive(Args, Serialize)]
pub struct Common {
    /// Canonical vocabulary (JSONL).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Annotated corpus (JSONL).
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Relevance judgements (topic, doc, level).
    #[arg(long)]
    pub judgements: Option<PathBuf>,
    /// Term frequency table (term, count) used for IC instead of the corpus.
    #[arg(long)]
    pub freq: Option<PathBuf>,
    /// Directory for cached similarity matrices.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all outputs are independent of this value.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Reject unknown terms and qualifiers in the corpus instead of skipping them.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Serialize)]
pub struct MethodArgs {
    #[arg(long, default_value = "salton")]
    pub method: Method,
    #[arg(long, default_value = "binary")]
    pub vector: VectorKind,
    /// Add term-qualifier pairs to the vector (Salton only).
    #[arg(long)]
    pub qualifiers: bool,
    #[arg(long, default_value = "g1")]
    pub graph: GraphKind,
    /// Weight of major terms.
    #[arg(long, default_value_t = 1)]
    pub w: u32,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Similarities at or below this value are dropped from the matrix.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    /// MTS over major terms only.
    #[arg(long)]
    pub slim: bool,
    /// MTS over negated minimum term distances.
    #[arg(long)]
    pub raw_distance: bool,
    /// MTS with exact distances instead of the sparsified matrix.
    #[arg(long)]
    pub exact: bool,
}

impl MethodArgs {
    pub fn config(&self) -> anyhow::Result<MethodConfig> {
        let c = MethodConfig {
            method: self.method,
            vector: self.vector,
            qualifiers: self.qualifiers,
            graph: self.graph,
            w: self.w as f64,
            lambda: self.lambda,
            eps: self.eps,
            slim: self.slim,
            raw_distance: self.raw_distance,
            exact: self.exact,
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Serialize)]
pub struct ProtocolArgs {
    /// Classification iterations per topic.
    #[arg(long, default_value_t = 50)]
    pub iterations: u32,
    /// Relevant and not-relevant documents sampled per iteration.
    #[arg(long, default_value_t = 10)]
    pub sample_size: usize,
    /// Minimum share of (possibly) relevant judgements for a topic to be kept.
    #[arg(long, default_value_t = DEFAULT_MIN_FRAC)]
    pub min_frac: f64,
}

impl ProtocolArgs {
    pub fn params(&self, seed: u64) -> ClassificationParams {
        ClassificationParams {
            iterations: self.iterations,
            sample_size: self.sample_size,
            seed,
        }
    }
}

#[derive(Args, Serialize)]
pub struct ConvertMeshArgs {
    /// Descriptor file, ASCII (`d20xx.bin`) or XML (`desc20xx.xml`).
    #[arg(long)]
    pub descriptors: PathBuf,
    /// Qualifier file, ASCII or XML.
    #[arg(long)]
    pub qualifier_file: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct PlainArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct GraphArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "g1")]
    pub graph: GraphKind,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Args, Serialize)]
pub struct RelateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Pairs to score (`a<TAB>b`); every unordered corpus pair when omitted.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub method: MethodArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Also write test-1 scores as `group<TAB>score` lines.
    #[arg(long)]
    pub dump_dist: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Named grid: table1, fig2, fig3 or fig4.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    pub preset: Option<String>,
    /// JSON array of configurations.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    /// Sparsification cutoff applied to preset cells.
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
}

#[derive(Args, Serialize)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Two `relate` outputs whose shared pairs are compared.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub compare: Option<Vec<PathBuf>>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
