use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use vocab_relate::benchmark::{
    bench_header, build_pairs, ccc, filter_topics, ingest_judgements, parameter_sweep, parse_grid,
    pearson, run_benchmark, topic_docs, write_distribution, write_results, BenchResult, Preset,
    RelevanceJudgement, RelevanceLevel, TopicPairSet,
};
use vocab_relate::infocontent::IcTable;
use vocab_relate::mesh::convert_mesh;
use vocab_relate::relatedness::{pairwise_scores, Artifacts, MethodConfig};
use vocab_relate::termgraph::{
    build_ic_weighted_graph, build_unweighted_graph, similarity_matrix, write_simmatrix, GraphKind,
};
use vocab_relate::vocab::{validate, Corpus, DocId, Vocabulary};

use crate::support::{open, output, require, write_manifest, DiskCache, Inputs};
use crate::{
    BenchArgs, Command, Common, ConvertMeshArgs, GraphArgs, PlainArgs, ProtocolArgs, RelateArgs,
    StatsArgs, SweepArgs,
};

pub fn run(command: Command) -> Result<ExitCode> {
    let common = match &command {
        Command::ConvertMesh(a) => &a.common,
        Command::Ic(a) => &a.common,
        Command::Graph(a) | Command::Simmatrix(a) => &a.common,
        Command::Relate(a) => &a.common,
        Command::Bench(a) => &a.common,
        Command::Sweep(a) => &a.common,
        Command::Stats(a) => &a.common,
    };
    if let Some(n) = common.workers {
        if n == 0 {
            bail!("--workers must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    match command {
        Command::ConvertMesh(a) => convert(&a),
        Command::Ic(a) => ic(&a),
        Command::Graph(a) => graph(&a),
        Command::Simmatrix(a) => simmatrix(&a),
        Command::Relate(a) => relate(&a),
        Command::Bench(a) => bench(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Stats(a) => stats(&a),
    }
}

fn convert(a: &ConvertMeshArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    inputs.record("descriptors", &a.descriptors)?;
    let qualifiers = match &a.qualifier_file {
        Some(p) => {
            inputs.record("qualifiers", p)?;
            Some(open(p)?)
        }
        None => None,
    };
    let mut out = output(a.common.out.as_deref())?;
    let summary = convert_mesh(open(&a.descriptors)?, qualifiers, &mut out)?;
    out.flush()?;
    log::info!(
        "{} descriptors, {} parent links, {} qualifiers",
        summary.descriptors,
        summary.edges,
        summary.qualifiers
    );
    write_manifest(a.common.out.as_deref(), "convert-mesh", a, &inputs, started)?;
    Ok(ExitCode::SUCCESS)
}

/// Vocabulary plus the optional corpus named by the common flags.
fn load(
    common: &Common,
    inputs: &mut Inputs,
    need_corpus: bool,
) -> Result<(Vocabulary, Option<Corpus>)> {
    let vocab = inputs.vocabulary(require(&common.vocab, "vocab")?)?;
    let corpus = match &common.corpus {
        Some(p) => Some(inputs.corpus(p, &vocab, common.strict)?),
        None if need_corpus => bail!("missing required flag --corpus"),
        None => None,
    };
    Ok((vocab, corpus))
}

fn ic_if(
    needed: bool,
    common: &Common,
    inputs: &mut Inputs,
    vocab: &Vocabulary,
    corpus: Option<&Corpus>,
) -> Result<Option<IcTable>> {
    if needed {
        Ok(Some(inputs.ic_table(
            common.freq.as_deref(),
            vocab,
            corpus,
        )?))
    } else {
        Ok(None)
    }
}

fn ic(a: &PlainArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let (vocab, corpus) = load(&a.common, &mut inputs, false)?;
    let table = inputs.ic_table(a.common.freq.as_deref(), &vocab, corpus.as_ref())?;
    let mut out = output(a.common.out.as_deref())?;
    writeln!(
        out,
        "#ic terms={} denominator={}",
        vocab.len(),
        table.denominator()
    )?;
    for t in vocab.indices() {
        writeln!(
            out,
            "{}\t{:.16e}\t{}",
            vocab.id(t),
            table.ic(t),
            table.aggregate(t)
        )?;
    }
    out.flush()?;
    if !table.zero_aggregate().is_empty() {
        log::warn!(
            "{} terms never occur and carry the maximum IC",
            table.zero_aggregate().len()
        );
    }
    write_manifest(a.common.out.as_deref(), "ic", a, &inputs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn graph(a: &GraphArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let (vocab, corpus) = load(&a.common, &mut inputs, false)?;
    let g = match a.graph {
        GraphKind::Unweighted => build_unweighted_graph(&vocab),
        GraphKind::IcWeighted => {
            let table = inputs.ic_table(a.common.freq.as_deref(), &vocab, corpus.as_ref())?;
            build_ic_weighted_graph(&vocab, &table)?
        }
    };
    let mut out = output(a.common.out.as_deref())?;
    writeln!(
        out,
        "#graph kind={} nodes={} edges={}",
        g.kind(),
        g.node_count(),
        g.edges().len()
    )?;
    for e in g.edges() {
        writeln!(
            out,
            "{}\t{}\t{:.16e}",
            vocab.id(e.child),
            vocab.id(e.parent),
            e.weight
        )?;
    }
    out.flush()?;
    write_manifest(a.common.out.as_deref(), "graph", a, &inputs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn simmatrix(a: &GraphArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let (vocab, corpus) = load(&a.common, &mut inputs, false)?;
    let needs_ic = a.graph == GraphKind::IcWeighted;
    let sm = match &corpus {
        // With a corpus the matrix covers the corpus terms and may be cached.
        Some(corpus) => {
            let table = ic_if(needs_ic, &a.common, &mut inputs, &vocab, Some(corpus))?;
            let art = artifacts(&a.common, &inputs, &vocab, corpus, table);
            (*art.simmatrix(a.graph, a.lambda, a.eps)?).clone()
        }
        None => {
            let g = match a.graph {
                GraphKind::Unweighted => build_unweighted_graph(&vocab),
                GraphKind::IcWeighted => {
                    let table = inputs.ic_table(a.common.freq.as_deref(), &vocab, None)?;
                    build_ic_weighted_graph(&vocab, &table)?
                }
            };
            similarity_matrix(&g, a.lambda, a.eps, None)?
        }
    };
    let mut out = output(a.common.out.as_deref())?;
    write_simmatrix(&sm, &vocab, &mut out)?;
    out.flush()?;
    log::info!("{} stored pairs", sm.stored_pairs());
    write_manifest(a.common.out.as_deref(), "simmatrix", a, &inputs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn artifacts<'a>(
    common: &Common,
    inputs: &Inputs,
    vocab: &'a Vocabulary,
    corpus: &'a Corpus,
    ic: Option<IcTable>,
) -> Artifacts<'a> {
    let art = Artifacts::new(vocab, corpus, ic);
    match &common.cache {
        Some(dir) => art.with_store(DiskCache {
            dir: dir.clone(),
            key: inputs.matrix_key(),
            vocab,
        }),
        None => art,
    }
}

fn read_pairs(path: &Path) -> Result<Vec<(DocId, DocId)>> {
    let mut pairs = Vec::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut f = line.split('\t');
        match (f.next(), f.next()) {
            (Some(a), Some(b)) => pairs.push((DocId::new(a.trim())?, DocId::new(b.trim())?)),
            _ => bail!("{}:{}: expected `a<TAB>b`", path.display(), n + 1),
        }
    }
    Ok(pairs)
}

fn relate(a: &RelateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let config = a.method.config()?;
    let mut inputs = Inputs::default();
    let (vocab, corpus) = load(&a.common, &mut inputs, true)?;
    let corpus = corpus.expect("required above");
    let table = ic_if(
        config.needs_ic(),
        &a.common,
        &mut inputs,
        &vocab,
        Some(&corpus),
    )?;
    let pairs = match &a.pairs {
        Some(p) => {
            inputs.record("pairs", p)?;
            read_pairs(p)?
        }
        None => {
            let ids: Vec<&DocId> = corpus.documents.keys().collect();
            let mut all = Vec::with_capacity(ids.len() * ids.len().saturating_sub(1) / 2);
            for (i, x) in ids.iter().enumerate() {
                for y in &ids[i + 1..] {
                    all.push(((*x).clone(), (*y).clone()));
                }
            }
            all
        }
    };
    let art = artifacts(&a.common, &inputs, &vocab, &corpus, table);
    let scorer = art.scorer(config)?;
    let scored = pairwise_scores(&scorer, &pairs);
    let mut out = output(a.common.out.as_deref())?;
    writeln!(out, "{}", config.header())?;
    let mut failed = 0usize;
    for p in &scored {
        match &p.score {
            Ok(s) => writeln!(out, "{}\t{}\t{:.16e}", p.a, p.b, s)?,
            Err(e) => {
                if failed == 0 {
                    log::warn!("{e}");
                }
                failed += 1;
                writeln!(out, "{}\t{}\tNA", p.a, p.b)?;
            }
        }
    }
    out.flush()?;
    if failed > 0 {
        log::warn!(
            "{failed} of {} pairs could not be scored (written as NA)",
            scored.len()
        );
    }
    write_manifest(a.common.out.as_deref(), "relate", a, &inputs, started)?;
    Ok(ExitCode::SUCCESS)
}

struct BenchData {
    vocab: Vocabulary,
    corpus: Corpus,
    filtered: Vec<RelevanceJudgement>,
    pairs: TopicPairSet,
}

fn bench_data(common: &Common, protocol: &ProtocolArgs, inputs: &mut Inputs) -> Result<BenchData> {
    let (vocab, corpus) = load(common, inputs, true)?;
    let path = require(&common.judgements, "judgements")?;
    inputs.record("judgements", path)?;
    let judgements =
        ingest_judgements(open(path)?).with_context(|| format!("reading {}", path.display()))?;
    let filtered = filter_topics(&judgements, protocol.min_frac);
    let pairs = build_pairs(&filtered);
    log::info!(
        "{} judgements kept of {}; {} same-topic and {} separate-topic pairs",
        filtered.len(),
        judgements.len(),
        pairs.same_topic.len(),
        pairs.separate_topic.len()
    );
    Ok(BenchData {
        vocab,
        corpus: corpus.expect("required above"),
        filtered,
        pairs,
    })
}

fn report_failures(results: &[BenchResult]) {
    for r in results {
        for f in &r.failures {
            log::warn!("[{}] {f}", r.config);
        }
    }
}

fn bench(a: &BenchArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let config = a.method.config()?;
    let params = a.protocol.params(a.common.seed);
    let mut inputs = Inputs::default();
    let data = bench_data(&a.common, &a.protocol, &mut inputs)?;
    let table = ic_if(
        config.needs_ic(),
        &a.common,
        &mut inputs,
        &data.vocab,
        Some(&data.corpus),
    )?;
    let art = artifacts(&a.common, &inputs, &data.vocab, &data.corpus, table);
    let (result, scores) = run_benchmark(&art, &data.filtered, &data.pairs, config, &params);
    let header = format!(
        "{}\n{}",
        bench_header(&params, a.protocol.min_frac),
        config.header()
    );
    let mut out = output(a.common.out.as_deref())?;
    write_results(std::slice::from_ref(&result), Some(&header), &mut out)?;
    out.flush()?;
    if let (Some(path), Some(scores)) = (&a.dump_dist, &scores) {
        let mut dump = output(Some(path))?;
        write_distribution(scores, &mut dump)?;
        dump.flush()?;
    }
    report_failures(std::slice::from_ref(&result));
    write_manifest(
        a.common.out.as_deref(),
        "bench",
        &serde_json::json!({ "args": a, "result": &result }),
        &inputs,
        started,
    )?;
    Ok(if result.delta.is_some() && result.phi.is_some() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn sweep(a: &SweepArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let params = a.protocol.params(a.common.seed);
    let mut inputs = Inputs::default();
    let grid: Vec<MethodConfig> = match (&a.preset, &a.grid) {
        (Some(name), _) => name.parse::<Preset>()?.grid(a.eps),
        (None, Some(path)) => {
            inputs.record("grid", path)?;
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_grid(&text)?
        }
        (None, None) => bail!("give --preset or --grid"),
    };
    let data = bench_data(&a.common, &a.protocol, &mut inputs)?;
    let needs_ic = grid.iter().any(MethodConfig::needs_ic);
    let table = ic_if(
        needs_ic,
        &a.common,
        &mut inputs,
        &data.vocab,
        Some(&data.corpus),
    )?;
    let art = artifacts(&a.common, &inputs, &data.vocab, &data.corpus, table);
    let results = parameter_sweep(&art, &data.filtered, &data.pairs, &grid, &params);
    let mut out = output(a.common.out.as_deref())?;
    write_results(
        &results,
        Some(&bench_header(&params, a.protocol.min_frac)),
        &mut out,
    )?;
    out.flush()?;
    report_failures(&results);
    write_manifest(
        a.common.out.as_deref(),
        "sweep",
        &serde_json::json!({ "args": a, "results": &results }),
        &inputs,
        started,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn read_scores(path: &Path) -> Result<BTreeMap<(String, String), f64>> {
    let mut out = BTreeMap::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            bail!("{}:{}: expected `a<TAB>b<TAB>score`", path.display(), n + 1);
        }
        if f[2] == "NA" {
            continue;
        }
        let s: f64 = f[2]
            .parse()
            .with_context(|| format!("{}:{}: bad score", path.display(), n + 1))?;
        let (x, y) = if f[0] <= f[1] {
            (f[0], f[1])
        } else {
            (f[1], f[0])
        };
        out.insert((x.to_string(), y.to_string()), s);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Agreement {
    shared_pairs: usize,
    only_first: usize,
    only_second: usize,
    ccc: f64,
    pearson: f64,
}

fn compare(a: &Path, b: &Path) -> Result<Agreement> {
    let (x, y) = (read_scores(a)?, read_scores(b)?);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, v) in &x {
        if let Some(w) = y.get(k) {
            xs.push(*v);
            ys.push(*w);
        }
    }
    Ok(Agreement {
        shared_pairs: xs.len(),
        only_first: x.len() - xs.len(),
        only_second: y.len() - xs.len(),
        ccc: ccc(&xs, &ys)?,
        pearson: pearson(&xs, &ys)?,
    })
}

fn stats(a: &StatsArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let mut report = serde_json::Map::new();
    if let Some(files) = &a.compare {
        for (role, p) in ["first", "second"].iter().zip(files) {
            inputs.record(role, p)?;
        }
        report.insert(
            "agreement".into(),
            serde_json::to_value(compare(&files[0], &files[1])?)?,
        );
    }
    if let Some(path) = &a.common.vocab {
        let vocab = inputs.vocabulary(path)?;
        report.insert("vocabulary".into(), serde_json::to_value(validate(&vocab))?);
        if let Some(cp) = &a.common.corpus {
            let corpus = inputs.corpus(cp, &vocab, a.common.strict)?;
            let annotations: usize = corpus.documents.values().map(|d| d.annotations.len()).sum();
            let major: usize = corpus
                .documents
                .values()
                .flat_map(|d| &d.annotations)
                .filter(|x| x.is_major)
                .count();
            report.insert(
                "corpus".into(),
                serde_json::json!({
                    "documents": corpus.len(),
                    "empty_documents": corpus.empty_documents().len(),
                    "annotations": annotations,
                    "major_annotations": major,
                }),
            );
        }
    }
    if let Some(path) = &a.common.judgements {
        inputs.record("judgements", path)?;
        let judgements = ingest_judgements(open(path)?)?;
        let filtered = filter_topics(&judgements, a.protocol.min_frac);
        let pairs = build_pairs(&filtered);
        let topics = topic_docs(&filtered);
        let k = a.protocol.sample_size;
        let per_iteration: usize = topics
            .values()
            .map(|t| (t.relevant.len() + t.not_relevant.len()).saturating_sub(2 * k))
            .sum();
        let relevant = filtered
            .iter()
            .filter(|j| j.level == RelevanceLevel::Relevant)
            .count();
        let documents: std::collections::BTreeSet<&DocId> =
            filtered.iter().map(|j| &j.doc).collect();
        report.insert(
            "judgements".into(),
            serde_json::json!({
                "ingested": judgements.len(),
                "kept": filtered.len(),
                "relevant": relevant,
                "topics": topics.len(),
                "documents": documents.len(),
                "same_topic_pairs": pairs.same_topic.len(),
                "separate_topic_pairs": pairs.separate_topic.len(),
                "classifications": per_iteration * a.protocol.iterations as usize,
            }),
        );
    }
    if report.is_empty() {
        bail!("nothing to report: give --vocab, --judgements or --compare");
    }
    let mut out = output(a.common.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    write_manifest(a.common.out.as_deref(), "stats", a, &inputs, started)?;
    Ok(ExitCode::SUCCESS)
}
