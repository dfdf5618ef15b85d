//! Input loading, digests, the similarity-matrix disk cache and run manifests.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use vocab_relate::infocontent::{
    descendant_closure, information_content, read_freq_table, term_frequencies, IcTable,
};
use vocab_relate::relatedness::SimMatrixStore;
use vocab_relate::termgraph::{read_simmatrix, write_simmatrix, SimMatrix, SimMeta};
use vocab_relate::vocab::{parse_corpus, parse_vocabulary, Corpus, IngestMode, Vocabulary};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

pub fn require<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    match path {
        Some(p) => Ok(p),
        None => bail!("missing required flag --{flag}"),
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut reader = open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Digests of every input file read by a command, keyed by role.
#[derive(Default)]
pub struct Inputs {
    pub digests: BTreeMap<String, String>,
}

impl Inputs {
    pub fn record(&mut self, role: &str, path: &Path) -> Result<()> {
        self.digests.insert(role.to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Digest of the inputs a similarity matrix depends on.
    pub fn matrix_key(&self) -> String {
        let mut h = Sha256::new();
        for (role, digest) in self
            .digests
            .iter()
            .filter(|(r, _)| ["vocab", "corpus", "freq"].contains(&r.as_str()))
        {
            h.update(role.as_bytes());
            h.update([0]);
            h.update(digest.as_bytes());
            h.update([0]);
        }
        hex::encode(h.finalize())
    }

    pub fn vocabulary(&mut self, path: &Path) -> Result<Vocabulary> {
        self.record("vocab", path)?;
        parse_vocabulary(open(path)?)
            .with_context(|| format!("reading vocabulary {}", path.display()))
    }

    pub fn corpus(&mut self, path: &Path, vocab: &Vocabulary, strict: bool) -> Result<Corpus> {
        self.record("corpus", path)?;
        let mode = if strict {
            IngestMode::Strict
        } else {
            IngestMode::Lenient
        };
        let (corpus, report) = parse_corpus(open(path)?, vocab, mode)
            .with_context(|| format!("reading corpus {}", path.display()))?;
        if report.skipped_terms + report.skipped_qualifiers > 0 {
            log::warn!(
                "skipped {} unknown term and {} unknown qualifier annotations",
                report.skipped_terms,
                report.skipped_qualifiers
            );
        }
        if !report.empty_documents.is_empty() {
            log::warn!(
                "{} documents have no annotations",
                report.empty_documents.len()
            );
        }
        Ok(corpus)
    }

    /// IC from a frequency table when given, else from corpus document counts.
    pub fn ic_table(
        &mut self,
        freq: Option<&Path>,
        vocab: &Vocabulary,
        corpus: Option<&Corpus>,
    ) -> Result<IcTable> {
        let table = match (freq, corpus) {
            (Some(path), _) => {
                self.record("freq", path)?;
                read_freq_table(open(path)?, vocab)
                    .with_context(|| format!("reading frequency table {}", path.display()))?
            }
            (None, Some(corpus)) => term_frequencies(corpus, vocab),
            (None, None) => bail!("information content needs --corpus or --freq"),
        };
        let closure = descendant_closure(vocab)?;
        Ok(information_content(&table, &closure, vocab)?)
    }
}

/// Buffered writer on `--out`, or stdout when absent.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Similarity matrices on disk, keyed by a digest of the inputs and header.
pub struct DiskCache<'a> {
    pub dir: PathBuf,
    pub key: String,
    pub vocab: &'a Vocabulary,
}

impl DiskCache<'_> {
    fn path(&self, meta: &SimMeta) -> PathBuf {
        let mut h = Sha256::new();
        h.update(self.key.as_bytes());
        h.update(meta.header().as_bytes());
        self.dir
            .join(format!("simmatrix-{}.tsv", hex::encode(h.finalize())))
    }
}

impl SimMatrixStore for DiskCache<'_> {
    fn load(&self, meta: &SimMeta) -> Option<SimMatrix> {
        let path = self.path(meta);
        let file = File::open(&path).ok()?;
        match read_simmatrix(BufReader::new(file), self.vocab) {
            Ok(sm) if sm.meta().header() == meta.header() => {
                log::info!("loaded cached similarity matrix {}", path.display());
                Some(sm)
            }
            Ok(_) => None,
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                None
            }
        }
    }

    fn store(&self, sm: &SimMatrix) {
        let path = self.path(&sm.meta());
        let write = || -> Result<()> {
            fs::create_dir_all(&self.dir)?;
            let tmp = path.with_extension("tmp");
            let mut out = BufWriter::new(File::create(&tmp)?);
            write_simmatrix(sm, self.vocab, &mut out)?;
            out.flush()?;
            drop(out);
            fs::rename(&tmp, &path)?;
            Ok(())
        };
        if let Err(e) = write() {
            log::warn!("could not cache similarity matrix: {e}");
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    inputs: &'a BTreeMap<String, String>,
    output: String,
    elapsed_seconds: f64,
}

/// Writes `<out>.manifest.json` next to the output.
pub fn write_manifest<C: Serialize>(
    out: Option<&Path>,
    command: &str,
    config: &C,
    inputs: &Inputs,
    started: Instant,
) -> Result<()> {
    let Some(out) = out else {
        return Ok(());
    };
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        inputs: &inputs.digests,
        output: out.display().to_string(),
        elapsed_seconds: started.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(PathBuf::from(name), text + "\n")?;
    Ok(())
}
