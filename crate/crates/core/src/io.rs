//! File formats: JSONL corpora, warnings, labeled corpora, splits, the
//! vocabulary file, manifests, model checkpoints, and training logs.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{extract_methods, lex, LabeledCorpus, RawMethod, Warning};
use crate::nn::{EpochLoss, ModelConfig, ModelParams};
use crate::sampler::{DatasetSplit, Setup};
use crate::scalar::Scalar;
use crate::vocab::{EncodedSequence, Vocabulary};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            path: path.display().to_string(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, records: impl IntoIterator<Item = T>) -> Result<()> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut writer, &record).map_err(|e| Error::BadArtifact {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        writer.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn read_methods_jsonl(path: &Path) -> Result<Vec<RawMethod>> {
    read_jsonl(path)
}

pub fn write_methods_jsonl(path: &Path, methods: &[RawMethod]) -> Result<()> {
    write_jsonl(path, methods)
}

pub fn read_warnings_jsonl(path: &Path) -> Result<Vec<Warning>> {
    read_jsonl(path)
}

pub fn write_warnings_jsonl(path: &Path, warnings: &[Warning]) -> Result<()> {
    write_jsonl(path, warnings)
}

/// Lexes and extracts every `.java` file under a directory, in sorted path
/// order so corpus identity is stable.
pub fn lex_corpus_dir(dir: &Path) -> Result<Vec<RawMethod>> {
    let mut files: Vec<_> = walkdir::WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| {
            e.file_type().is_file()
                && e.path().extension().map(|x| x == "java").unwrap_or(false)
        })
        .map(|e| e.into_path())
        .collect();
    files.sort();
    let mut methods = Vec::new();
    for file in files {
        let source = fs::read_to_string(&file).map_err(|e| io_err(&file, e))?;
        let rel = file
            .strip_prefix(dir)
            .unwrap_or(&file)
            .to_string_lossy()
            .replace('\\', "/");
        let tokens = lex(&source)?;
        methods.extend(extract_methods(&tokens, &rel)?);
    }
    Ok(methods)
}

/// Loads a corpus from either a directory of source files or a pre-tokenized
/// methods JSONL.
pub fn load_corpus(path: &Path) -> Result<Vec<RawMethod>> {
    if path.is_dir() {
        lex_corpus_dir(path)
    } else {
        read_methods_jsonl(path)
    }
}

/// One labeled method as persisted per kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub method_id: String,
    pub file: String,
    pub kind: String,
    pub label: u8,
    pub tokens: Vec<crate::ingest::Token>,
}

pub fn write_labeled_jsonl(path: &Path, corpus: &LabeledCorpus) -> Result<()> {
    let records = corpus
        .buggy
        .iter()
        .map(|m| (m, 1u8))
        .chain(corpus.non_buggy.iter().map(|m| (m, 0u8)))
        .map(|(m, label)| LabeledRecord {
            method_id: m.method_id.clone(),
            file: m.file.clone(),
            kind: corpus.kind.clone(),
            label,
            tokens: m.tokens.clone(),
        });
    write_jsonl(path, records)
}

pub fn read_labeled_jsonl(path: &Path) -> Result<LabeledCorpus> {
    let records: Vec<LabeledRecord> = read_jsonl(path)?;
    let kind = records
        .first()
        .map(|r| r.kind.clone())
        .ok_or_else(|| Error::BadArtifact {
            path: path.display().to_string(),
            message: "empty labeled corpus".to_string(),
        })?;
    let mut corpus = LabeledCorpus {
        kind,
        buggy: Vec::new(),
        non_buggy: Vec::new(),
    };
    for r in records {
        let method = RawMethod {
            method_id: r.method_id,
            file: r.file,
            tokens: r.tokens,
        };
        if r.label == 1 {
            corpus.buggy.push(method);
        } else {
            corpus.non_buggy.push(method);
        }
    }
    Ok(corpus)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub buggy: usize,
    pub non_buggy: usize,
}

/// Ingest summary: window, corpus size, warning bookkeeping, and per-kind
/// class counts. Keys are sorted so the file is byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub window: usize,
    pub methods: usize,
    pub warnings: usize,
    pub warnings_skipped: usize,
    pub kinds: BTreeMap<String, KindCounts>,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest).map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VocabFile {
    entries: Vec<String>,
    size_base: usize,
    coverage: f64,
}

pub fn write_vocab(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let file = VocabFile {
        entries: vocab.entries().to_vec(),
        size_base: vocab.size_base(),
        coverage: vocab.coverage(),
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

pub fn read_vocab(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let file: VocabFile = serde_json::from_str(&text).map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if file.size_base != file.entries.len() {
        return Err(Error::BadArtifact {
            path: path.display().to_string(),
            message: format!(
                "size_base {} does not match {} entries",
                file.size_base,
                file.entries.len()
            ),
        });
    }
    Ok(Vocabulary::from_entries(file.entries, file.coverage))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train_buggy: usize,
    pub train_non_buggy: usize,
    pub validation_buggy: usize,
    pub validation_non_buggy: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SplitHeader {
    setup: Setup,
    seed: u64,
    counts: SplitCounts,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SplitRecord {
    part: String,
    method_id: String,
    label: u8,
    indices: Vec<u32>,
}

/// Persists a split as JSONL: a header record with setup, seed, and counts,
/// then one record per sequence.
pub fn write_split(path: &Path, split: &DatasetSplit) -> Result<()> {
    let (tb, tn) = DatasetSplit::count_labels(&split.train);
    let (vb, vn) = DatasetSplit::count_labels(&split.validation);
    let header = serde_json::to_string(&SplitHeader {
        setup: split.setup,
        seed: split.seed,
        counts: SplitCounts {
            train_buggy: tb,
            train_non_buggy: tn,
            validation_buggy: vb,
            validation_non_buggy: vn,
        },
    })
    .map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;

    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(header.as_bytes())
        .and_then(|_| writer.write_all(b"\n"))
        .map_err(|e| io_err(path, e))?;
    let record = |part: &str, s: &EncodedSequence| SplitRecord {
        part: part.to_string(),
        method_id: s.method_id.clone(),
        label: s.label,
        indices: s.indices.clone(),
    };
    for s in &split.train {
        serde_json::to_writer(&mut writer, &record("train", s)).map_err(|e| {
            Error::BadArtifact {
                path: path.display().to_string(),
                message: e.to_string(),
            }
        })?;
        writer.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    for s in &split.validation {
        serde_json::to_writer(&mut writer, &record("validation", s)).map_err(|e| {
            Error::BadArtifact {
                path: path.display().to_string(),
                message: e.to_string(),
            }
        })?;
        writer.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn read_split(path: &Path) -> Result<DatasetSplit> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::BadArtifact {
            path: path.display().to_string(),
            message: "missing split header".to_string(),
        })?
        .map_err(|e| io_err(path, e))?;
    let header: SplitHeader =
        serde_json::from_str(&header_line).map_err(|e| Error::MalformedRecord {
            path: path.display().to_string(),
            line: 1,
            message: e.to_string(),
        })?;
    let mut split = DatasetSplit {
        setup: header.setup,
        seed: header.seed,
        train: Vec::new(),
        validation: Vec::new(),
    };
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SplitRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
                path: path.display().to_string(),
                line: lineno + 2,
                message: e.to_string(),
            })?;
        let seq = EncodedSequence {
            method_id: record.method_id,
            label: record.label,
            indices: record.indices,
        };
        match record.part.as_str() {
            "train" => split.train.push(seq),
            "validation" => split.validation.push(seq),
            other => {
                return Err(Error::MalformedRecord {
                    path: path.display().to_string(),
                    line: lineno + 2,
                    message: format!("unknown part {other:?}"),
                })
            }
        }
    }
    Ok(split)
}

/// Versioned model checkpoint tying the parameters to their configuration and
/// the vocabulary fingerprint they were trained against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint<S: Scalar> {
    pub version: u32,
    pub config: ModelConfig,
    pub vocab_fingerprint: String,
    pub params: ModelParams<S>,
}

pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<S: Scalar + Serialize>(path: &Path, checkpoint: &Checkpoint<S>) -> Result<()> {
    let text = serde_json::to_string(checkpoint).map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn read_checkpoint<S: Scalar + DeserializeOwned>(path: &Path) -> Result<Checkpoint<S>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let ck: Checkpoint<S> = serde_json::from_str(&text).map_err(|e| Error::BadArtifact {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if ck.version != CHECKPOINT_VERSION {
        return Err(Error::BadArtifact {
            path: path.display().to_string(),
            message: format!("unsupported checkpoint version {}", ck.version),
        });
    }
    Ok(ck)
}

/// Training log as CSV: epoch, mean loss.
pub fn write_train_log(path: &Path, log: &[EpochLoss]) -> Result<()> {
    let mut text = String::from("epoch,mean_loss\n");
    for entry in log {
        text.push_str(&format!("{},{:.6}\n", entry.epoch, entry.mean_loss));
    }
    fs::write(path, text).map_err(|e| io_err(path, e))
}
