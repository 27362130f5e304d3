//! Command-line pipeline: ingest -> vocab -> sample -> train -> eval, the
//! all-in-one `run`, and a synthetic corpus generator for desk-scale checks.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use warnlearn::eval::{run_experiment, scatter_csv, summarize, ExperimentConfig, ExperimentReport, Summary};
use warnlearn::ingest::{label, Warning};
use warnlearn::io::{self, Checkpoint, KindCounts, Manifest, CHECKPOINT_VERSION};
use warnlearn::nn::{self, ModelConfig, Mode, TrainConfig};
use warnlearn::sampler::{compose, AnnConfig, SamplerConfig, Setup};
use warnlearn::synth::{generate, ConfounderStyle, SynthSpec};
use warnlearn::vocab::build_vocabulary;
use warnlearn::Real;

#[derive(Parser)]
#[command(
    name = "warnlearn",
    version,
    about = "Train and evaluate per-warning-kind bug classifiers over source-code token sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lex a corpus, join analyzer warnings, and write labeled corpora per kind.
    Ingest {
        /// Directory of .java sources, or a pre-tokenized methods JSONL.
        #[arg(long)]
        corpus: PathBuf,
        /// Warnings JSONL ({kind, line, method_id} per line).
        #[arg(long)]
        warnings: PathBuf,
        #[arg(long)]
        workdir: PathBuf,
        /// Comma-separated warning kinds; default: every kind in the warnings file.
        #[arg(long)]
        kinds: Option<String>,
        /// Token window used for the beyond-window labeling rule.
        #[arg(long, default_value_t = 50)]
        window: usize,
    },
    /// Build the frequency-ranked vocabulary over a corpus.
    Vocab {
        /// Directory of sources or methods JSONL (e.g. workdir/methods.jsonl).
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        workdir: PathBuf,
        #[arg(long, default_value_t = 1000)]
        size: usize,
    },
    /// Compose train/validation splits for one kind and setup.
    Sample {
        #[arg(long)]
        workdir: PathBuf,
        #[arg(long)]
        kind: String,
        /// BS, B-ANN-S, SS, or BB.
        #[arg(long)]
        setup: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 0.8)]
        ratio: f64,
        #[arg(long, default_value_t = 8)]
        tables: usize,
        #[arg(long, default_value_t = 16)]
        bits: usize,
    },
    /// Train a classifier on one split file.
    Train {
        #[arg(long)]
        workdir: PathBuf,
        /// Split JSONL produced by `sample`.
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        epochs: usize,
        #[arg(long, default_value_t = 50)]
        embed_dim: usize,
        #[arg(long, default_value_t = 50)]
        hidden_dim: usize,
        #[arg(long, default_value_t = 0.2)]
        dropout: f64,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Checkpoint path; defaults to <workdir>/model.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint on a split's validation part.
    Eval {
        #[arg(long)]
        workdir: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        split: PathBuf,
        /// Optional metrics JSON output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full experiment grid from a config file and write reports.
    Run {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Base seed; repetitions use seed, seed+1, ...
        #[arg(long)]
        seed: u64,
    },
    /// Generate a synthetic corpus plus ground-truth warnings.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        methods: usize,
        #[arg(long, default_value_t = 0.1)]
        bug_rate: f64,
        #[arg(long, default_value_t = 0.3)]
        confounder_rate: f64,
        #[arg(long, default_value = "DefaultCharset")]
        kind: String,
        /// exact, scattered, or guarded.
        #[arg(long, default_value = "scattered")]
        style: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        window: usize,
    },
}

/// Run configuration persisted next to the outputs it produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    workdir: PathBuf,
    /// Provenance of the ingest stage; not re-read by `run`.
    #[serde(default)]
    corpus: Option<PathBuf>,
    #[serde(default)]
    warnings: Option<PathBuf>,
    /// Empty means every kind in the manifest.
    #[serde(default)]
    kinds: Vec<String>,
    #[serde(default = "default_setups")]
    setups: Vec<String>,
    /// Defaults to the manifest's ingest window.
    #[serde(default)]
    window: Option<usize>,
    #[serde(default = "default_vocab_size")]
    vocab_size: usize,
    #[serde(default = "default_ratio")]
    ratio: f64,
    #[serde(default = "default_reps")]
    reps: usize,
    #[serde(default = "default_epochs")]
    epochs: usize,
    #[serde(default = "default_dim")]
    embed_dim: usize,
    #[serde(default = "default_dim")]
    hidden_dim: usize,
    #[serde(default = "default_dropout")]
    dropout: f64,
    #[serde(default = "default_threshold")]
    threshold: f64,
    #[serde(default = "default_tables")]
    lsh_tables: usize,
    #[serde(default = "default_bits")]
    lsh_bits: usize,
    #[serde(default)]
    seed: u64,
}

fn default_setups() -> Vec<String> {
    vec!["BS".into(), "B-ANN-S".into(), "SS".into(), "BB".into()]
}
fn default_vocab_size() -> usize {
    1000
}
fn default_ratio() -> f64 {
    0.8
}
fn default_reps() -> usize {
    5
}
fn default_epochs() -> usize {
    10
}
fn default_dim() -> usize {
    50
}
fn default_dropout() -> f64 {
    0.2
}
fn default_threshold() -> f64 {
    0.5
}
fn default_tables() -> usize {
    8
}
fn default_bits() -> usize {
    16
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest {
            corpus,
            warnings,
            workdir,
            kinds,
            window,
        } => cmd_ingest(&corpus, &warnings, &workdir, kinds.as_deref(), window),
        Command::Vocab {
            corpus,
            workdir,
            size,
        } => cmd_vocab(&corpus, &workdir, size),
        Command::Sample {
            workdir,
            kind,
            setup,
            seed,
            reps,
            ratio,
            tables,
            bits,
        } => cmd_sample(&workdir, &kind, &setup, seed, reps, ratio, tables, bits),
        Command::Train {
            workdir,
            split,
            seed,
            epochs,
            embed_dim,
            hidden_dim,
            dropout,
            threshold,
            out,
        } => cmd_train(
            &workdir, &split, seed, epochs, embed_dim, hidden_dim, dropout, threshold, out,
        ),
        Command::Eval {
            workdir,
            model,
            split,
            out,
        } => cmd_eval(&workdir, &model, &split, out),
        Command::Run { config, seed } => cmd_run(&config, seed),
        Command::Synth {
            out,
            methods,
            bug_rate,
            confounder_rate,
            kind,
            style,
            seed,
            window,
        } => cmd_synth(
            &out,
            methods,
            bug_rate,
            confounder_rate,
            &kind,
            &style,
            seed,
            window,
        ),
    }
}

fn cmd_ingest(
    corpus_path: &Path,
    warnings_path: &Path,
    workdir: &Path,
    kinds: Option<&str>,
    window: usize,
) -> Result<()> {
    fs::create_dir_all(workdir)
        .with_context(|| format!("creating workdir {}", workdir.display()))?;
    let methods = io::load_corpus(corpus_path)
        .with_context(|| format!("loading corpus {}", corpus_path.display()))?;
    if methods.is_empty() {
        bail!("corpus {} contains no methods", corpus_path.display());
    }
    let warnings: Vec<Warning> = io::read_warnings_jsonl(warnings_path)
        .with_context(|| format!("loading warnings {}", warnings_path.display()))?;

    let kind_list: Vec<String> = match kinds {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => {
            let mut distinct: Vec<String> = warnings.iter().map(|w| w.kind.clone()).collect();
            distinct.sort();
            distinct.dedup();
            distinct
        }
    };
    if kind_list.is_empty() {
        bail!("no warning kinds to ingest");
    }

    let known: std::collections::HashSet<&str> =
        methods.iter().map(|m| m.method_id.as_str()).collect();
    let skipped = warnings
        .iter()
        .filter(|w| !known.contains(w.method_id.as_str()))
        .count();
    if skipped > 0 {
        eprintln!("warning: {skipped} warnings reference unknown methods and were skipped");
    }

    let mut kind_counts = BTreeMap::new();
    for kind in &kind_list {
        let outcome = label(&methods, &warnings, kind, window);
        kind_counts.insert(
            kind.clone(),
            KindCounts {
                buggy: outcome.corpus.buggy.len(),
                non_buggy: outcome.corpus.non_buggy.len(),
            },
        );
        io::write_labeled_jsonl(&workdir.join(format!("labeled-{kind}.jsonl")), &outcome.corpus)?;
    }

    io::write_methods_jsonl(&workdir.join("methods.jsonl"), &methods)?;
    let manifest = Manifest {
        window,
        methods: methods.len(),
        warnings: warnings.len(),
        warnings_skipped: skipped,
        kinds: kind_counts,
    };
    io::write_manifest(&workdir.join("manifest.json"), &manifest)?;
    eprintln!(
        "ingested {} methods, {} warnings, {} kinds -> {}",
        methods.len(),
        warnings.len(),
        kind_list.len(),
        workdir.display()
    );
    Ok(())
}

fn cmd_vocab(corpus_path: &Path, workdir: &Path, size: usize) -> Result<()> {
    fs::create_dir_all(workdir)?;
    let methods = io::load_corpus(corpus_path)
        .with_context(|| format!("loading corpus {}", corpus_path.display()))?;
    let vocab = build_vocabulary(&methods, size)?;
    io::write_vocab(&workdir.join("vocab.json"), &vocab)?;
    eprintln!(
        "vocabulary of {} entries (coverage {:.2}%) -> {}",
        vocab.size_base(),
        100.0 * vocab.coverage(),
        workdir.join("vocab.json").display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    workdir: &Path,
    kind: &str,
    setup: &str,
    seed: u64,
    reps: usize,
    ratio: f64,
    tables: usize,
    bits: usize,
) -> Result<()> {
    let setup: Setup = setup.parse().map_err(anyhow::Error::msg)?;
    let manifest = io::read_manifest(&workdir.join("manifest.json"))
        .context("missing manifest.json; run `warnlearn ingest` first")?;
    let vocab = io::read_vocab(&workdir.join("vocab.json"))
        .context("missing vocab.json; run `warnlearn vocab` first")?;
    let corpus = io::read_labeled_jsonl(&workdir.join(format!("labeled-{kind}.jsonl")))?;
    let cfg = SamplerConfig {
        ratio,
        ann: AnnConfig {
            tables,
            bits,
            ..AnnConfig::default()
        },
    };
    for rep in 0..reps {
        let split = compose::<Real>(setup, &corpus, &vocab, manifest.window, &cfg, seed + rep as u64)
            .with_context(|| format!("kind {kind}, setup {setup}, rep {rep}"))?;
        let path = workdir.join(format!("split-{setup}-{rep}.jsonl"));
        io::write_split(&path, &split)?;
        eprintln!(
            "split {} ({} train, {} validation)",
            path.display(),
            split.train.len(),
            split.validation.len()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    workdir: &Path,
    split_path: &Path,
    seed: u64,
    epochs: usize,
    embed_dim: usize,
    hidden_dim: usize,
    dropout: f64,
    threshold: f64,
    out: Option<PathBuf>,
) -> Result<()> {
    let vocab = io::read_vocab(&workdir.join("vocab.json"))?;
    let split = io::read_split(split_path)
        .with_context(|| format!("loading split {}", split_path.display()))?;
    let seq_len = split
        .train
        .first()
        .map(|s| s.indices.len())
        .context("split has no training sequences")?;
    let config = ModelConfig {
        vocab_dim: vocab.dim(),
        embed_dim,
        hidden_dim,
        seq_len,
        dropout_rate: dropout,
        threshold,
    };
    let (params, log) = nn::train::<Real>(&config, &TrainConfig { epochs }, &split.train, seed)?;
    for entry in &log {
        eprintln!("epoch {:>3}  mean loss {:.6}", entry.epoch, entry.mean_loss);
    }
    let out = out.unwrap_or_else(|| workdir.join("model.json"));
    io::write_checkpoint(
        &out,
        &Checkpoint {
            version: CHECKPOINT_VERSION,
            config,
            vocab_fingerprint: vocab.fingerprint(),
            params,
        },
    )?;
    io::write_train_log(&workdir.join("train-log.csv"), &log)?;
    eprintln!("checkpoint -> {}", out.display());
    Ok(())
}

fn cmd_eval(workdir: &Path, model_path: &Path, split_path: &Path, out: Option<PathBuf>) -> Result<()> {
    let vocab = io::read_vocab(&workdir.join("vocab.json"))?;
    let ck: Checkpoint<Real> = io::read_checkpoint(model_path)?;
    if ck.vocab_fingerprint != vocab.fingerprint() {
        bail!(
            "checkpoint {} was trained with a different vocabulary",
            model_path.display()
        );
    }
    let split = io::read_split(split_path)?;
    if split.validation.is_empty() {
        bail!("split {} has no validation part", split_path.display());
    }
    let probs = nn::forward(&ck.config, &ck.params, &split.validation, Mode::Infer, 0);
    let predictions: Vec<u8> = probs.iter().map(|&p| u8::from(p >= ck.config.threshold)).collect();
    let labels: Vec<u8> = split.validation.iter().map(|s| s.label).collect();
    let m = warnlearn::eval::metrics(&predictions, &labels)?;
    println!(
        "validation {}: precision {:.2}%  recall {:.2}%  f1 {:.2}%  (tp {} fp {} tn {} fn {})",
        split.setup,
        100.0 * m.precision,
        100.0 * m.recall,
        100.0 * m.f1,
        m.tp,
        m.fp,
        m.tn,
        m.fn_
    );
    if let Some(out) = out {
        fs::write(&out, serde_json::to_string_pretty(&m)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportFile<'a> {
    reports: &'a [ExperimentReport],
    summary: &'a Summary,
}

fn cmd_run(config_path: &Path, seed: u64) -> Result<()> {
    let text = fs::read_to_string(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let mut config: RunConfig =
        toml::from_str(&text).with_context(|| format!("parsing {}", config_path.display()))?;
    config.seed = seed;
    let workdir = config.workdir.clone();

    let manifest = io::read_manifest(&workdir.join("manifest.json"))
        .context("missing manifest.json; run `warnlearn ingest` first")?;
    let vocab = io::read_vocab(&workdir.join("vocab.json"))
        .context("missing vocab.json; run `warnlearn vocab` first")?;
    let window = match config.window {
        Some(w) if w != manifest.window => bail!(
            "config window {w} does not match the ingest window {}",
            manifest.window
        ),
        Some(w) => w,
        None => manifest.window,
    };
    let kinds: Vec<String> = if config.kinds.is_empty() {
        manifest.kinds.keys().cloned().collect()
    } else {
        config.kinds.clone()
    };
    let setups: Vec<Setup> = config
        .setups
        .iter()
        .map(|s| s.parse().map_err(anyhow::Error::msg))
        .collect::<Result<_>>()?;

    let mut reports = Vec::new();
    for kind in &kinds {
        let corpus = io::read_labeled_jsonl(&workdir.join(format!("labeled-{kind}.jsonl")))
            .with_context(|| format!("kind {kind}"))?;
        for &setup in &setups {
            eprintln!("kind {kind}, setup {setup}: {} reps", config.reps);
            let cfg = ExperimentConfig {
                window,
                sampler: SamplerConfig {
                    ratio: config.ratio,
                    ann: AnnConfig {
                        tables: config.lsh_tables,
                        bits: config.lsh_bits,
                        ..AnnConfig::default()
                    },
                },
                model: ModelConfig {
                    vocab_dim: vocab.dim(),
                    embed_dim: config.embed_dim,
                    hidden_dim: config.hidden_dim,
                    seq_len: window,
                    dropout_rate: config.dropout,
                    threshold: config.threshold,
                },
                train: TrainConfig {
                    epochs: config.epochs,
                },
                reps: config.reps,
                base_seed: seed,
            };
            let report = run_experiment::<Real>(&corpus, &vocab, setup, &cfg)
                .with_context(|| format!("kind {kind}, setup {setup}"))?;
            eprintln!(
                "  mean precision {:.2}%, recall {:.2}%, f1 {:.2}%",
                100.0 * report.mean.precision,
                100.0 * report.mean.recall,
                100.0 * report.mean.f1
            );
            reports.push(report);
        }
    }

    let summary = summarize(&reports)?;
    fs::write(workdir.join("report.csv"), summary.to_csv())?;
    fs::write(workdir.join("report.txt"), summary.to_text())?;
    fs::write(
        workdir.join("report.json"),
        serde_json::to_string_pretty(&ReportFile {
            reports: &reports,
            summary: &summary,
        })? + "\n",
    )?;
    fs::write(workdir.join("scatter.csv"), scatter_csv(&reports))?;
    fs::write(
        workdir.join("run-config.toml"),
        toml::to_string_pretty(&config).context("serializing run config")?,
    )?;
    print!("{}", summary.to_text());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    out: &Path,
    methods: usize,
    bug_rate: f64,
    confounder_rate: f64,
    kind: &str,
    style: &str,
    seed: u64,
    window: usize,
) -> Result<()> {
    let style: ConfounderStyle = style.parse().map_err(anyhow::Error::msg)?;
    fs::create_dir_all(out)?;
    let spec = SynthSpec {
        methods,
        bug_rate,
        confounder_rate,
        kind: kind.to_string(),
        style,
        window,
        ..SynthSpec::default()
    };
    let corpus = generate(&spec, seed)?;
    io::write_methods_jsonl(&out.join("corpus.jsonl"), &corpus.methods)?;
    io::write_warnings_jsonl(&out.join("warnings.jsonl"), &corpus.warnings)?;
    eprintln!(
        "synthesized {} methods ({} warnings) -> {}",
        corpus.methods.len(),
        corpus.warnings.len(),
        out.display()
    );
    Ok(())
}
