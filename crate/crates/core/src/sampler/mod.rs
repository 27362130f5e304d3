//! Training/validation set composition for the four evaluation setups.

pub mod lsh;
pub mod tfidf;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{truncate, LabeledCorpus, MethodSequence};
use crate::scalar::Scalar;
use crate::vocab::{encode, EncodedSequence, Vocabulary};

pub use lsh::{ann_select, AnnConfig, LshIndex};
pub use tfidf::{freq_vector, tfidf_vectors, tfidf_weights, TfIdfVector};

/// The four training/validation compositions.
///
/// * `BS`  — balanced training (uniform non-buggy sample), stratified validation.
/// * `BAnnS` — balanced training with ANN-selected non-buggy, stratified validation.
/// * `SS`  — stratified training, stratified validation.
/// * `BB`  — balanced training, balanced validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setup {
    BS,
    #[serde(rename = "B-ANN-S")]
    BAnnS,
    SS,
    BB,
}

impl Setup {
    pub const ALL: [Setup; 4] = [Setup::BS, Setup::BAnnS, Setup::SS, Setup::BB];
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Setup::BS => "BS",
            Setup::BAnnS => "B-ANN-S",
            Setup::SS => "SS",
            Setup::BB => "BB",
        };
        f.write_str(name)
    }
}

impl FromStr for Setup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BS" => Ok(Setup::BS),
            "B-ANN-S" | "BANNS" => Ok(Setup::BAnnS),
            "SS" => Ok(Setup::SS),
            "BB" => Ok(Setup::BB),
            other => Err(format!(
                "unknown setup {other:?} (expected BS, B-ANN-S, SS, or BB)"
            )),
        }
    }
}

/// Knobs for split composition.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Training fraction of the stratified shuffle-split.
    pub ratio: f64,
    pub ann: AnnConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            ratio: 0.8,
            ann: AnnConfig::default(),
        }
    }
}

/// One composed training/validation split of encoded sequences.
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub setup: Setup,
    pub seed: u64,
    pub train: Vec<EncodedSequence>,
    pub validation: Vec<EncodedSequence>,
}

impl DatasetSplit {
    pub fn count_labels(set: &[EncodedSequence]) -> (usize, usize) {
        let buggy = set.iter().filter(|s| s.label == 1).count();
        (buggy, set.len() - buggy)
    }
}

/// Composes a split for one setup: a per-class stratified shuffle-split into
/// training and validation pools first, then the setup's composition rule.
/// Fully determined by `seed`.
pub fn compose<S: Scalar>(
    setup: Setup,
    corpus: &LabeledCorpus,
    vocab: &Vocabulary,
    window: usize,
    cfg: &SamplerConfig,
    seed: u64,
) -> Result<DatasetSplit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let buggy: Vec<MethodSequence> = corpus.buggy.iter().map(|m| truncate(m, window)).collect();
    let non_buggy: Vec<MethodSequence> = corpus
        .non_buggy
        .iter()
        .map(|m| truncate(m, window))
        .collect();

    let (train_b, val_b) = stratified_split(buggy, cfg.ratio, &mut rng);
    let (train_n, val_n) = stratified_split(non_buggy, cfg.ratio, &mut rng);
    for (side, pool) in [
        ("buggy training", &train_b),
        ("non-buggy training", &train_n),
        ("buggy validation", &val_b),
        ("non-buggy validation", &val_n),
    ] {
        if pool.is_empty() {
            return Err(Error::EmptySplitSide {
                side,
                ratio: cfg.ratio,
            });
        }
    }

    let encode_all = |seqs: &[MethodSequence], label: u8| -> Vec<EncodedSequence> {
        seqs.iter().map(|s| encode(s, vocab, label)).collect()
    };

    let train_non_buggy: Vec<MethodSequence> = match setup {
        Setup::SS => train_n.clone(),
        Setup::BS | Setup::BB => sample_without_replacement(&train_n, train_b.len(), &mut rng)?,
        Setup::BAnnS => {
            // TF-IDF statistics fit over both training pools; validation
            // vectors are never candidates.
            let mut fit: Vec<MethodSequence> = train_b.clone();
            fit.extend(train_n.iter().cloned());
            let vectors = tfidf_vectors::<S>(&fit, vocab)?;
            let (buggy_vecs, pool_vecs) = vectors.split_at(train_b.len());
            let selected = ann_select(buggy_vecs, pool_vecs, &cfg.ann, seed)?;
            let wanted: HashSet<&str> = selected.iter().map(|s| s.as_str()).collect();
            train_n
                .iter()
                .filter(|s| wanted.contains(s.method_id.as_str()))
                .cloned()
                .collect()
        }
    };

    let validation_non_buggy: Vec<MethodSequence> = match setup {
        Setup::BB => sample_without_replacement(&val_n, val_b.len(), &mut rng)?,
        _ => val_n,
    };

    let mut train = encode_all(&train_b, 1);
    train.extend(encode_all(&train_non_buggy, 0));
    let mut validation = encode_all(&val_b, 1);
    validation.extend(encode_all(&validation_non_buggy, 0));

    Ok(DatasetSplit {
        setup,
        seed,
        train,
        validation,
    })
}

/// Shuffles one class and splits it at `round(ratio * len)`.
fn stratified_split<T>(
    mut items: Vec<T>,
    ratio: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<T>, Vec<T>) {
    items.shuffle(rng);
    let cut = ((items.len() as f64) * ratio).round() as usize;
    let cut = cut.min(items.len());
    let val = items.split_off(cut);
    (items, val)
}

fn sample_without_replacement(
    pool: &[MethodSequence],
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MethodSequence>> {
    if pool.len() < k {
        return Err(Error::CannotBalance {
            buggy: k,
            non_buggy: pool.len(),
        });
    }
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.shuffle(rng);
    Ok(order[..k].iter().map(|&i| pool[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RawMethod, Token, TokenClass};
    use crate::vocab::build_vocabulary;

    fn corpus(buggy: usize, non_buggy: usize) -> (LabeledCorpus, Vocabulary) {
        let make = |id: String, marker: &str| RawMethod {
            method_id: id,
            file: "F.java".into(),
            tokens: ["void", "f", "(", ")", "{", marker, ";", "}"]
                .iter()
                .map(|l| Token::new(*l, TokenClass::Identifier, 1))
                .collect(),
        };
        let buggy: Vec<RawMethod> = (0..buggy).map(|i| make(format!("b{i:04}"), "alarm")).collect();
        let non_buggy: Vec<RawMethod> = (0..non_buggy)
            .map(|i| make(format!("n{i:04}"), "plain"))
            .collect();
        let mut all = buggy.clone();
        all.extend(non_buggy.iter().cloned());
        let vocab = build_vocabulary(&all, 50).unwrap();
        (
            LabeledCorpus {
                kind: "K".into(),
                buggy,
                non_buggy,
            },
            vocab,
        )
    }

    fn counts(split: &DatasetSplit) -> (usize, usize, usize, usize) {
        let (tb, tn) = DatasetSplit::count_labels(&split.train);
        let (vb, vn) = DatasetSplit::count_labels(&split.validation);
        (tb, tn, vb, vn)
    }

    #[test]
    fn stratified_worked_example() {
        // 200 methods, 25% buggy: training 40 + 120, validation 10 + 30.
        let (corpus, vocab) = corpus(50, 150);
        let split =
            compose::<f64>(Setup::SS, &corpus, &vocab, 8, &SamplerConfig::default(), 3).unwrap();
        assert_eq!(counts(&split), (40, 120, 10, 30));
    }

    #[test]
    fn balanced_training_setups() {
        let (corpus, vocab) = corpus(50, 150);
        for setup in [Setup::BS, Setup::BAnnS] {
            let split =
                compose::<f64>(setup, &corpus, &vocab, 8, &SamplerConfig::default(), 3).unwrap();
            assert_eq!(counts(&split), (40, 40, 10, 30), "setup {setup}");
        }
    }

    #[test]
    fn balanced_validation_in_bb() {
        let (corpus, vocab) = corpus(50, 150);
        let split =
            compose::<f64>(Setup::BB, &corpus, &vocab, 8, &SamplerConfig::default(), 3).unwrap();
        assert_eq!(counts(&split), (40, 40, 10, 10));
    }

    #[test]
    fn train_and_validation_are_disjoint_in_every_setup() {
        let (corpus, vocab) = corpus(25, 75);
        for setup in Setup::ALL {
            for seed in [1u64, 2, 3] {
                let split =
                    compose::<f64>(setup, &corpus, &vocab, 8, &SamplerConfig::default(), seed)
                        .unwrap();
                let train_ids: HashSet<&str> =
                    split.train.iter().map(|s| s.method_id.as_str()).collect();
                assert!(split
                    .validation
                    .iter()
                    .all(|s| !train_ids.contains(s.method_id.as_str())));
            }
        }
    }

    #[test]
    fn same_seed_reproduces_the_split() {
        let (corpus, vocab) = corpus(20, 60);
        for setup in Setup::ALL {
            let a = compose::<f64>(setup, &corpus, &vocab, 8, &SamplerConfig::default(), 42)
                .unwrap();
            let b = compose::<f64>(setup, &corpus, &vocab, 8, &SamplerConfig::default(), 42)
                .unwrap();
            assert_eq!(a.train, b.train);
            assert_eq!(a.validation, b.validation);
        }
    }

    #[test]
    fn different_seeds_keep_exact_proportions() {
        let (corpus, vocab) = corpus(30, 90);
        let mut seen = HashSet::new();
        for seed in 0..5u64 {
            let split =
                compose::<f64>(Setup::SS, &corpus, &vocab, 8, &SamplerConfig::default(), seed)
                    .unwrap();
            assert_eq!(counts(&split), (24, 72, 6, 18));
            let ids: Vec<String> = split
                .train
                .iter()
                .map(|s| s.method_id.clone())
                .collect();
            seen.insert(ids);
        }
        assert!(seen.len() > 1, "seeds should shuffle the membership");
    }

    #[test]
    fn bs_and_bb_share_the_training_set_for_a_seed() {
        let (corpus, vocab) = corpus(40, 120);
        let bs = compose::<f64>(Setup::BS, &corpus, &vocab, 8, &SamplerConfig::default(), 9)
            .unwrap();
        let bb = compose::<f64>(Setup::BB, &corpus, &vocab, 8, &SamplerConfig::default(), 9)
            .unwrap();
        assert_eq!(bs.train, bb.train);
    }

    #[test]
    fn ann_candidates_come_from_the_training_pool_only() {
        let (corpus, vocab) = corpus(20, 60);
        let split =
            compose::<f64>(Setup::BAnnS, &corpus, &vocab, 8, &SamplerConfig::default(), 5)
                .unwrap();
        let ss = compose::<f64>(Setup::SS, &corpus, &vocab, 8, &SamplerConfig::default(), 5)
            .unwrap();
        let train_pool: HashSet<&str> = ss
            .train
            .iter()
            .filter(|s| s.label == 0)
            .map(|s| s.method_id.as_str())
            .collect();
        for s in split.train.iter().filter(|s| s.label == 0) {
            assert!(train_pool.contains(s.method_id.as_str()));
        }
    }

    #[test]
    fn tiny_class_side_errors_out() {
        let (corpus, vocab) = corpus(1, 3);
        let err = compose::<f64>(Setup::SS, &corpus, &vocab, 8, &SamplerConfig::default(), 1)
            .unwrap_err();
        assert!(matches!(err, Error::EmptySplitSide { .. }));
    }

    #[test]
    fn setup_names_round_trip() {
        for setup in Setup::ALL {
            let parsed: Setup = setup.to_string().parse().unwrap();
            assert_eq!(parsed, setup);
        }
        assert_eq!("banns".parse::<Setup>().unwrap(), Setup::BAnnS);
    }
}
