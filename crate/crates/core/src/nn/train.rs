//! The training loop: seeded shuffling, dynamic minibatches, Adam.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vocab::EncodedSequence;

use super::adam::{adam_step, AdamState};
use super::model::{loss_and_grads_with_rng, Mode};
use super::params::{init_params, ModelParams};
use super::ModelConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 10 }
    }
}

/// Dynamic batch size: 10% of the training-set size, at least 1, capped at 300.
pub fn batch_size(train_len: usize) -> usize {
    (((train_len as f64) * 0.1).ceil() as usize).clamp(1, 300)
}

/// Mean training loss of one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub mean_loss: f64,
}

/// Trains a fresh model on the given set. The seed fully determines the
/// initialization, the epoch shuffles, and the dropout masks, so equal
/// (seed, data) pairs give bit-identical parameters.
pub fn train<S: Scalar>(
    cfg: &ModelConfig,
    tcfg: &TrainConfig,
    data: &[EncodedSequence],
    seed: u64,
) -> Result<(ModelParams<S>, Vec<EpochLoss>)> {
    assert!(tcfg.epochs >= 1, "need at least one epoch");
    let has_pos = data.iter().any(|s| s.label == 1);
    let has_neg = data.iter().any(|s| s.label == 0);
    if !has_pos || !has_neg {
        return Err(Error::SingleClassTrainingSet);
    }

    let mut params: ModelParams<S> = init_params(cfg, seed);
    let mut adam = AdamState::new(&params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1); // independent of the init draws

    let bsz = batch_size(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(tcfg.epochs);
    for epoch in 0..tcfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(bsz) {
            let batch: Vec<&EncodedSequence> = chunk.iter().map(|&i| &data[i]).collect();
            let labels: Vec<u8> = chunk.iter().map(|&i| data[i].label).collect();
            let (loss, grads) =
                loss_and_grads_with_rng(cfg, &params, &batch, &labels, Mode::Train, &mut rng);
            adam_step(&mut params, &grads, &mut adam);
            loss_sum += loss.as_f64() * batch.len() as f64;
        }
        log.push(EpochLoss {
            epoch,
            mean_loss: loss_sum / data.len() as f64,
        });
    }
    Ok((params, log))
}
