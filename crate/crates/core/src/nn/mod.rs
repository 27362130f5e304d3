//! From-scratch trainable classifier: embedding, bi-directional LSTM, dense
//! sigmoid head, binary cross-entropy, Adam, and dynamic batch sizing.

pub mod adam;
pub mod model;
pub mod params;
pub mod train;

use serde::{Deserialize, Serialize};

pub use adam::{adam_step, AdamState};
pub use model::{classify, forward, hidden_concat, loss_and_grads, Mode};
pub use params::{init_params, GateWeights, ModelParams};
pub use train::{batch_size, train, EpochLoss, TrainConfig};

/// Model dimensions and inference knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Encoding dimension: vocabulary base size plus UNK and PAD.
    pub vocab_dim: usize,
    pub embed_dim: usize,
    /// Hidden units per direction.
    pub hidden_dim: usize,
    pub seq_len: usize,
    pub dropout_rate: f64,
    pub threshold: f64,
}

impl ModelConfig {
    /// Paper-default dimensions for a given encoding dimension and window.
    pub fn new(vocab_dim: usize, seq_len: usize) -> Self {
        ModelConfig {
            vocab_dim,
            embed_dim: 50,
            hidden_dim: 50,
            seq_len,
            dropout_rate: 0.2,
            threshold: 0.5,
        }
    }

    pub fn assert_valid(&self) {
        assert!(self.vocab_dim >= 1, "vocab_dim must be at least 1");
        assert!(self.embed_dim >= 1, "embed_dim must be at least 1");
        assert!(self.hidden_dim >= 1, "hidden_dim must be at least 1");
        assert!(self.seq_len >= 1, "seq_len must be at least 1");
        assert!(
            (0.0..1.0).contains(&self.dropout_rate),
            "dropout_rate must lie in [0, 1)"
        );
        assert!(
            self.threshold > 0.0 && self.threshold < 1.0,
            "threshold must lie in (0, 1)"
        );
    }
}
