//! Trainable parameters and their initialization.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::ModelConfig;

/// One LSTM direction. Gate blocks are concatenated along the second axis in
/// the order input, forget, candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateWeights<S: Scalar> {
    /// Input projection, `embed_dim x 4*hidden`.
    pub w: Array2<S>,
    /// Recurrent projection, `hidden x 4*hidden`.
    pub u: Array2<S>,
    /// Gate biases, `4*hidden`.
    pub b: Array1<S>,
}

/// Everything the optimizer updates: the embedding matrix, both LSTM
/// directions, and the sigmoid output head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<S: Scalar> {
    /// `vocab_dim x embed_dim`; realizes the learned embedding of one-hot tokens.
    pub embedding: Array2<S>,
    pub fwd: GateWeights<S>,
    pub bwd: GateWeights<S>,
    /// Output weights over the concatenated final states, `2*hidden`.
    pub out_w: Array1<S>,
    /// Output bias (kept as a length-1 array so flat traversal covers it).
    pub out_b: Array1<S>,
}

impl<S: Scalar> ModelParams<S> {
    /// Same shapes, all zeros. Used for gradients and optimizer moments.
    pub fn zeros_like(&self) -> Self {
        ModelParams {
            embedding: Array2::zeros(self.embedding.raw_dim()),
            fwd: GateWeights {
                w: Array2::zeros(self.fwd.w.raw_dim()),
                u: Array2::zeros(self.fwd.u.raw_dim()),
                b: Array1::zeros(self.fwd.b.raw_dim()),
            },
            bwd: GateWeights {
                w: Array2::zeros(self.bwd.w.raw_dim()),
                u: Array2::zeros(self.bwd.u.raw_dim()),
                b: Array1::zeros(self.bwd.b.raw_dim()),
            },
            out_w: Array1::zeros(self.out_w.raw_dim()),
            out_b: Array1::zeros(self.out_b.raw_dim()),
        }
    }

    /// Named flat views of every parameter group, in a fixed order.
    pub fn flat(&self) -> Vec<(&'static str, &[S])> {
        vec![
            ("embedding", self.embedding.as_slice().expect("standard layout")),
            ("fwd.w", self.fwd.w.as_slice().expect("standard layout")),
            ("fwd.u", self.fwd.u.as_slice().expect("standard layout")),
            ("fwd.b", self.fwd.b.as_slice().expect("standard layout")),
            ("bwd.w", self.bwd.w.as_slice().expect("standard layout")),
            ("bwd.u", self.bwd.u.as_slice().expect("standard layout")),
            ("bwd.b", self.bwd.b.as_slice().expect("standard layout")),
            ("out_w", self.out_w.as_slice().expect("standard layout")),
            ("out_b", self.out_b.as_slice().expect("standard layout")),
        ]
    }

    pub fn flat_mut(&mut self) -> Vec<(&'static str, &mut [S])> {
        vec![
            (
                "embedding",
                self.embedding.as_slice_mut().expect("standard layout"),
            ),
            ("fwd.w", self.fwd.w.as_slice_mut().expect("standard layout")),
            ("fwd.u", self.fwd.u.as_slice_mut().expect("standard layout")),
            ("fwd.b", self.fwd.b.as_slice_mut().expect("standard layout")),
            ("bwd.w", self.bwd.w.as_slice_mut().expect("standard layout")),
            ("bwd.u", self.bwd.u.as_slice_mut().expect("standard layout")),
            ("bwd.b", self.bwd.b.as_slice_mut().expect("standard layout")),
            ("out_w", self.out_w.as_slice_mut().expect("standard layout")),
            ("out_b", self.out_b.as_slice_mut().expect("standard layout")),
        ]
    }

    pub fn param_count(&self) -> usize {
        self.flat().iter().map(|(_, s)| s.len()).sum()
    }
}

/// Glorot-uniform initialization, `U(-r, r)` with `r = sqrt(6/(fan_in+fan_out))`
/// per matrix. Forget-gate biases start at one, every other bias at zero.
/// Bit-identical for a given seed.
pub fn init_params<S: Scalar>(cfg: &ModelConfig, seed: u64) -> ModelParams<S> {
    cfg.assert_valid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = cfg.embed_dim;
    let h = cfg.hidden_dim;

    let embedding = uniform_matrix(&mut rng, cfg.vocab_dim, e, cfg.vocab_dim + e);
    let fwd = direction(&mut rng, e, h);
    let bwd = direction(&mut rng, e, h);
    let out_w = uniform_matrix::<S>(&mut rng, 2 * h, 1, 2 * h + 1)
        .into_shape_with_order(2 * h)
        .expect("column reshape");
    let out_b = Array1::zeros(1);

    ModelParams {
        embedding,
        fwd,
        bwd,
        out_w,
        out_b,
    }
}

fn direction<S: Scalar>(rng: &mut ChaCha8Rng, e: usize, h: usize) -> GateWeights<S> {
    // The four e-by-h gate matrices share fan_in + fan_out = e + h, so the
    // concatenated draw uses one radius; likewise for the recurrent ones.
    let w = uniform_matrix(rng, e, 4 * h, e + h);
    let u = uniform_matrix(rng, h, 4 * h, h + h);
    let mut b = Array1::zeros(4 * h);
    for j in h..2 * h {
        b[j] = S::one();
    }
    GateWeights { w, u, b }
}

fn uniform_matrix<S: Scalar>(
    rng: &mut ChaCha8Rng,
    rows: usize,
    cols: usize,
    fan_sum: usize,
) -> Array2<S> {
    let r = (6.0 / fan_sum as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| S::real((rng.random::<f64>() * 2.0 - 1.0) * r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ModelConfig {
        ModelConfig {
            vocab_dim: 12,
            embed_dim: 5,
            hidden_dim: 4,
            seq_len: 6,
            dropout_rate: 0.2,
            threshold: 0.5,
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a: ModelParams<f64> = init_params(&cfg(), 99);
        let b: ModelParams<f64> = init_params(&cfg(), 99);
        assert_eq!(a, b);
        let c: ModelParams<f64> = init_params(&cfg(), 100);
        assert_ne!(a, c);
    }

    #[test]
    fn forget_gate_bias_is_one_others_zero() {
        let p: ModelParams<f64> = init_params(&cfg(), 1);
        let h = 4;
        for dir in [&p.fwd, &p.bwd] {
            for j in 0..4 * h {
                let want = if (h..2 * h).contains(&j) { 1.0 } else { 0.0 };
                assert_eq!(dir.b[j], want);
            }
        }
        assert_eq!(p.out_b[0], 0.0);
    }

    #[test]
    fn weights_lie_inside_their_radius() {
        let p: ModelParams<f64> = init_params(&cfg(), 5);
        let checks: [(&Array2<f64>, usize); 3] = [
            (&p.embedding, 12 + 5),
            (&p.fwd.w, 5 + 4),
            (&p.fwd.u, 4 + 4),
        ];
        for (m, fan) in checks {
            let r = (6.0 / fan as f64).sqrt();
            assert!(m.iter().all(|&x| x.abs() < r));
            // and the draw actually spreads out
            assert!(m.iter().any(|&x| x.abs() > r / 10.0));
        }
    }

    #[test]
    fn flat_covers_every_parameter() {
        let p: ModelParams<f64> = init_params(&cfg(), 1);
        let h = 4;
        let e = 5;
        let expected = 12 * e + 2 * (e * 4 * h + h * 4 * h + 4 * h) + 2 * h + 1;
        assert_eq!(p.param_count(), expected);
    }
}
