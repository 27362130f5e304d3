//! Forward inference and full backpropagation through time.

use ndarray::{concatenate, s, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;
use crate::vocab::EncodedSequence;

use super::params::{GateWeights, ModelParams};
use super::ModelConfig;

/// Train mode applies inverted dropout to the concatenated final states;
/// inference is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

struct StepCache<S: Scalar> {
    i: Array2<S>,
    f: Array2<S>,
    g: Array2<S>,
    o: Array2<S>,
    c_prev: Array2<S>,
    tanh_c: Array2<S>,
    h_prev: Array2<S>,
}

struct DirectionCache<S: Scalar> {
    /// Step caches in processing order (the backward direction processes the
    /// sequence back to front).
    steps: Vec<StepCache<S>>,
    h_final: Array2<S>,
}

struct ForwardCache<S: Scalar> {
    x: Vec<Array2<S>>,
    fwd: DirectionCache<S>,
    bwd: DirectionCache<S>,
    /// Concatenated final states after dropout (equal to the pre-dropout
    /// states in inference mode).
    v: Array2<S>,
    mask: Option<Array2<S>>,
    probs: Array1<S>,
}

/// Embeds every position (padding included — no masking), runs both LSTM
/// directions over the whole window, and applies the sigmoid head to the
/// concatenated final states.
fn forward_cached<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    batch: &[&EncodedSequence],
    mode: Mode,
    rng: &mut ChaCha8Rng,
    keep_steps: bool,
) -> ForwardCache<S> {
    let bsz = batch.len();
    assert!(bsz > 0, "batch must be non-empty");
    let n = cfg.seq_len;

    let mut x = Vec::with_capacity(n);
    for t in 0..n {
        let mut xt = Array2::zeros((bsz, cfg.embed_dim));
        for (b, seq) in batch.iter().enumerate() {
            assert_eq!(seq.indices.len(), n, "sequence {} window length", seq.method_id);
            let idx = seq.indices[t] as usize;
            assert!(idx < cfg.vocab_dim, "token index {idx} outside vocabulary");
            xt.row_mut(b).assign(&params.embedding.row(idx));
        }
        x.push(xt);
    }

    let fwd = run_direction(&params.fwd, &x, false, cfg.hidden_dim, keep_steps);
    let bwd = run_direction(&params.bwd, &x, true, cfg.hidden_dim, keep_steps);

    let v_pre = concatenate![Axis(1), fwd.h_final.view(), bwd.h_final.view()];
    let (v, mask) = match mode {
        Mode::Train if cfg.dropout_rate > 0.0 => {
            let keep = 1.0 - cfg.dropout_rate;
            let mask = Array2::from_shape_fn(v_pre.raw_dim(), |_| {
                if rng.random::<f64>() < keep {
                    S::real(1.0 / keep)
                } else {
                    S::zero()
                }
            });
            (&v_pre * &mask, Some(mask))
        }
        _ => (v_pre, None),
    };

    let logits = v.dot(&params.out_w) + params.out_b[0];
    let probs = logits.mapv(sigmoid);
    ForwardCache {
        x,
        fwd,
        bwd,
        v,
        mask,
        probs,
    }
}

fn run_direction<S: Scalar>(
    gw: &GateWeights<S>,
    x: &[Array2<S>],
    reverse: bool,
    h: usize,
    keep_steps: bool,
) -> DirectionCache<S> {
    let n = x.len();
    let bsz = x[0].nrows();
    let mut h_state: Array2<S> = Array2::zeros((bsz, h));
    let mut c_state: Array2<S> = Array2::zeros((bsz, h));
    let mut steps = Vec::with_capacity(if keep_steps { n } else { 0 });
    for s in 0..n {
        let t = if reverse { n - 1 - s } else { s };
        let mut pre = x[t].dot(&gw.w) + h_state.dot(&gw.u);
        pre += &gw.b;
        let i = pre.slice(s![.., 0..h]).mapv(sigmoid);
        let f = pre.slice(s![.., h..2 * h]).mapv(sigmoid);
        let g = pre.slice(s![.., 2 * h..3 * h]).mapv(|z| z.tanh());
        let o = pre.slice(s![.., 3 * h..4 * h]).mapv(sigmoid);
        let c_new = &f * &c_state + &i * &g;
        let tanh_c = c_new.mapv(|z| z.tanh());
        let h_new = &o * &tanh_c;
        if keep_steps {
            steps.push(StepCache {
                i,
                f,
                g,
                o,
                c_prev: c_state,
                tanh_c,
                h_prev: h_state,
            });
        }
        h_state = h_new;
        c_state = c_new;
    }
    DirectionCache {
        steps,
        h_final: h_state,
    }
}

/// Reverse pass through one direction. Only the final hidden state receives
/// an external gradient; earlier steps see it through the recurrence.
fn backprop_direction<S: Scalar>(
    gw: &GateWeights<S>,
    cache: &DirectionCache<S>,
    x: &[Array2<S>],
    dh_final: Array2<S>,
    reverse: bool,
    gout: &mut GateWeights<S>,
    dx: &mut [Array2<S>],
) {
    let n = x.len();
    let one = S::one();
    let mut d_h = dh_final;
    let mut d_c: Array2<S> = Array2::zeros(d_h.raw_dim());
    for step in (0..n).rev() {
        let t = if reverse { n - 1 - step } else { step };
        let st = &cache.steps[step];

        let d_c_total = &d_h * &st.o * &st.tanh_c.mapv(|z| one - z * z) + &d_c;
        let d_gi = &d_c_total * &st.g * &st.i.mapv(|z| z * (one - z));
        let d_gf = &d_c_total * &st.c_prev * &st.f.mapv(|z| z * (one - z));
        let d_gg = &d_c_total * &st.i * &st.g.mapv(|z| one - z * z);
        let d_go = &d_h * &st.tanh_c * &st.o.mapv(|z| z * (one - z));
        let d_gates = concatenate![Axis(1), d_gi, d_gf, d_gg, d_go];

        gout.b += &d_gates.sum_axis(Axis(0));
        gout.w += &x[t].t().dot(&d_gates);
        gout.u += &st.h_prev.t().dot(&d_gates);
        dx[t] += &d_gates.dot(&gw.w.t());

        d_h = d_gates.dot(&gw.u.t());
        d_c = &d_c_total * &st.f;
    }
}

fn loss_and_grads_cached<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    batch: &[&EncodedSequence],
    labels: &[u8],
    cache: &ForwardCache<S>,
) -> (S, ModelParams<S>) {
    let bsz = batch.len();
    assert_eq!(labels.len(), bsz, "one label per sequence");
    let lo = S::real(1e-7);
    let hi = S::one() - lo;
    let scale = S::real(1.0 / bsz as f64);

    // Binary cross-entropy with clamped probabilities. Where the clamp is
    // active the probability gradient is zero.
    let mut loss = S::zero();
    let mut d_logit: Array1<S> = Array1::zeros(bsz);
    for b in 0..bsz {
        let p = cache.probs[b];
        let y = S::real(f64::from(labels[b]));
        let clamped = p.max(lo).min(hi);
        loss = loss - (y * clamped.ln() + (S::one() - y) * (S::one() - clamped).ln());
        if p >= lo && p <= hi {
            d_logit[b] = (p - y) * scale;
        }
    }
    loss = loss * scale;

    let mut grads = params.zeros_like();
    grads.out_w = cache.v.t().dot(&d_logit);
    grads.out_b[0] = d_logit.sum();

    let two_h = params.out_w.len();
    let mut d_v =
        Array2::from_shape_fn((bsz, two_h), |(b, j)| d_logit[b] * params.out_w[j]);
    if let Some(mask) = &cache.mask {
        d_v = &d_v * mask;
    }

    let h = cfg.hidden_dim;
    let dh_fwd = d_v.slice(s![.., 0..h]).to_owned();
    let dh_bwd = d_v.slice(s![.., h..2 * h]).to_owned();

    let mut dx: Vec<Array2<S>> = cache
        .x
        .iter()
        .map(|xt| Array2::zeros(xt.raw_dim()))
        .collect();
    backprop_direction(
        &params.fwd,
        &cache.fwd,
        &cache.x,
        dh_fwd,
        false,
        &mut grads.fwd,
        &mut dx,
    );
    backprop_direction(
        &params.bwd,
        &cache.bwd,
        &cache.x,
        dh_bwd,
        true,
        &mut grads.bwd,
        &mut dx,
    );

    for (t, dxt) in dx.iter().enumerate() {
        for (b, seq) in batch.iter().enumerate() {
            let idx = seq.indices[t] as usize;
            let mut row = grads.embedding.row_mut(idx);
            row += &dxt.row(b);
        }
    }

    (loss, grads)
}

pub(crate) fn loss_and_grads_with_rng<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    batch: &[&EncodedSequence],
    labels: &[u8],
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> (S, ModelParams<S>) {
    let cache = forward_cached(cfg, params, batch, mode, rng, true);
    loss_and_grads_cached(cfg, params, batch, labels, &cache)
}

/// Batch probabilities. In train mode the dropout mask is drawn from `seed`,
/// so equal seeds give equal outputs.
pub fn forward<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    batch: &[EncodedSequence],
    mode: Mode,
    seed: u64,
) -> Array1<S> {
    let refs: Vec<&EncodedSequence> = batch.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    forward_cached(cfg, params, &refs, mode, &mut rng, false).probs
}

/// Mean binary cross-entropy over the batch and gradients for every
/// parameter, computed by backpropagation through time over all steps, both
/// directions, the dropout mask, and the embedding rows.
pub fn loss_and_grads<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    batch: &[EncodedSequence],
    labels: &[u8],
    mode: Mode,
    seed: u64,
) -> (S, ModelParams<S>) {
    let refs: Vec<&EncodedSequence> = batch.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loss_and_grads_with_rng(cfg, params, &refs, labels, mode, &mut rng)
}

/// Classifies one sequence: buggy (1) iff the probability reaches the
/// configured threshold.
pub fn classify<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    seq: &EncodedSequence,
) -> (u8, S) {
    let probs = forward(cfg, params, std::slice::from_ref(seq), Mode::Infer, 0);
    let p = probs[0];
    (u8::from(p >= S::real(cfg.threshold)), p)
}

/// Pre-dropout concatenated final states (forward half, then backward half)
/// for one sequence.
pub fn hidden_concat<S: Scalar>(
    cfg: &ModelConfig,
    params: &ModelParams<S>,
    seq: &EncodedSequence,
) -> Array1<S> {
    let refs = [seq];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let cache = forward_cached(cfg, params, &refs, Mode::Infer, &mut rng, false);
    cache.v.row(0).to_owned()
}
