//! Bias-corrected Adam.

use crate::scalar::Scalar;

use super::params::ModelParams;

/// Optimizer state: first and second moments shaped like the parameters, the
/// step counter, and the standard hyperparameters.
#[derive(Debug, Clone)]
pub struct AdamState<S: Scalar> {
    pub m: ModelParams<S>,
    pub v: ModelParams<S>,
    pub step: u64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(like: &ModelParams<S>) -> Self {
        AdamState {
            m: like.zeros_like(),
            v: like.zeros_like(),
            step: 0,
            alpha: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// One bias-corrected Adam update over every parameter group.
pub fn adam_step<S: Scalar>(
    params: &mut ModelParams<S>,
    grads: &ModelParams<S>,
    state: &mut AdamState<S>,
) {
    state.step += 1;
    let b1 = S::real(state.beta1);
    let b2 = S::real(state.beta2);
    let one = S::one();
    let corr1 = S::real(1.0 - state.beta1.powi(state.step as i32));
    let corr2 = S::real(1.0 - state.beta2.powi(state.step as i32));
    let alpha = S::real(state.alpha);
    let eps = S::real(state.epsilon);

    let mut p = params.flat_mut();
    let g = grads.flat();
    let mut m = state.m.flat_mut();
    let mut v = state.v.flat_mut();
    for k in 0..p.len() {
        debug_assert_eq!(p[k].1.len(), g[k].1.len(), "group {}", p[k].0);
        let (ps, gs, ms, vs) = (&mut *p[k].1, g[k].1, &mut *m[k].1, &mut *v[k].1);
        for j in 0..ps.len() {
            let grad = gs[j];
            ms[j] = b1 * ms[j] + (one - b1) * grad;
            vs[j] = b2 * vs[j] + (one - b2) * grad * grad;
            let m_hat = ms[j] / corr1;
            let v_hat = vs[j] / corr2;
            ps[j] = ps[j] - alpha * m_hat / (v_hat.sqrt() + eps);
        }
    }
}
