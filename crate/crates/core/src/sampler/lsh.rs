//! Random-hyperplane locality-sensitive hashing over TF-IDF vectors, plus
//! greedy nearest-neighbor selection of non-buggy training examples.

use std::collections::{HashMap, HashSet};

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::tfidf::TfIdfVector;

/// Cosine distance `1 - cos(a, b)`; vectors with zero norm are at distance 1
/// from everything.
pub fn cosine_distance<S: Scalar>(a: ArrayView1<S>, b: ArrayView1<S>) -> S {
    let dot = a.dot(&b);
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == S::zero() || nb == S::zero() {
        return S::one();
    }
    S::one() - dot / (na * nb)
}

/// Sign-signature LSH index: `tables` independent tables of `bits` random
/// unit hyperplanes each. Every indexed vector is stored in all tables under
/// its per-table signature.
pub struct LshIndex<S: Scalar> {
    hyperplanes: Vec<Vec<Array1<S>>>,
    buckets: Vec<HashMap<u64, Vec<usize>>>,
    vectors: Vec<Array1<S>>,
    ids: Vec<String>,
    dim: usize,
    bits: usize,
}

impl<S: Scalar> LshIndex<S> {
    pub fn build(
        vectors: &[TfIdfVector<S>],
        tables: usize,
        bits: usize,
        seed: u64,
    ) -> Result<Self> {
        assert!(tables >= 1, "need at least one table");
        assert!((1..=64).contains(&bits), "signature bits must be 1..=64");
        let dim = vectors.first().map(|v| v.weights.len()).unwrap_or(0);
        for v in vectors {
            if v.weights.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.weights.len(),
                });
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hyperplanes: Vec<Vec<Array1<S>>> = (0..tables)
            .map(|_| {
                (0..bits)
                    .map(|_| {
                        let mut h: Array1<S> = Array1::from_iter(
                            (0..dim).map(|_| S::real(rng.sample::<f64, _>(StandardNormal))),
                        );
                        let norm = h.dot(&h).sqrt();
                        if norm > S::zero() {
                            h.mapv_inplace(|x| x / norm);
                        }
                        h
                    })
                    .collect()
            })
            .collect();

        let mut index = LshIndex {
            hyperplanes,
            buckets: vec![HashMap::new(); tables],
            vectors: Vec::with_capacity(vectors.len()),
            ids: Vec::with_capacity(vectors.len()),
            dim,
            bits,
        };
        for v in vectors {
            let slot = index.vectors.len();
            for t in 0..tables {
                let sig = index.signature(v.weights.view(), t);
                index.buckets[t].entry(sig).or_default().push(slot);
            }
            index.vectors.push(v.weights.clone());
            index.ids.push(v.method_id.clone());
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn tables(&self) -> usize {
        self.buckets.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    /// Per-table signature: bit `i` is the sign of the dot product with the
    /// table's `i`-th hyperplane.
    pub fn signature(&self, v: ArrayView1<S>, table: usize) -> u64 {
        let mut sig = 0u64;
        for (i, h) in self.hyperplanes[table].iter().enumerate() {
            if v.dot(h) >= S::zero() {
                sig |= 1 << i;
            }
        }
        sig
    }

    /// Union of bucket members across all tables for the query's signatures,
    /// sorted and deduplicated.
    pub fn candidates(&self, v: ArrayView1<S>) -> Vec<usize> {
        let mut found: Vec<usize> = Vec::new();
        for t in 0..self.buckets.len() {
            let sig = self.signature(v, t);
            if let Some(members) = self.buckets[t].get(&sig) {
                found.extend_from_slice(members);
            }
        }
        found.sort_unstable();
        found.dedup();
        found
    }

    /// Nearest stored vector by exact cosine distance over the candidate
    /// union, excluding `excluded` slots. Falls back to exhaustive search when
    /// the candidates are exhausted. Distance ties break by ascending id.
    pub fn nearest(&self, v: ArrayView1<S>, excluded: &HashSet<usize>) -> Option<usize> {
        let candidates = self.candidates(v);
        let pick = self.best_of(v, candidates.iter().copied().filter(|c| !excluded.contains(c)));
        pick.or_else(|| {
            self.best_of(
                v,
                (0..self.vectors.len()).filter(|c| !excluded.contains(c)),
            )
        })
    }

    fn best_of(&self, v: ArrayView1<S>, slots: impl Iterator<Item = usize>) -> Option<usize> {
        let mut best: Option<(S, usize)> = None;
        for slot in slots {
            let d = cosine_distance(v, self.vectors[slot].view());
            let better = match &best {
                None => true,
                Some((bd, bslot)) => {
                    d < *bd || (d == *bd && self.ids[slot] < self.ids[*bslot])
                }
            };
            if better {
                best = Some((d, slot));
            }
        }
        best.map(|(_, slot)| slot)
    }
}

/// Knobs for approximate nearest-neighbor selection.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnConfig {
    pub tables: usize,
    pub bits: usize,
    /// Pools at or below this size skip hashing and search exhaustively.
    pub exhaustive_threshold: usize,
}

impl Default for AnnConfig {
    fn default() -> Self {
        AnnConfig {
            tables: 8,
            bits: 16,
            exhaustive_threshold: 10_000,
        }
    }
}

/// For every buggy vector, selects the nearest not-yet-selected non-buggy
/// vector by cosine distance, producing exactly one distinct non-buggy id per
/// buggy example.
pub fn ann_select<S: Scalar>(
    buggy: &[TfIdfVector<S>],
    non_buggy: &[TfIdfVector<S>],
    cfg: &AnnConfig,
    seed: u64,
) -> Result<Vec<String>> {
    if buggy.is_empty() {
        return Ok(Vec::new());
    }
    if non_buggy.len() < buggy.len() {
        return Err(Error::CannotBalance {
            buggy: buggy.len(),
            non_buggy: non_buggy.len(),
        });
    }
    if non_buggy.len() <= cfg.exhaustive_threshold {
        return Ok(exhaustive_select(buggy, non_buggy));
    }

    let index = LshIndex::build(non_buggy, cfg.tables, cfg.bits, seed)?;
    let mut taken: HashSet<usize> = HashSet::new();
    let mut out = Vec::with_capacity(buggy.len());
    for b in buggy {
        let slot = index
            .nearest(b.weights.view(), &taken)
            .expect("pool larger than selection");
        taken.insert(slot);
        out.push(index.ids()[slot].clone());
    }
    Ok(out)
}

/// Exhaustive greedy selection: per buggy vector, scan the whole pool for the
/// nearest unselected candidate (ties by ascending id).
fn exhaustive_select<S: Scalar>(
    buggy: &[TfIdfVector<S>],
    non_buggy: &[TfIdfVector<S>],
) -> Vec<String> {
    let mut taken = vec![false; non_buggy.len()];
    let mut out = Vec::with_capacity(buggy.len());
    for b in buggy {
        let mut best: Option<(S, usize)> = None;
        for (slot, cand) in non_buggy.iter().enumerate() {
            if taken[slot] {
                continue;
            }
            let d = cosine_distance(b.weights.view(), cand.weights.view());
            let better = match &best {
                None => true,
                Some((bd, bslot)) => {
                    d < *bd || (d == *bd && cand.method_id < non_buggy[*bslot].method_id)
                }
            };
            if better {
                best = Some((d, slot));
            }
        }
        let (_, slot) = best.expect("pool larger than selection");
        taken[slot] = true;
        out.push(non_buggy[slot].method_id.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vector(id: &str, w: &[f64]) -> TfIdfVector<f64> {
        TfIdfVector {
            method_id: id.into(),
            weights: Array1::from_vec(w.to_vec()),
        }
    }

    #[test]
    fn positive_scaling_keeps_signatures() {
        let vs = vec![vector("a", &[0.2, -0.7, 0.1, 0.4])];
        let index = LshIndex::build(&vs, 4, 12, 7).unwrap();
        let scaled = &vs[0].weights * 3.5;
        for t in 0..4 {
            assert_eq!(
                index.signature(vs[0].weights.view(), t),
                index.signature(scaled.view(), t)
            );
        }
    }

    #[test]
    fn antipodal_vectors_have_complementary_signatures() {
        let vs = vec![vector("a", &[0.3, -0.9, 0.5])];
        let index = LshIndex::build(&vs, 2, 16, 11).unwrap();
        let neg = vs[0].weights.mapv(|x| -x);
        let mask = (1u64 << 16) - 1;
        for t in 0..2 {
            let s = index.signature(vs[0].weights.view(), t);
            let sn = index.signature(neg.view(), t);
            // Sign boundaries (dot exactly zero) would break complementarity;
            // these dense vectors stay clear of them.
            assert_eq!(s ^ sn, mask);
        }
    }

    #[test]
    fn every_indexed_vector_is_retrievable_from_its_buckets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vs: Vec<TfIdfVector<f64>> = (0..40)
            .map(|i| {
                let w: Vec<f64> = (0..16).map(|_| rng.random::<f64>() - 0.5).collect();
                vector(&format!("v{i:02}"), &w)
            })
            .collect();
        let index = LshIndex::build(&vs, 6, 10, 5).unwrap();
        for (slot, v) in vs.iter().enumerate() {
            let cands = index.candidates(v.weights.view());
            assert!(cands.contains(&slot));
        }
    }

    #[test]
    fn identical_vector_found_at_distance_zero() {
        let pool = vec![
            vector("n0", &[1.0, 0.0, 0.0]),
            vector("n1", &[0.0, 1.0, 0.0]),
            vector("n2", &[0.0, 0.0, 1.0]),
        ];
        let buggy = vec![vector("b0", &[0.0, 1.0, 0.0])];
        let picked = ann_select(&buggy, &pool, &AnnConfig::default(), 1).unwrap();
        assert_eq!(picked, vec!["n1".to_string()]);
    }

    #[test]
    fn duplicate_buggy_vectors_get_distinct_neighbors() {
        let pool = vec![
            vector("n0", &[1.0, 0.0]),
            vector("n1", &[0.9, 0.1]),
            vector("n2", &[0.0, 1.0]),
        ];
        let buggy = vec![vector("b0", &[1.0, 0.0]), vector("b1", &[1.0, 0.0])];
        let picked = ann_select(&buggy, &pool, &AnnConfig::default(), 1).unwrap();
        assert_eq!(picked.len(), 2);
        assert_ne!(picked[0], picked[1]);
        assert_eq!(picked[0], "n0");
        assert_eq!(picked[1], "n1");
    }

    #[test]
    fn empty_buggy_set_selects_nothing() {
        let pool = vec![vector("n0", &[1.0])];
        let picked = ann_select::<f64>(&[], &pool, &AnnConfig::default(), 1).unwrap();
        assert!(picked.is_empty());
    }

    #[test]
    fn too_small_pool_cannot_balance() {
        let pool = vec![vector("n0", &[1.0, 0.0])];
        let buggy = vec![vector("b0", &[1.0, 0.0]), vector("b1", &[0.0, 1.0])];
        let err = ann_select(&buggy, &pool, &AnnConfig::default(), 1).unwrap_err();
        assert!(matches!(err, Error::CannotBalance { buggy: 2, non_buggy: 1 }));
    }

    #[test]
    fn distance_ties_break_by_ascending_id() {
        let pool = vec![
            vector("z", &[1.0, 0.0]),
            vector("a", &[2.0, 0.0]), // same direction, same cosine distance
        ];
        let buggy = vec![vector("b", &[3.0, 0.0])];
        let picked = ann_select(&buggy, &pool, &AnnConfig::default(), 1).unwrap();
        assert_eq!(picked, vec!["a".to_string()]);
    }

    #[test]
    fn lsh_path_matches_exhaustive_on_separated_clusters() {
        // Well-separated one-hot directions make LSH recall 1, so the hashed
        // path must agree with the exhaustive one exactly.
        let mut pool = Vec::new();
        for i in 0..24 {
            let mut w = vec![0.0; 24];
            w[i] = 1.0;
            w[(i + 1) % 24] = 0.05;
            pool.push(vector(&format!("n{i:02}"), &w));
        }
        let buggy: Vec<TfIdfVector<f64>> = (0..8)
            .map(|i| {
                let mut w = vec![0.0; 24];
                w[i * 3] = 1.0;
                vector(&format!("b{i}"), &w)
            })
            .collect();
        let exhaustive = ann_select(
            &buggy,
            &pool,
            &AnnConfig {
                exhaustive_threshold: 10_000,
                ..AnnConfig::default()
            },
            9,
        )
        .unwrap();
        let hashed = ann_select(
            &buggy,
            &pool,
            &AnnConfig {
                exhaustive_threshold: 0,
                tables: 12,
                bits: 8,
            },
            9,
        )
        .unwrap();
        assert_eq!(exhaustive, hashed);
    }

    #[test]
    fn zero_vector_is_far_from_everything() {
        let z = Array1::from_vec(vec![0.0, 0.0]);
        let v = Array1::from_vec(vec![1.0, 0.0]);
        assert_eq!(cosine_distance(z.view(), v.view()), 1.0);
    }
}
