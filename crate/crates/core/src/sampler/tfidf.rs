//! Token-frequency vectors and TF-IDF re-weighting for similarity search.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::ingest::MethodSequence;
use crate::scalar::Scalar;
use crate::vocab::Vocabulary;

/// TF-IDF weighted, L2-normalized token-frequency vector of one sequence.
/// Dimension is the vocabulary's base size; UNK and PAD contribute nothing.
#[derive(Debug, Clone)]
pub struct TfIdfVector<S: Scalar> {
    pub method_id: String,
    pub weights: Array1<S>,
}

/// Raw per-rank occurrence counts of a window. Component `j` counts the
/// rank-`j` lexeme; UNK and PAD occurrences are excluded.
pub fn freq_vector<S: Scalar>(seq: &MethodSequence, vocab: &Vocabulary) -> Array1<S> {
    let mut counts = Array1::zeros(vocab.size_base());
    for token in seq.real_tokens() {
        let idx = vocab.index_of(&token.lexeme);
        if idx < vocab.size_base() {
            counts[idx] = counts[idx] + S::one();
        }
    }
    counts
}

/// Applies smooth inverse-document-frequency weighting,
/// `count * (ln((1+N)/(1+df)) + 1)`, then L2-normalizes each vector.
/// Zero vectors stay zero.
pub fn tfidf_weights<S: Scalar>(counts: &[Array1<S>]) -> Result<Vec<Array1<S>>> {
    if counts.is_empty() {
        return Err(Error::EmptyVectorList);
    }
    let dim = counts[0].len();
    for c in counts {
        if c.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.len(),
            });
        }
    }
    let n = counts.len();
    let mut df = vec![0usize; dim];
    for c in counts {
        for (j, v) in c.iter().enumerate() {
            if *v > S::zero() {
                df[j] += 1;
            }
        }
    }
    let idf: Vec<S> = df
        .iter()
        .map(|&d| S::real(((1.0 + n as f64) / (1.0 + d as f64)).ln() + 1.0))
        .collect();

    Ok(counts
        .iter()
        .map(|c| {
            let mut w: Array1<S> = Array1::from_iter(
                c.iter().zip(idf.iter()).map(|(count, idf)| *count * *idf),
            );
            let norm = w.iter().fold(S::zero(), |acc, x| acc + *x * *x).sqrt();
            if norm > S::zero() {
                w.mapv_inplace(|x| x / norm);
            }
            w
        })
        .collect())
}

/// Convenience: frequency vectors plus TF-IDF weighting for a set of windows,
/// with statistics fit over exactly these windows.
pub fn tfidf_vectors<S: Scalar>(
    seqs: &[MethodSequence],
    vocab: &Vocabulary,
) -> Result<Vec<TfIdfVector<S>>> {
    let counts: Vec<Array1<S>> = seqs.iter().map(|s| freq_vector(s, vocab)).collect();
    let weights = tfidf_weights(&counts)?;
    Ok(seqs
        .iter()
        .zip(weights)
        .map(|(s, w)| TfIdfVector {
            method_id: s.method_id.clone(),
            weights: w,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{truncate, RawMethod, Token, TokenClass};
    use crate::vocab::build_vocabulary;
    use approx::assert_abs_diff_eq;

    fn method_of(id: &str, lexemes: &[&str]) -> RawMethod {
        RawMethod {
            method_id: id.into(),
            file: "F.java".into(),
            tokens: lexemes
                .iter()
                .map(|l| Token::new(*l, TokenClass::Identifier, 1))
                .collect(),
        }
    }

    fn arr(values: &[f64]) -> Array1<f64> {
        Array1::from_vec(values.to_vec())
    }

    #[test]
    fn freq_vector_counts_by_rank_and_ignores_unk_pad() {
        let corpus = vec![method_of("c", &["a", "a", "a", "b", "b"])];
        let vocab = build_vocabulary(&corpus, 2).unwrap();
        let m = method_of("m", &["b", "a", "zzz", "b", "b"]);
        let seq = truncate(&m, 10); // 5 real + 5 PAD
        let v: Array1<f64> = freq_vector(&seq, &vocab);
        assert_eq!(v, arr(&[1.0, 3.0]));
        // Tokenwise counting oracle: component sum equals retained-token count.
        let retained = seq
            .real_tokens()
            .filter(|t| vocab.index_of(&t.lexeme) < vocab.size_base())
            .count();
        assert_eq!(v.sum() as usize, retained);
    }

    #[test]
    fn all_pad_window_is_zero_vector() {
        let corpus = vec![method_of("c", &["a"])];
        let vocab = build_vocabulary(&corpus, 1).unwrap();
        let m = method_of("m", &["q"]); // lexes to UNK
        let seq = truncate(&m, 4);
        let v: Array1<f64> = freq_vector(&seq, &vocab);
        assert_eq!(v.sum(), 0.0);
    }

    #[test]
    fn single_vector_normalizes_to_unit_direction() {
        let out = tfidf_weights(&[arr(&[2.0, 0.0])]).unwrap();
        assert_abs_diff_eq!(out[0][0], 1.0, epsilon = 1e-12);
        assert_eq!(out[0][1], 0.0);
    }

    #[test]
    fn rarer_token_gets_strictly_larger_idf() {
        // Token 0 in every document, token 1 in one document.
        let counts = vec![arr(&[1.0, 1.0]), arr(&[1.0, 0.0]), arr(&[1.0, 0.0])];
        let out = tfidf_weights(&counts).unwrap();
        // In the mixed vector both raw counts are 1, so the weight ordering
        // is the idf ordering.
        assert!(out[0][1] > out[0][0]);
    }

    #[test]
    fn hand_computed_three_document_corpus() {
        let counts = vec![arr(&[1.0, 0.0]), arr(&[1.0, 0.0]), arr(&[0.0, 1.0])];
        let out = tfidf_weights(&counts).unwrap();
        // df = [2, 1]; idf = [ln(4/3)+1, ln(2)+1]; then L2 normalization.
        assert_abs_diff_eq!(out[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out[2][1], 1.0, epsilon = 1e-12);

        // A mixed vector keeps the idf ratio between components.
        let counts = vec![arr(&[1.0, 0.0]), arr(&[1.0, 0.0]), arr(&[1.0, 1.0])];
        let out = tfidf_weights(&counts).unwrap();
        let idf0 = (4.0f64 / 4.0).ln() + 1.0;
        let idf1 = (4.0f64 / 2.0).ln() + 1.0;
        let norm = (idf0 * idf0 + idf1 * idf1).sqrt();
        assert_abs_diff_eq!(out[2][0], idf0 / norm, epsilon = 1e-12);
        assert_abs_diff_eq!(out[2][1], idf1 / norm, epsilon = 1e-12);
    }

    #[test]
    fn zero_vector_stays_zero() {
        let out = tfidf_weights(&[arr(&[0.0, 0.0]), arr(&[1.0, 0.0])]).unwrap();
        assert_eq!(out[0].sum(), 0.0);
    }

    #[test]
    fn empty_list_is_an_error() {
        assert!(matches!(
            tfidf_weights::<f64>(&[]),
            Err(Error::EmptyVectorList)
        ));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let r = tfidf_weights(&[arr(&[1.0]), arr(&[1.0, 2.0])]);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn uniform_scaling_leaves_output_unchanged() {
        let base = vec![arr(&[3.0, 1.0, 0.0]), arr(&[0.0, 2.0, 2.0]), arr(&[1.0, 0.0, 5.0])];
        let scaled: Vec<Array1<f64>> = base.iter().map(|v| v * 7.0).collect();
        let a = tfidf_weights(&base).unwrap();
        let b = tfidf_weights(&scaled).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            for (u, v) in x.iter().zip(y.iter()) {
                assert_abs_diff_eq!(u, v, epsilon = 1e-12);
            }
        }
    }
}
