//! Token-sequence bug classifiers trained from static-analyzer warnings.
//!
//! The pipeline, end to end: lex source files into tokens, extract
//! method-level token windows, label them per warning kind from analyzer
//! warnings, build a frequency-ranked vocabulary, compose training and
//! validation sets (balanced, ANN-sampled, or stratified), train one
//! bi-directional LSTM classifier per warning kind, and report
//! precision/recall/F1 over repeated splits.
//!
//! The numeric kernels ([`nn`], [`sampler::tfidf`], [`sampler::lsh`]) are
//! generic over [`Scalar`]; the shipped pipeline runs everything at [`Real`]
//! (64-bit) precision.

pub mod error;
pub mod eval;
pub mod hash;
pub mod ingest;
pub mod io;
pub mod nn;
pub mod sampler;
pub mod scalar;
pub mod synth;
pub mod vocab;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Scalar type used by the shipped pipeline.
pub type Real = f64;

/// Trained classifier parameters at pipeline precision.
pub type Model = nn::ModelParams<Real>;

/// TF-IDF vector at pipeline precision.
pub type TfIdf = sampler::tfidf::TfIdfVector<Real>;
