//! Skip-gram word embeddings over code tokens, and block featurization by
//! vector averaging.

mod io;
mod sgns;

use std::collections::{BTreeMap, HashMap};

use sha2::{Digest, Sha256};

pub use io::{load_model, save_model, EMBED_MAGIC, EMBED_VERSION};
pub use sgns::{pair_coefficient, sgns_gradients, sgns_loss, train_embeddings, SgnsGradients};

use rayon::prelude::*;

use crate::error::{EmbedError, LearnError};
use crate::ingest::LabeledSample;
use crate::learn::Dataset;
use crate::scalar::{dot, sigmoid, Scalar};
use crate::tokenize::TokenSequence;

/// Word2vec training settings. There is deliberately no `Default`: the seed
/// must always be chosen by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Hyperparams {
    /// window 5, 15 epochs, 5 negatives, learning rate 0.025, min count 1.
    pub fn new(dim: usize, seed: u64) -> Self {
        Hyperparams {
            dim,
            window: 5,
            epochs: 15,
            negatives: 5,
            learning_rate: 0.025,
            min_count: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |what: &str| Err(EmbedError::InvalidHyperparameter(what.to_string()));
        if self.dim == 0 {
            return bad("dim must be positive");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if self.epochs == 0 {
            return bad("epochs must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive and finite");
        }
        Ok(())
    }
}

/// Token vocabulary ordered by descending count, ties broken lexically.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn build(corpus: &[TokenSequence], min_count: usize) -> Self {
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for seq in corpus {
            for t in seq.iter() {
                *counts.entry(t).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count.max(1) as u64)
            .collect();
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        Self::from_parts(
            kept.iter().map(|(t, _)| t.to_string()).collect(),
            kept.iter().map(|&(_, c)| c).collect(),
        )
    }

    pub(crate) fn from_parts(tokens: Vec<String>, counts: Vec<u64>) -> Self {
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn count(&self, index: usize) -> u64 {
        self.counts[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// SHA-256 over the token stream, with unit and record separators between
/// tokens and sequences.
pub fn corpus_fingerprint(corpus: &[TokenSequence]) -> [u8; 32] {
    let mut h = Sha256::new();
    for seq in corpus {
        for t in seq.iter() {
            h.update(t.as_bytes());
            h.update([0x1f]);
        }
        h.update([0x1e]);
    }
    h.finalize().into()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel<T: Scalar> {
    pub hyperparams: Hyperparams,
    pub vocab: Vocabulary,
    /// Center vectors, row-major `vocab.len() x dim`.
    pub vectors: Vec<T>,
    /// Context vectors, only used by training and pair scores.
    pub context_vectors: Vec<T>,
    pub corpus_fingerprint: [u8; 32],
}

impl<T: Scalar> EmbeddingModel<T> {
    pub fn dim(&self) -> usize {
        self.hyperparams.dim
    }

    pub fn vector(&self, index: usize) -> &[T] {
        let d = self.dim();
        &self.vectors[index * d..(index + 1) * d]
    }

    pub fn context_vector(&self, index: usize) -> &[T] {
        let d = self.dim();
        &self.context_vectors[index * d..(index + 1) * d]
    }

    pub fn token_vector(&self, token: &str) -> Option<&[T]> {
        self.vocab.get(token).map(|i| self.vector(i))
    }

    /// σ(center(a) · context(b)): the model's belief that `b` appears near `a`.
    pub fn pair_score(&self, a: &str, b: &str) -> Option<T> {
        let (a, b) = (self.vocab.get(a)?, self.vocab.get(b)?);
        Some(sigmoid(dot(self.vector(a), self.context_vector(b))))
    }

    pub fn is_finite(&self) -> bool {
        self.vectors
            .iter()
            .chain(&self.context_vectors)
            .all(|v| v.is_finite())
    }
}

/// Averaged embedding of a code block.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T: Scalar> {
    pub values: Vec<T>,
    /// In-vocabulary tokens that went into the mean, with multiplicity.
    pub n_known_tokens: usize,
}

/// Mean of the center vectors of the known tokens; all-zero when none are
/// known. The sum runs in vocabulary order, so the result does not depend on
/// token order.
pub fn embed_average<T: Scalar>(
    model: &EmbeddingModel<T>,
    tokens: &TokenSequence,
) -> FeatureVector<T> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for t in tokens.iter() {
        if let Some(i) = model.vocab.get(t) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let n: usize = counts.values().sum();
    let mut values = vec![T::zero(); model.dim()];
    if n == 0 {
        return FeatureVector {
            values,
            n_known_tokens: 0,
        };
    }
    for (&i, &c) in &counts {
        let c = T::from_usize_lossy(c);
        for (acc, &v) in values.iter_mut().zip(model.vector(i)) {
            *acc += c * v;
        }
    }
    let n_t = T::from_usize_lossy(n);
    for v in &mut values {
        *v /= n_t;
    }
    FeatureVector {
        values,
        n_known_tokens: n,
    }
}

/// Featurizes labeled samples into a training matrix; row ids are sample
/// positions.
pub fn embed_samples<T: Scalar>(
    model: &EmbeddingModel<T>,
    samples: &[LabeledSample],
) -> Result<Dataset<T>, LearnError> {
    let rows: Vec<Vec<T>> = samples
        .par_iter()
        .map(|s| embed_average(model, &s.tokens()).values)
        .collect();
    Dataset::new(rows, samples.iter().map(|s| s.label).collect())
}
