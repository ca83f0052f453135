//! Skip-gram training with negative sampling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{corpus_fingerprint, EmbeddingModel, Hyperparams, Vocabulary};
use crate::error::EmbedError;
use crate::scalar::{dot, sigmoid, Scalar};
use crate::tokenize::TokenSequence;

/// The final learning rate as a fraction of the initial one.
const MIN_LR_FRACTION: f64 = 1e-4;

/// dL/df for one scored pair with score `f = center · context`, where
/// `label` is 1 for the observed context and 0 for a negative sample.
pub fn pair_coefficient<T: Scalar>(f: T, label: T) -> T {
    sigmoid(f) - label
}

/// Negative-sampling loss of one (center, positive, negatives) step:
/// `-ln σ(v·u⁺) - Σ ln σ(-v·u⁻)`.
pub fn sgns_loss<T: Scalar>(center: &[T], positive: &[T], negatives: &[&[T]]) -> T {
    let pos = -sigmoid(dot(center, positive)).ln();
    negatives
        .iter()
        .fold(pos, |acc, n| acc - sigmoid(-dot(center, n)).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradients<T> {
    pub center: Vec<T>,
    pub positive: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

/// Analytic gradient of [`sgns_loss`] with respect to every vector involved.
pub fn sgns_gradients<T: Scalar>(
    center: &[T],
    positive: &[T],
    negatives: &[&[T]],
) -> SgnsGradients<T> {
    let d = center.len();
    let mut g_center = vec![T::zero(); d];
    let mut term = |target: &[T], label: T| -> Vec<T> {
        let coef = pair_coefficient(dot(center, target), label);
        for (g, &u) in g_center.iter_mut().zip(target) {
            *g += coef * u;
        }
        center.iter().map(|&v| coef * v).collect()
    };
    let g_pos = term(positive, T::one());
    let g_negs = negatives.iter().map(|n| term(n, T::zero())).collect();
    SgnsGradients {
        center: g_center,
        positive: g_pos,
        negatives: g_negs,
    }
}

fn encode(corpus: &[TokenSequence], vocab: &Vocabulary) -> Vec<Vec<usize>> {
    corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.get(t)).collect())
        .collect()
}

fn pairs_per_epoch(sentences: &[Vec<usize>], window: usize) -> u64 {
    sentences
        .iter()
        .map(|s| {
            let n = s.len();
            (0..n)
                .map(|i| (i.min(window) + (n - 1 - i).min(window)) as u64)
                .sum::<u64>()
        })
        .sum()
}

/// Trains center and context vectors on `corpus`.
///
/// Every token within `window` positions of a center token (clipped at the
/// sequence edges) is a positive pair; `negatives` tokens per pair are drawn
/// from the unigram distribution raised to 3/4, skipping draws equal to the
/// positive. The learning rate falls linearly to 1e-4 of its initial value
/// over all pair steps. Single-threaded and bit-reproducible for a seed.
pub fn train_embeddings<T: Scalar>(
    corpus: &[TokenSequence],
    params: &Hyperparams,
) -> Result<EmbeddingModel<T>, EmbedError> {
    params.validate()?;
    let vocab = Vocabulary::build(corpus, params.min_count);
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary);
    }
    let d = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let bound = 0.5 / d as f64;
    let mut vectors: Vec<T> = (0..vocab.len() * d)
        .map(|_| T::from_f64_lossy(rng.gen_range(-bound..bound)))
        .collect();
    let mut context = vec![T::zero(); vocab.len() * d];

    let weights: Vec<f64> = (0..vocab.len())
        .map(|i| (vocab.count(i) as f64).powf(0.75))
        .collect();
    let noise = WeightedIndex::new(&weights).expect("counts are positive");

    let sentences = encode(corpus, &vocab);
    let total = (pairs_per_epoch(&sentences, params.window) * params.epochs as u64).max(1) as f64;
    let lr0 = params.learning_rate;
    let mut step: u64 = 0;
    let mut neu = vec![T::zero(); d];
    let mut targets: Vec<(usize, T)> = Vec::with_capacity(params.negatives + 1);

    for _ in 0..params.epochs {
        for s in &sentences {
            for (i, &center) in s.iter().enumerate() {
                let lo = i.saturating_sub(params.window);
                let hi = (i + params.window).min(s.len() - 1);
                for (j, &positive) in s.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    let lr = T::from_f64_lossy(
                        lr0 * (1.0 - (1.0 - MIN_LR_FRACTION) * step as f64 / total),
                    );
                    step += 1;
                    targets.clear();
                    targets.push((positive, T::one()));
                    for _ in 0..params.negatives {
                        let n = noise.sample(&mut rng);
                        if n != positive {
                            targets.push((n, T::zero()));
                        }
                    }
                    neu.iter_mut().for_each(|x| *x = T::zero());
                    let v = center * d..(center + 1) * d;
                    for &(t, label) in &targets {
                        let u = t * d..(t + 1) * d;
                        let f = dot(&vectors[v.clone()], &context[u.clone()]);
                        let g = -lr * pair_coefficient(f, label);
                        for k in 0..d {
                            neu[k] += g * context[u.start + k];
                            context[u.start + k] += g * vectors[v.start + k];
                        }
                    }
                    for k in 0..d {
                        vectors[v.start + k] += neu[k];
                    }
                }
            }
        }
    }

    Ok(EmbeddingModel {
        hyperparams: *params,
        vocab,
        vectors,
        context_vectors: context,
        corpus_fingerprint: corpus_fingerprint(corpus),
    })
}
