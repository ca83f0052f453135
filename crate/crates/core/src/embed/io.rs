//! Embedding model container.
//!
//! ```text
//! "sast-triage-embed v1\n"
//! u8   scalar width (4 = f32, 8 = f64)
//! u64  dim, window, epochs, negatives
//! f64  learning rate
//! u64  min count, seed
//! u64 len + bytes   corpus fingerprint (32 bytes)
//! u64  vocab size, then per entry: u64 len + UTF-8 token, u64 count
//! u64 len + scalars center vectors, row-major
//! u64 len + scalars context vectors, row-major
//! ```
//! All integers and floats little-endian.

use super::{EmbeddingModel, Hyperparams, Vocabulary};
use crate::codec::{Decoder, Encoder};
use crate::error::FormatError;
use crate::scalar::Scalar;

pub const EMBED_MAGIC: &str = "sast-triage-embed";
pub const EMBED_VERSION: u32 = 1;

pub fn save_model<T: Scalar>(model: &EmbeddingModel<T>) -> Vec<u8> {
    let mut e = Encoder::with_header(&format!("{EMBED_MAGIC} v{EMBED_VERSION}"));
    let h = &model.hyperparams;
    e.u8(T::WIDTH);
    e.usize(h.dim);
    e.usize(h.window);
    e.usize(h.epochs);
    e.usize(h.negatives);
    e.f64(h.learning_rate);
    e.usize(h.min_count);
    e.u64(h.seed);
    e.bytes(&model.corpus_fingerprint);
    e.usize(model.vocab.len());
    for (i, t) in model.vocab.tokens().iter().enumerate() {
        e.str(t);
        e.u64(model.vocab.count(i));
    }
    e.scalars(&model.vectors);
    e.scalars(&model.context_vectors);
    e.finish()
}

pub fn load_model<T: Scalar>(bytes: &[u8]) -> Result<EmbeddingModel<T>, FormatError> {
    let (mut d, _) = Decoder::open(bytes, EMBED_MAGIC, EMBED_VERSION)?;
    d.expect_width::<T>()?;
    let hyperparams = Hyperparams {
        dim: d.usize()?,
        window: d.usize()?,
        epochs: d.usize()?,
        negatives: d.usize()?,
        learning_rate: d.f64()?,
        min_count: d.usize()?,
        seed: d.u64()?,
    };
    let fingerprint: [u8; 32] = d
        .bytes()?
        .try_into()
        .map_err(|_| FormatError::Corrupt("fingerprint must be 32 bytes".into()))?;
    let n = d.len(16)?;
    let mut tokens = Vec::with_capacity(n);
    let mut counts = Vec::with_capacity(n);
    for _ in 0..n {
        tokens.push(d.string()?);
        counts.push(d.u64()?);
    }
    let vectors = d.scalars::<T>()?;
    let context_vectors = d.scalars::<T>()?;
    d.finish()?;
    let expected = n * hyperparams.dim;
    if hyperparams.dim == 0 || vectors.len() != expected || context_vectors.len() != expected {
        return Err(FormatError::Corrupt(format!(
            "expected {expected} vector components for {n} tokens of dim {}",
            hyperparams.dim
        )));
    }
    Ok(EmbeddingModel {
        hyperparams,
        vocab: Vocabulary::from_parts(tokens, counts),
        vectors,
        context_vectors,
        corpus_fingerprint: fingerprint,
    })
}
