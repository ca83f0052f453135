//! Classifier container.
//!
//! Header line `sast-triage-model v1 <kind>` (kind: rf, svm, gbt, ensemble,
//! majority), then a little-endian payload starting with the scalar width
//! byte. Node lists are encoded as a count followed by one tag byte per node
//! (0 = split: u64 feature, scalar threshold, u64 left, u64 right; 1 = leaf).
//! An ensemble payload is the forest, SVM and GBT payloads back to back.

use super::gbt::{RegressionNode, RegressionTree};
use super::tree::{DecisionTree, TreeNode};
use super::{Classifier, EnsembleModel, GbtModel, LinearSvmModel, ModelKind, RandomForestModel};
use crate::codec::{Decoder, Encoder};
use crate::error::FormatError;
use crate::ingest::Label;
use crate::scalar::Scalar;

pub const MODEL_MAGIC: &str = "sast-triage-model";
pub const MODEL_VERSION: u32 = 1;

fn label_byte(l: Label) -> u8 {
    u8::from(!l.is_real())
}

fn byte_label(b: u8) -> Result<Label, FormatError> {
    match b {
        0 => Ok(Label::Real),
        1 => Ok(Label::Spurious),
        _ => Err(FormatError::Corrupt(format!("bad label byte {b}"))),
    }
}

fn opt_usize(e: &mut Encoder, v: Option<usize>) {
    match v {
        Some(v) => {
            e.u8(1);
            e.usize(v);
        }
        None => e.u8(0),
    }
}

fn read_opt_usize(d: &mut Decoder<'_>) -> Result<Option<usize>, FormatError> {
    match d.u8()? {
        0 => Ok(None),
        1 => Ok(Some(d.usize()?)),
        b => Err(FormatError::Corrupt(format!("bad option tag {b}"))),
    }
}

fn check_children(n_nodes: usize, left: usize, right: usize) -> Result<(), FormatError> {
    if left >= n_nodes || right >= n_nodes {
        return Err(FormatError::Corrupt("child index out of range".into()));
    }
    Ok(())
}

fn encode_forest<T: Scalar>(e: &mut Encoder, m: &RandomForestModel<T>) {
    e.usize(m.n_trees);
    e.usize(m.max_depth);
    e.usize(m.features_per_split);
    e.usize(m.n_features);
    e.u64(m.seed);
    match m.constant {
        Some(l) => {
            e.u8(1);
            e.u8(label_byte(l));
        }
        None => e.u8(0),
    }
    e.usize(m.trees.len());
    for t in &m.trees {
        e.usize(t.nodes.len());
        for n in &t.nodes {
            match *n {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    e.u8(0);
                    e.usize(feature);
                    e.scalar(threshold);
                    e.usize(left);
                    e.usize(right);
                }
                TreeNode::Leaf { counts } => {
                    e.u8(1);
                    e.usize(counts[0]);
                    e.usize(counts[1]);
                }
            }
        }
    }
}

fn decode_forest<T: Scalar>(d: &mut Decoder<'_>) -> Result<RandomForestModel<T>, FormatError> {
    let n_trees = d.usize()?;
    let max_depth = d.usize()?;
    let features_per_split = d.usize()?;
    let n_features = d.usize()?;
    let seed = d.u64()?;
    let constant = match d.u8()? {
        0 => None,
        1 => Some(byte_label(d.u8()?)?),
        b => return Err(FormatError::Corrupt(format!("bad option tag {b}"))),
    };
    let count = d.len(8)?;
    let mut trees = Vec::with_capacity(count);
    for _ in 0..count {
        let n = d.len(17)?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            nodes.push(match d.u8()? {
                0 => {
                    let feature = d.usize()?;
                    let threshold = d.scalar()?;
                    let (left, right) = (d.usize()?, d.usize()?);
                    check_children(n, left, right)?;
                    if feature >= n_features {
                        return Err(FormatError::Corrupt("split feature out of range".into()));
                    }
                    TreeNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    }
                }
                1 => TreeNode::Leaf {
                    counts: [d.usize()?, d.usize()?],
                },
                b => return Err(FormatError::Corrupt(format!("bad node tag {b}"))),
            });
        }
        if nodes.is_empty() {
            return Err(FormatError::Corrupt("empty tree".into()));
        }
        trees.push(DecisionTree { nodes });
    }
    if trees.is_empty() {
        return Err(FormatError::Corrupt("forest has no trees".into()));
    }
    Ok(RandomForestModel {
        trees,
        n_trees,
        max_depth,
        features_per_split,
        n_features,
        seed,
        constant,
    })
}

fn encode_svm<T: Scalar>(e: &mut Encoder, m: &LinearSvmModel<T>) {
    e.scalars(&m.weights);
    e.scalar(m.bias);
    e.f64(m.lambda);
    e.usize(m.epochs);
    e.u64(m.seed);
}

fn decode_svm<T: Scalar>(d: &mut Decoder<'_>) -> Result<LinearSvmModel<T>, FormatError> {
    Ok(LinearSvmModel {
        weights: d.scalars()?,
        bias: d.scalar()?,
        lambda: d.f64()?,
        epochs: d.usize()?,
        seed: d.u64()?,
    })
}

fn encode_gbt<T: Scalar>(e: &mut Encoder, m: &GbtModel<T>) {
    e.f64(m.shrinkage);
    e.usize(m.n_rounds);
    e.usize(m.max_depth);
    e.f64(m.leaf_lambda);
    e.scalar(m.base_score);
    e.usize(m.n_features);
    opt_usize(e, m.early_stopped);
    e.scalars(&m.loss_history);
    e.usize(m.trees.len());
    for t in &m.trees {
        e.usize(t.nodes.len());
        for n in &t.nodes {
            match *n {
                RegressionNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    e.u8(0);
                    e.usize(feature);
                    e.scalar(threshold);
                    e.usize(left);
                    e.usize(right);
                }
                RegressionNode::Leaf { value } => {
                    e.u8(1);
                    e.scalar(value);
                }
            }
        }
    }
}

fn decode_gbt<T: Scalar>(d: &mut Decoder<'_>) -> Result<GbtModel<T>, FormatError> {
    let shrinkage = d.f64()?;
    let n_rounds = d.usize()?;
    let max_depth = d.usize()?;
    let leaf_lambda = d.f64()?;
    let base_score = d.scalar()?;
    let n_features = d.usize()?;
    let early_stopped = read_opt_usize(d)?;
    let loss_history = d.scalars()?;
    let count = d.len(8)?;
    let mut trees = Vec::with_capacity(count);
    for _ in 0..count {
        let n = d.len(1 + T::WIDTH as usize)?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            nodes.push(match d.u8()? {
                0 => {
                    let feature = d.usize()?;
                    let threshold = d.scalar()?;
                    let (left, right) = (d.usize()?, d.usize()?);
                    check_children(n, left, right)?;
                    if feature >= n_features {
                        return Err(FormatError::Corrupt("split feature out of range".into()));
                    }
                    RegressionNode::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    }
                }
                1 => RegressionNode::Leaf { value: d.scalar()? },
                b => return Err(FormatError::Corrupt(format!("bad node tag {b}"))),
            });
        }
        if nodes.is_empty() {
            return Err(FormatError::Corrupt("empty tree".into()));
        }
        trees.push(RegressionTree { nodes });
    }
    Ok(GbtModel {
        trees,
        shrinkage,
        n_rounds,
        max_depth,
        leaf_lambda,
        base_score,
        n_features,
        early_stopped,
        loss_history,
    })
}

pub fn save_classifier<T: Scalar>(model: &Classifier<T>) -> Vec<u8> {
    let mut e = Encoder::with_header(&format!(
        "{MODEL_MAGIC} v{MODEL_VERSION} {}",
        model.kind().tag()
    ));
    e.u8(T::WIDTH);
    match model {
        Classifier::RandomForest(m) => encode_forest(&mut e, m),
        Classifier::LinearSvm(m) => encode_svm(&mut e, m),
        Classifier::Gbt(m) => encode_gbt(&mut e, m),
        Classifier::Ensemble(m) => {
            encode_forest(&mut e, &m.forest);
            encode_svm(&mut e, &m.svm);
            encode_gbt(&mut e, &m.gbt);
        }
        Classifier::Majority { label, n_features } => {
            e.u8(label_byte(*label));
            e.usize(*n_features);
        }
    }
    e.finish()
}

pub fn load_classifier<T: Scalar>(bytes: &[u8]) -> Result<Classifier<T>, FormatError> {
    let (mut d, kind) = Decoder::open(bytes, MODEL_MAGIC, MODEL_VERSION)?;
    let kind = kind.parse::<ModelKind>().map_err(FormatError::Corrupt)?;
    d.expect_width::<T>()?;
    let model = match kind {
        ModelKind::RandomForest => Classifier::RandomForest(decode_forest(&mut d)?),
        ModelKind::LinearSvm => Classifier::LinearSvm(decode_svm(&mut d)?),
        ModelKind::Gbt => Classifier::Gbt(decode_gbt(&mut d)?),
        ModelKind::Ensemble => {
            let forest = decode_forest(&mut d)?;
            let svm = decode_svm(&mut d)?;
            let gbt = decode_gbt(&mut d)?;
            Classifier::Ensemble(
                EnsembleModel::new(forest, svm, gbt)
                    .map_err(|e| FormatError::Corrupt(e.to_string()))?,
            )
        }
        ModelKind::Majority => Classifier::Majority {
            label: byte_label(d.u8()?)?,
            n_features: d.usize()?,
        },
    };
    d.finish()?;
    Ok(model)
}

/// Like [`load_classifier`], but the file must hold a model of `kind`.
pub fn load_classifier_as<T: Scalar>(
    bytes: &[u8],
    kind: ModelKind,
) -> Result<Classifier<T>, FormatError> {
    let model = load_classifier(bytes)?;
    if model.kind() != kind {
        return Err(FormatError::KindMismatch {
            expected: kind.tag().to_string(),
            found: model.kind().tag().to_string(),
        });
    }
    Ok(model)
}
