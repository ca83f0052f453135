use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::EvaluationReport;
use crate::error::EvalError;
use crate::ingest::Label;
use crate::learn::{train_classifier, Classifier, ClassifierParams, Dataset, ModelKind};
use crate::scalar::Scalar;

/// How held-out accuracy is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Protocol {
    CrossValidation { folds: usize },
    Holdout { test_fraction: f64 },
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol::CrossValidation { folds: 5 }
    }
}

fn shuffled_by_class(labels: &[Label], seed: u64) -> [Vec<usize>; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [Label::Real, Label::Spurious].map(|class| {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        idx
    })
}

/// Seeded stratified assignment of row indices to `k` folds: each class is
/// shuffled and dealt round-robin, continuing across classes so fold sizes
/// differ by at most one. Every fold is sorted.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in shuffled_by_class(labels, seed) {
        for i in class {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    folds
}

/// Seeded stratified split into `(train, test)` rows, with
/// `round(test_fraction · n_class)` rows of each class held out.
pub fn holdout_split(labels: &[Label], test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in shuffled_by_class(labels, seed) {
        let n_test = ((class.len() as f64) * test_fraction).round() as usize;
        test.extend_from_slice(&class[..n_test]);
        train.extend_from_slice(&class[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

fn predict_all<T: Scalar>(
    model: &Classifier<T>,
    data: &Dataset<T>,
) -> Result<Vec<Label>, EvalError> {
    data.rows().map(|x| Ok(model.predict(x)?.label)).collect()
}

/// Metrics of a trained model on a labeled test set.
pub fn score_holdout<T: Scalar>(
    model: &Classifier<T>,
    test: &Dataset<T>,
) -> Result<EvaluationReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::Folds("test set is empty".into()));
    }
    let predicted = predict_all(model, test)?;
    Ok(EvaluationReport::from_pairs(&test.labels, &predicted))
}

/// Stratified k-fold cross-validation. Folds are trained independently (in
/// parallel) and the report aggregates every held-out prediction.
pub fn cross_validate<T: Scalar>(
    data: &Dataset<T>,
    kind: ModelKind,
    params: &ClassifierParams,
    k: usize,
    seed: u64,
) -> Result<EvaluationReport, EvalError> {
    if k < 2 {
        return Err(EvalError::Folds(format!("need at least 2 folds, got {k}")));
    }
    if k > data.len() {
        return Err(EvalError::Folds(format!(
            "{k} folds requested for {} samples; use a smaller k",
            data.len()
        )));
    }
    if !data.has_both_classes() {
        return Err(EvalError::Folds(
            "cross-validation needs both labels present".into(),
        ));
    }
    let folds = stratified_folds(&data.labels, k, seed);
    let mut in_fold = vec![0usize; data.len()];
    for (f, rows) in folds.iter().enumerate() {
        for &i in rows {
            in_fold[i] = f;
        }
    }
    let results = folds
        .par_iter()
        .enumerate()
        .map(|(f, test_rows)| {
            let train_rows: Vec<usize> = (0..data.len()).filter(|&i| in_fold[i] != f).collect();
            let train = data.subset(&train_rows);
            if !train.has_both_classes() {
                return Err(EvalError::Folds(format!(
                    "training split for fold {f} lacks one label; use a smaller k"
                )));
            }
            let model = train_classifier(kind, &train, params)?;
            let test = data.subset(test_rows);
            Ok((test.labels.clone(), predict_all(&model, &test)?))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let mut actual = Vec::with_capacity(data.len());
    let mut predicted = Vec::with_capacity(data.len());
    let mut fold_accuracies = Vec::with_capacity(k);
    for (a, p) in results {
        fold_accuracies.push(EvaluationReport::from_pairs(&a, &p).accuracy);
        actual.extend(a);
        predicted.extend(p);
    }
    let mut report = EvaluationReport::from_pairs(&actual, &predicted);
    report.fold_accuracies = fold_accuracies;
    Ok(report)
}

/// Trains on a stratified split and scores the held-out part.
pub fn evaluate_holdout<T: Scalar>(
    data: &Dataset<T>,
    kind: ModelKind,
    params: &ClassifierParams,
    test_fraction: f64,
    seed: u64,
) -> Result<EvaluationReport, EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::Folds(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let (train_rows, test_rows) = holdout_split(&data.labels, test_fraction, seed);
    let train = data.subset(&train_rows);
    if !train.has_both_classes() {
        return Err(EvalError::Folds("training split lacks one label".into()));
    }
    let model = train_classifier(kind, &train, params)?;
    score_holdout(&model, &data.subset(&test_rows))
}

pub fn evaluate_protocol<T: Scalar>(
    data: &Dataset<T>,
    kind: ModelKind,
    params: &ClassifierParams,
    protocol: Protocol,
    seed: u64,
) -> Result<EvaluationReport, EvalError> {
    match protocol {
        Protocol::CrossValidation { folds } => cross_validate(data, kind, params, folds, seed),
        Protocol::Holdout { test_fraction } => {
            evaluate_holdout(data, kind, params, test_fraction, seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::RandomForestParams;

    fn labels(real: usize, spurious: usize) -> Vec<Label> {
        let mut v = vec![Label::Real; real];
        v.extend(vec![Label::Spurious; spurious]);
        v
    }

    #[test]
    fn folds_partition_and_stratify() {
        let l = labels(8, 12);
        let folds = stratified_folds(&l, 4, 9);
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.len(), 5);
            assert_eq!(f.iter().filter(|&&i| l[i].is_real()).count(), 2);
        }
        assert_eq!(folds, stratified_folds(&l, 4, 9));
        assert_ne!(folds, stratified_folds(&l, 4, 10));
    }

    #[test]
    fn holdout_fraction_per_class() {
        let l = labels(10, 30);
        let (train, test) = holdout_split(&l, 0.2, 1);
        assert_eq!(test.len(), 8);
        assert_eq!(test.iter().filter(|&&i| l[i].is_real()).count(), 2);
        assert_eq!(train.len() + test.len(), 40);
    }

    fn six_points() -> Dataset<f64> {
        let rows = vec![
            vec![0.0],
            vec![0.1],
            vec![0.2],
            vec![0.8],
            vec![0.9],
            vec![1.0],
        ];
        Dataset::new(rows, labels(3, 3).into_iter().rev().collect()).unwrap()
    }

    #[test]
    fn leave_one_out_conserves_samples() {
        let d = six_points();
        let mut p = ClassifierParams::new(2);
        p.forest = RandomForestParams {
            n_trees: 5,
            ..p.forest
        };
        let r = cross_validate(&d, ModelKind::RandomForest, &p, 6, 2).unwrap();
        assert_eq!(r.confusion.total(), 6);
        assert_eq!(r.fold_accuracies.len(), 6);
    }

    #[test]
    fn too_many_folds_is_an_error() {
        let d = six_points();
        let p = ClassifierParams::new(0);
        assert!(matches!(
            cross_validate(&d, ModelKind::Majority, &p, 7, 0),
            Err(EvalError::Folds(_))
        ));
        assert!(matches!(
            cross_validate(&d, ModelKind::Majority, &p, 1, 0),
            Err(EvalError::Folds(_))
        ));
        // one SPURIOUS among 4: leaving it out leaves a single-class training split
        let d = d.subset(&[0, 3, 4, 5]);
        let err = cross_validate(&d, ModelKind::Majority, &p, 4, 0).unwrap_err();
        assert!(err.to_string().contains("smaller k"), "{err}");
    }

    #[test]
    fn empty_test_set() {
        let m = Classifier::<f64>::Majority {
            label: Label::Real,
            n_features: 1,
        };
        let empty = Dataset::<f64>::new(vec![], vec![]).unwrap();
        assert!(score_holdout(&m, &empty).is_err());
    }
}
