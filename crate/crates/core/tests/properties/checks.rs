//! Randomized invariant checks over every pipeline stage.
//!
//! Each check draws its cases from a fixed-seed generator and returns a
//! description of the first violation it finds. The same functions back the
//! core crate's `properties` test target and the acceptance gate.

use std::collections::BTreeSet;
use std::fs;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sast_triage::embed::{
    embed_average, sgns_gradients, sgns_loss, train_embeddings, EmbeddingModel, Hyperparams,
};
use sast_triage::evaluate::{filter_report, ConfusionMatrix, EvaluationReport};
use sast_triage::ingest::TypeMap;
use sast_triage::learn::{
    fit_regression_tree, svm_objective, svm_subgradient, train_gbt, train_random_forest, train_svm,
    train_tree, Classifier, Dataset, EnsembleModel, GbtParams, RandomForestParams, SvmParams,
    TreeNode, TreeParams,
};
use sast_triage::tokenize::{tokenize, tokenize_spanned};
use sast_triage::Label;

pub type Check = fn() -> Result<(), String>;

pub const CHECKS: &[(&str, Check)] = &[
    (
        "tokenizer coverage and determinism",
        tokenizer_coverage_and_determinism,
    ),
    ("tokenizer placeholder idempotence", tokenizer_idempotence),
    (
        "embedding gradient vs finite differences",
        sgns_gradient_check,
    ),
    ("embedding co-occurrence ordering", cooccurrence_ordering),
    (
        "embed_average permutation invariance and bounds",
        average_invariance_and_bounds,
    ),
    ("forest vote conservation", forest_vote_conservation),
    ("tree vs exhaustive split oracle", tree_matches_oracle),
    (
        "svm subgradient vs finite differences",
        svm_subgradient_check,
    ),
    ("gbt kept-round loss monotonicity", gbt_loss_monotone),
    ("gbt newton leaf closed form", gbt_newton_leaf),
    ("ensemble unanimity", ensemble_unanimity),
    ("confusion matrix conservation", confusion_conservation),
    (
        "filter threshold monotonicity and conservation",
        filter_monotonicity,
    ),
];

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + stream)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale < 1e-12 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

const SNIPPET_PIECES: &[&str] = &[
    "stmt",
    ".",
    "executeQuery",
    "(",
    ")",
    ";",
    "\"SELECT * FROM t\"",
    "'x'",
    "+",
    "==",
    "!=",
    "<=",
    ">=",
    "&&",
    "||",
    "++",
    "--",
    "+=",
    "->",
    "0x1F",
    "3.14e-2f",
    "42L",
    "1_000",
    "request",
    "getParameter",
    "$var",
    "_x9",
    "<",
    ">",
    "=",
    "{",
    "}",
    "[",
    "]",
    "@",
    "#",
    "\"unterminated",
    "é",
    "\t",
    "\n",
    " ",
    "  ",
    "<NUM>",
    "<STR>",
    "/",
    "*",
    "//",
    "\\",
];

fn random_snippet(r: &mut ChaCha8Rng) -> String {
    let n = r.gen_range(0..30);
    (0..n)
        .map(|_| *SNIPPET_PIECES.choose(r).expect("non-empty"))
        .collect()
}

fn tokenizer_coverage_and_determinism() -> Result<(), String> {
    let mut r = rng(1);
    for _ in 0..2000 {
        let code = random_snippet(&mut r);
        let spanned = tokenize_spanned(&code);
        let mut covered = vec![false; code.len()];
        let mut last_end = 0;
        for t in &spanned {
            ensure(t.span.start >= last_end, || {
                format!("overlapping spans in {code:?}")
            })?;
            ensure(
                !t.text.is_empty() && !t.text.chars().any(char::is_whitespace),
                || format!("bad token {:?} in {code:?}", t.text),
            )?;
            for c in covered.iter_mut().take(t.span.end).skip(t.span.start) {
                *c = true;
            }
            last_end = t.span.end;
        }
        for (i, ch) in code.char_indices() {
            ensure(ch.is_whitespace() || covered[i], || {
                format!("{ch:?} at {i} uncovered in {code:?}")
            })?;
        }
        // whitespace only appears inside literals, which collapse to one token
        let plain = tokenize(&code);
        ensure(plain == tokenize(&code), || {
            format!("nondeterministic on {code:?}")
        })?;
        ensure(
            plain.tokens == spanned.iter().map(|t| t.text.clone()).collect::<Vec<_>>(),
            || format!("instrumented mode disagrees on {code:?}"),
        )?;
    }
    Ok(())
}

fn tokenizer_idempotence() -> Result<(), String> {
    let mut r = rng(2);
    for _ in 0..2000 {
        let code = random_snippet(&mut r);
        let once = tokenize(&code);
        let twice = tokenize(&once.tokens.join(" "));
        ensure(once == twice, || {
            format!("{code:?}: {:?} vs {:?}", once.tokens, twice.tokens)
        })?;
    }
    Ok(())
}

fn random_vec(r: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| r.gen_range(-scale..scale)).collect()
}

fn sgns_gradient_check() -> Result<(), String> {
    let mut r = rng(3);
    let h = 1e-5;
    for case in 0..200 {
        let d = r.gen_range(1..=12);
        let k = r.gen_range(0..=5);
        let center = random_vec(&mut r, d, 1.0);
        let pos = random_vec(&mut r, d, 1.0);
        let negs: Vec<Vec<f64>> = (0..k).map(|_| random_vec(&mut r, d, 1.0)).collect();
        let loss = |c: &[f64], p: &[f64], n: &[Vec<f64>]| {
            let refs: Vec<&[f64]> = n.iter().map(Vec::as_slice).collect();
            sgns_loss(c, p, &refs)
        };
        let refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let g = sgns_gradients(&center, &pos, &refs);

        // which vector is perturbed: 0 center, 1 positive, 2.. negatives
        for target in 0..2 + k {
            for j in 0..d {
                let eval = |delta: f64| {
                    let (mut c, mut p, mut n) = (center.clone(), pos.clone(), negs.clone());
                    match target {
                        0 => c[j] += delta,
                        1 => p[j] += delta,
                        t => n[t - 2][j] += delta,
                    }
                    loss(&c, &p, &n)
                };
                let numeric = (eval(h) - eval(-h)) / (2.0 * h);
                let analytic = match target {
                    0 => g.center[j],
                    1 => g.positive[j],
                    t => g.negatives[t - 2][j],
                };
                let e = rel_err(analytic, numeric);
                ensure(e <= 1e-4 || (analytic - numeric).abs() < 1e-9, || {
                    format!(
                        "case {case} target {target} dim {j}: {analytic} vs {numeric} (rel {e:e})"
                    )
                })?;
            }
        }
    }
    Ok(())
}

fn cooccurrence_ordering() -> Result<(), String> {
    let mut corpus: Vec<_> = (0..50).map(|_| tokenize("a b")).collect();
    corpus.push(tokenize("x"));
    let mut hp = Hyperparams::new(10, 7);
    hp.window = 1;
    hp.epochs = 200;
    hp.negatives = 2;
    let m: EmbeddingModel<f64> = train_embeddings(&corpus, &hp).map_err(|e| e.to_string())?;
    let ab = m.pair_score("a", "b").ok_or("a or b missing")?;
    let ax = m.pair_score("a", "x").ok_or("x missing")?;
    ensure(ab > ax + 0.2, || {
        format!("score(a,b)={ab} not clearly above score(a,x)={ax}")
    })
}

fn toy_embedding(seed: u64) -> EmbeddingModel<f64> {
    let corpus = [
        "String param = request.getParameter(\"id\");",
        "stmt.executeQuery(\"SELECT * FROM t WHERE id=\" + param);",
        "String bar = \"safe\"; int n = 42;",
        "response.getWriter().println(bar);",
        "MessageDigest md = MessageDigest.getInstance(\"MD5\");",
        "Cipher c = Cipher.getInstance(\"DES/ECB/PKCS5Padding\");",
        "java.util.Random r = new java.util.Random(); r.nextInt();",
        "if (param != null && param.length() > 0) { bar = param; }",
    ];
    let seqs: Vec<_> = corpus.iter().map(|c| tokenize(c)).collect();
    let mut hp = Hyperparams::new(6, seed);
    hp.epochs = 3;
    train_embeddings(&seqs, &hp).expect("toy corpus trains")
}

fn average_invariance_and_bounds() -> Result<(), String> {
    let m = toy_embedding(11);
    let vocab: Vec<String> = m.vocab.tokens().to_vec();
    let mut r = rng(4);
    for _ in 0..500 {
        let n = r.gen_range(0..25);
        let mut toks: Vec<String> = (0..n)
            .map(|_| {
                if r.gen_bool(0.2) {
                    format!("oov{}", r.gen_range(0..5))
                } else {
                    vocab.choose(&mut r).expect("non-empty").clone()
                }
            })
            .collect();
        let seq = |t: &[String]| tokenize(&t.join(" "));
        let base = embed_average(&m, &seq(&toks));
        toks.shuffle(&mut r);
        let shuffled = embed_average(&m, &seq(&toks));
        ensure(base == shuffled, || {
            format!("order changed the average of {toks:?}")
        })?;
        let known: Vec<&[f64]> = toks.iter().filter_map(|t| m.token_vector(t)).collect();
        ensure(base.n_known_tokens == known.len(), || {
            "known-token count wrong".into()
        })?;
        if known.is_empty() {
            ensure(base.values.iter().all(|&v| v == 0.0), || {
                "all-OOV average not zero".into()
            })?;
            continue;
        }
        for j in 0..m.dim() {
            let lo = known.iter().map(|v| v[j]).fold(f64::INFINITY, f64::min);
            let hi = known.iter().map(|v| v[j]).fold(f64::NEG_INFINITY, f64::max);
            let v = base.values[j];
            let slack = 1e-12 * lo.abs().max(hi.abs()).max(1e-300);
            ensure(v >= lo - slack && v <= hi + slack, || {
                format!("component {j}={v} outside [{lo}, {hi}]")
            })?;
        }
    }
    Ok(())
}

fn random_dataset(r: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset<f64> {
    loop {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| random_vec(r, d, 1.0)).collect();
        // labels correlate with the first feature so models have signal
        let labels: Vec<Label> = rows
            .iter()
            .map(|x| Label::from_is_real(x[0] + r.gen_range(-0.4..0.4) > 0.0))
            .collect();
        let data = Dataset::new(rows, labels).expect("well-formed");
        if data.has_both_classes() {
            return data;
        }
    }
}

fn forest_vote_conservation() -> Result<(), String> {
    let mut r = rng(5);
    for case in 0..10u64 {
        let data = random_dataset(&mut r, 40, 4);
        let mut params = RandomForestParams::new(case);
        params.n_trees = r.gen_range(1..=25);
        params.max_depth = 4;
        let forest = train_random_forest(&data, &params).map_err(|e| e.to_string())?;
        ensure(forest.trees.len() == params.n_trees, || {
            "tree count differs".into()
        })?;
        for _ in 0..50 {
            let x = random_vec(&mut r, 4, 1.5);
            let real = forest.real_votes(&x);
            let spurious = forest
                .trees
                .iter()
                .filter(|t| t.vote(&x) == Label::Spurious)
                .count();
            ensure(real + spurious == params.n_trees, || {
                format!("{real}+{spurious} != {}", params.n_trees)
            })?;
            let p = forest
                .predict_with_threshold(&x, 0.5)
                .map_err(|e| e.to_string())?;
            let frac = real as f64 / params.n_trees as f64;
            ensure(p.confidence == frac, || {
                "confidence is not the REAL vote fraction".into()
            })?;
            ensure(p.label.is_real() == (2 * real > params.n_trees), || {
                "majority rule broken".into()
            })?;
        }
    }
    Ok(())
}

// ---- exhaustive split oracle on exact rationals ----

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Ratio(i128, i128);

impl Ratio {
    fn new(n: i128, d: i128) -> Self {
        Ratio(n, d)
    }
    fn add(self, o: Ratio) -> Ratio {
        Ratio(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn lt(self, o: Ratio) -> bool {
        self.0 * o.1 < o.0 * self.1
    }
}

/// Weighted Gini impurity of a partition, scaled by the total count:
/// Σ_child n_c · (1 - Σ_k p_k²).
fn weighted_gini(children: &[[i128; 2]]) -> Ratio {
    children.iter().fold(Ratio::new(0, 1), |acc, c| {
        let n = c[0] + c[1];
        if n == 0 {
            return acc;
        }
        acc.add(Ratio::new(n * n - c[0] * c[0] - c[1] * c[1], n))
    })
}

#[derive(Debug, PartialEq)]
enum Shape {
    Leaf([usize; 2]),
    Split {
        feature: usize,
        left_rows: BTreeSet<usize>,
        left: Box<Shape>,
        right: Box<Shape>,
    },
}

fn counts(labels: &[Label], rows: &[usize]) -> [usize; 2] {
    let real = rows.iter().filter(|&&i| labels[i].is_real()).count();
    [real, rows.len() - real]
}

fn oracle(
    xs: &[[i64; 2]],
    labels: &[Label],
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
) -> Shape {
    let c = counts(labels, &rows);
    if depth >= max_depth || c[0] == 0 || c[1] == 0 {
        return Shape::Leaf(c);
    }
    let parent = weighted_gini(&[[c[0] as i128, c[1] as i128]]);
    // every (feature, cut between adjacent distinct values), lowest feature
    // then lowest cut first; strictly lower impurity required to replace
    let mut best: Option<(Ratio, usize, i64)> = None;
    for f in [0, 1] {
        let values: BTreeSet<i64> = rows.iter().map(|&i| xs[i][f]).collect();
        for &v in values.iter().take(values.len().saturating_sub(1)) {
            let left: Vec<usize> = rows.iter().copied().filter(|&i| xs[i][f] <= v).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&i| xs[i][f] > v).collect();
            let (l, r) = (counts(labels, &left), counts(labels, &right));
            let g = weighted_gini(&[[l[0] as i128, l[1] as i128], [r[0] as i128, r[1] as i128]]);
            if !g.lt(parent) {
                continue;
            }
            if best.is_none_or(|(b, _, _)| g.lt(b)) {
                best = Some((g, f, v));
            }
        }
    }
    let Some((_, feature, v)) = best else {
        return Shape::Leaf(c);
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| xs[i][feature] <= v);
    Shape::Split {
        feature,
        left_rows: l.iter().copied().collect(),
        left: Box::new(oracle(xs, labels, l, depth + 1, max_depth)),
        right: Box::new(oracle(xs, labels, r, depth + 1, max_depth)),
    }
}

fn shape_of(nodes: &[TreeNode<f64>], at: usize, data: &Dataset<f64>, rows: Vec<usize>) -> Shape {
    match &nodes[at] {
        TreeNode::Leaf { counts } => Shape::Leaf(*counts),
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&i| data.row(i)[*feature] <= *threshold);
            Shape::Split {
                feature: *feature,
                left_rows: l.iter().copied().collect(),
                left: Box::new(shape_of(nodes, *left, data, l)),
                right: Box::new(shape_of(nodes, *right, data, r)),
            }
        }
    }
}

fn tree_matches_oracle() -> Result<(), String> {
    let mut r = rng(6);
    for case in 0..50 {
        // small integer grid so ties between candidate splits actually occur
        let xs: Vec<[i64; 2]> = (0..8)
            .map(|_| [r.gen_range(0..5), r.gen_range(0..5)])
            .collect();
        let labels: Vec<Label> = (0..8)
            .map(|_| Label::from_is_real(r.gen_bool(0.5)))
            .collect();
        let rows: Vec<Vec<f64>> = xs.iter().map(|p| vec![p[0] as f64, p[1] as f64]).collect();
        let data = Dataset::new(rows, labels.clone()).map_err(|e| e.to_string())?;
        let max_depth = 1 + case % 2;
        let params = TreeParams {
            max_depth,
            features_per_split: 2,
        };
        let all: Vec<usize> = (0..8).collect();
        let tree = train_tree(&data, &all, &params, &mut rng(100 + case as u64))
            .map_err(|e| e.to_string())?;
        let got = shape_of(&tree.nodes, 0, &data, all.clone());
        let want = oracle(&xs, &labels, all, 0, max_depth);
        ensure(got == want, || {
            format!("case {case}: points {xs:?} labels {labels:?}\n got {got:?}\nwant {want:?}")
        })?;
    }
    Ok(())
}

fn svm_subgradient_check() -> Result<(), String> {
    let mut r = rng(7);
    // the objective is exactly quadratic between hinge kinks, so any step
    // that cannot reach a kink is exact up to roundoff; |x| ≤ 1 and margins
    // stay ≥ 1e-3 from the kink, so h = 1e-4 never crosses one
    let h = 1e-4;
    let mut checked = 0;
    while checked < 200 {
        let n = r.gen_range(1..20);
        let d = r.gen_range(1..6);
        let data = random_dataset(&mut r, n.max(2), d);
        let w = random_vec(&mut r, d, 2.0);
        let b = r.gen_range(-1.0..1.0);
        let lambda = [1e-4, 1e-2, 0.5][r.gen_range(0..3)];
        let near_kink = (0..data.len()).any(|i| {
            let m = data.labels[i].sign()
                * (w.iter().zip(data.row(i)).map(|(a, c)| a * c).sum::<f64>() + b);
            (m - 1.0).abs() < 1e-3
        });
        if near_kink {
            continue;
        }
        checked += 1;
        let (gw, gb) = svm_subgradient(&w, b, &data, lambda);
        for j in 0..=d {
            let eval = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < d {
                    w2[j] += delta;
                } else {
                    b2 += delta;
                }
                svm_objective(&w2, b2, &data, lambda)
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let analytic = if j < d { gw[j] } else { gb };
            let e = rel_err(analytic, numeric);
            ensure(e <= 1e-5 || (analytic - numeric).abs() < 1e-9, || {
                format!("coordinate {j}: {analytic} vs {numeric} (rel {e:e})")
            })?;
        }
    }
    Ok(())
}

fn gbt_loss_monotone() -> Result<(), String> {
    let mut r = rng(8);
    for case in 0..15 {
        let data = random_dataset(&mut r, 60, 3);
        let params = GbtParams {
            shrinkage: [0.1, 0.5, 1.0][case % 3],
            rounds: 30,
            max_depth: 1 + case % 3,
            leaf_lambda: [0.0, 1.0, 5.0][(case / 3) % 3],
        };
        let m = train_gbt(&data, &params).map_err(|e| e.to_string())?;
        ensure(m.loss_history.len() == m.trees.len() + 1, || {
            "loss history misaligned".into()
        })?;
        for w in m.loss_history.windows(2) {
            ensure(w[1] <= w[0], || {
                format!("case {case}: loss rose {} -> {}", w[0], w[1])
            })?;
        }
    }
    Ok(())
}

fn gbt_newton_leaf() -> Result<(), String> {
    let mut r = rng(9);
    for case in 0..200 {
        let n = r.gen_range(1..30);
        let data = random_dataset(&mut r, n.max(2), 2);
        let lambda = r.gen_range(0.0..3.0);
        let eta = r.gen_range(0.05..1.0);
        // arbitrary gradient/hessian pairs: the leaf is the regularized mean step
        let g: Vec<f64> = (0..data.len()).map(|_| r.gen_range(-2.0..2.0)).collect();
        let hs: Vec<f64> = (0..data.len()).map(|_| r.gen_range(0.01..1.0)).collect();
        let tree = fit_regression_tree(&data, &g, &hs, 0, lambda, eta);
        let want = -eta * g.iter().sum::<f64>() / (hs.iter().sum::<f64>() + lambda);
        let got = tree.predict(data.row(0));
        ensure(tree.nodes.len() == 1, || "depth-0 tree has splits".into())?;
        ensure(rel_err(got, want) <= 1e-12, || {
            format!("case {case}: leaf {got} vs closed form {want}")
        })?;

        // the logistic-loss case: one Newton step on Σ loss(f_i + w) + λw²/2
        // from raw scores f, with derivatives taken numerically
        let f: Vec<f64> = (0..data.len()).map(|_| r.gen_range(-2.0..2.0)).collect();
        let y: Vec<f64> = data
            .labels
            .iter()
            .map(|l| f64::from(u8::from(l.is_real())))
            .collect();
        let total = |w: f64| -> f64 {
            f.iter()
                .zip(&y)
                .map(|(&fi, &yi)| {
                    let z = fi + w;
                    (1.0 + z.exp()).ln() - yi * z
                })
                .sum()
        };
        let step = 1e-4;
        let d1 = (total(step) - total(-step)) / (2.0 * step);
        let d2 = (total(step) - 2.0 * total(0.0) + total(-step)) / (step * step);
        let newton = -eta * d1 / (d2 + lambda);
        let p: Vec<f64> = f.iter().map(|&fi| 1.0 / (1.0 + (-fi).exp())).collect();
        let grad: Vec<f64> = p.iter().zip(&y).map(|(pi, yi)| pi - yi).collect();
        let hess: Vec<f64> = p.iter().map(|pi| pi * (1.0 - pi)).collect();
        let leaf = fit_regression_tree(&data, &grad, &hess, 0, lambda, eta).predict(data.row(0));
        ensure(
            (leaf - newton).abs() <= 1e-5 * newton.abs().max(1e-3),
            || format!("case {case}: leaf {leaf} vs numeric Newton step {newton}"),
        )?;
    }
    Ok(())
}

fn ensemble_unanimity() -> Result<(), String> {
    let mut r = rng(10);
    let mut unanimous = 0;
    for case in 0..6u64 {
        let data = random_dataset(&mut r, 50, 3);
        let mut fp = RandomForestParams::new(case);
        fp.n_trees = 15;
        let forest = train_random_forest(&data, &fp).map_err(|e| e.to_string())?;
        let svm = train_svm(&data, &SvmParams::new(case)).map_err(|e| e.to_string())?;
        let gp = GbtParams {
            rounds: 20,
            ..Default::default()
        };
        let gbt = train_gbt(&data, &gp).map_err(|e| e.to_string())?;
        let ens = EnsembleModel::new(forest, svm, gbt).map_err(|e| e.to_string())?;
        for _ in 0..300 {
            let x = random_vec(&mut r, 3, 2.0);
            let votes = ens.votes(&x).map_err(|e| e.to_string())?;
            let p = ens
                .predict_with_threshold(&x, 0.5)
                .map_err(|e| e.to_string())?;
            let real = votes.iter().filter(|l| l.is_real()).count();
            ensure(p.label.is_real() == (real >= 2), || {
                format!("votes {votes:?} gave {:?}", p.label)
            })?;
            if votes.iter().all(|&v| v == votes[0]) {
                unanimous += 1;
                ensure(p.label == votes[0], || {
                    format!("unanimous {:?} overridden", votes[0])
                })?;
            }
        }
    }
    ensure(unanimous > 0, || {
        "no unanimous inputs were generated".into()
    })
}

fn confusion_conservation() -> Result<(), String> {
    let mut r = rng(11);
    for _ in 0..2000 {
        let n = r.gen_range(1..60);
        let actual: Vec<Label> = (0..n)
            .map(|_| Label::from_is_real(r.gen_bool(0.3)))
            .collect();
        let predicted: Vec<Label> = (0..n)
            .map(|_| Label::from_is_real(r.gen_bool(0.5)))
            .collect();
        let rep = EvaluationReport::from_pairs(&actual, &predicted);
        let c: ConfusionMatrix = rep.confusion;
        ensure(c.tp + c.fp + c.tn + c.fn_ == n, || {
            format!("{c:?} does not sum to {n}")
        })?;
        let correct = actual
            .iter()
            .zip(&predicted)
            .filter(|(a, p)| a == p)
            .count();
        ensure(rep.accuracy == correct as f64 / n as f64, || {
            "accuracy not recomputable".into()
        })?;
        let spurious = actual.iter().filter(|l| !l.is_real()).count();
        ensure(rep.fp_before == spurious, || {
            "fp_before is not the SPURIOUS count".into()
        })?;
        ensure(
            rep.fp_after == c.fp && rep.fp_after <= rep.fp_before,
            || "fp_after inconsistent".into(),
        )?;
        ensure(rep.fp_rate_before == spurious as f64 / n as f64, || {
            "fp_rate_before".into()
        })?;
        ensure(rep.fp_rate_after == c.fp as f64 / n as f64, || {
            "fp_rate_after".into()
        })?;
    }
    Ok(())
}

const FILTER_SOURCES: &[(&str, &str)] = &[
    (
        "A",
        "String p = request.getParameter(\"q\");\nstmt.executeQuery(\"S\" + p);\n",
    ),
    (
        "B",
        "String bar = \"constant\";\nstmt.executeQuery(\"S\" + bar);\n",
    ),
    ("C", "MessageDigest.getInstance(\"MD5\");\nint n = 4;\n"),
    (
        "D",
        "new java.util.Random().nextInt();\nresponse.getWriter().println(p);\n",
    ),
];

fn filter_fixture() -> (tempfile::TempDir, Vec<u8>) {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut xml = String::from("<?xml version=\"1.0\"?>\n<BugCollection>\n");
    let types = [
        "SQL_INJECTION_JDBC",
        "XSS_SERVLET",
        "WEAK_MESSAGE_DIGEST_MD5",
        "PREDICTABLE_RANDOM",
    ];
    let mut k = 0;
    for (name, body) in FILTER_SOURCES {
        fs::write(dir.path().join(format!("{name}.java")), body).expect("write source");
        for line in 1..=2 {
            let t = types[k % types.len()];
            k += 1;
            xml.push_str(&format!(
                "  <BugInstance type=\"{t}\">\n    <SourceLine classname=\"{name}\" start=\"{line}\" end=\"{line}\" sourcepath=\"{name}.java\"/>\n  </BugInstance>\n"
            ));
        }
    }
    // one unmapped type and one missing file: both must be kept and flagged
    xml.push_str("  <BugInstance type=\"NOT_A_KNOWN_TYPE\">\n    <SourceLine classname=\"A\" start=\"1\" end=\"1\" sourcepath=\"A.java\"/>\n  </BugInstance>\n");
    xml.push_str("  <BugInstance type=\"XSS_SERVLET\">\n    <SourceLine classname=\"Z\" start=\"1\" end=\"1\" sourcepath=\"Z.java\"/>\n  </BugInstance>\n");
    xml.push_str("</BugCollection>\n");
    (dir, xml.into_bytes())
}

fn filter_monotonicity() -> Result<(), String> {
    let (dir, report) = filter_fixture();
    let embedding = toy_embedding(3);
    let map = TypeMap::bundled();
    let mut r = rng(12);
    for case in 0..8u64 {
        let w = random_vec(&mut r, embedding.dim(), 40.0);
        let svm = sast_triage::learn::LinearSvmModel {
            weights: w,
            bias: r.gen_range(-1.0..1.0),
            lambda: 1e-4,
            epochs: 0,
            seed: case,
        };
        let classifier = Classifier::LinearSvm(svm);
        let mut thresholds: Vec<f64> = (0..12).map(|_| r.gen_range(0.0..1.0)).collect();
        thresholds.extend([0.0, 1.0]);
        thresholds.sort_by(f64::total_cmp);
        let mut previous: Option<BTreeSet<usize>> = None;
        for &t in &thresholds {
            let (out, s) = filter_report(&report, dir.path(), &map, &embedding, &classifier, t)
                .map_err(|e| e.to_string())?;
            ensure(s.total() == 10, || {
                format!("kept+dropped+flagged = {} != 10", s.total())
            })?;
            ensure(s.flagged.len() == 2, || {
                format!("expected 2 flagged, got {:?}", s.flagged)
            })?;
            let kept: BTreeSet<usize> = s
                .decisions
                .iter()
                .filter(|d| d.kept)
                .map(|d| d.ordinal)
                .collect();
            if t == 0.0 {
                ensure(out == report, || "threshold 0 changed the report".into())?;
            }
            let remaining = String::from_utf8_lossy(&out)
                .matches("<BugInstance")
                .count();
            ensure(remaining == kept.len() + 2, || {
                "output instance count disagrees with summary".into()
            })?;
            if let Some(prev) = &previous {
                ensure(kept.is_subset(prev), || {
                    format!("threshold {t} kept {kept:?} beyond {prev:?}")
                })?;
            }
            previous = Some(kept);
        }
    }
    Ok(())
}
