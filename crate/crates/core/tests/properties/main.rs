mod checks;

use checks::CHECKS;

fn run(name: &str) {
    let (_, check) = CHECKS
        .iter()
        .find(|(n, _)| *n == name)
        .expect("known check");
    if let Err(e) = check() {
        panic!("{name}: {e}");
    }
}

#[test]
fn tokenizer_coverage_and_determinism() {
    run("tokenizer coverage and determinism");
}

#[test]
fn tokenizer_placeholder_idempotence() {
    run("tokenizer placeholder idempotence");
}

#[test]
fn embedding_gradient_matches_finite_differences() {
    run("embedding gradient vs finite differences");
}

#[test]
fn embedding_learns_cooccurrence() {
    run("embedding co-occurrence ordering");
}

#[test]
fn average_is_order_free_and_bounded() {
    run("embed_average permutation invariance and bounds");
}

#[test]
fn forest_votes_are_conserved() {
    run("forest vote conservation");
}

#[test]
fn tree_equals_exhaustive_oracle() {
    run("tree vs exhaustive split oracle");
}

#[test]
fn svm_subgradient_matches_finite_differences() {
    run("svm subgradient vs finite differences");
}

#[test]
fn gbt_kept_rounds_never_raise_loss() {
    run("gbt kept-round loss monotonicity");
}

#[test]
fn gbt_leaf_is_newton_step() {
    run("gbt newton leaf closed form");
}

#[test]
fn ensemble_follows_unanimous_members() {
    run("ensemble unanimity");
}

#[test]
fn confusion_matrix_conserves_samples() {
    run("confusion matrix conservation");
}

#[test]
fn filter_kept_sets_are_nested() {
    run("filter threshold monotonicity and conservation");
}

#[test]
fn every_check_has_a_test() {
    assert_eq!(CHECKS.len(), 13);
}
