mod common;

use common::oracles;

#[test]
fn chi_squared_and_gain_ratio_scores() {
    oracles::check_feature_scores(150, 1).unwrap();
}

#[test]
fn split_gain_and_gain_ratio() {
    oracles::check_split_scores(200, 2).unwrap();
}

#[test]
fn normalization_statistics() {
    oracles::check_normalization(200, 3).unwrap();
}

#[test]
fn exact_duplicate_removal() {
    oracles::check_dedupe(200, 4).unwrap();
}

#[test]
fn metrics_from_confusion_matrix() {
    oracles::check_metrics(200, 5).unwrap();
}
