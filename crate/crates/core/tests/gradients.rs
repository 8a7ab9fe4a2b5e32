mod common;

use common::gradcheck::*;
use common::TOLERANCE;

const TRIALS: usize = 100;

fn assert_within(name: &str, worst: f64) {
    assert!(worst <= TOLERANCE, "{name}: worst relative error {worst:e}");
}

#[test]
fn affine_matches_finite_differences() {
    assert_within("affine", affine_suite(TRIALS, 1));
}

#[test]
fn tanh_matches_finite_differences() {
    assert_within("tanh", tanh_suite(TRIALS, 2));
}

#[test]
fn softmax_cross_entropy_matches_finite_differences() {
    assert_within("softmax", softmax_suite(TRIALS, 3));
}

#[test]
fn lstm_bptt_matches_finite_differences() {
    assert_within("lstm", lstm_suite(TRIALS, 4));
}

#[test]
fn negative_sampling_loss_matches_finite_differences() {
    assert_within("pairpath", pairpath_suite(TRIALS, 5));
}

#[test]
fn supervised_loss_matches_finite_differences() {
    assert_within("supervised", supervised_suite(TRIALS, 6));
}
