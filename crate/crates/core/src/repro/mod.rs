//! End-to-end certificates for the counterexamples and existence
//! constructions, each re-derived from raw computed values.

mod daugavet;
mod delta;
mod dichotomy;
mod example1;
mod example2;
mod two_anchor;

pub use daugavet::{nested_annuli_pairs, verify_daugavet_recursion};
pub use delta::{verify_delta_existence, DeltaInput};
pub use dichotomy::{scan_dichotomy, DichotomyRow, DichotomyScan};
pub use example1::{
    example1_alpha, example1_mu, sample_example1_function, sign_normalize, verify_example1, SignNormalized,
};
pub use example2::{example2_function, verify_example2, Example2Params};
pub use two_anchor::verify_two_anchor_daugavet;

use std::collections::BTreeMap;

use crate::lip::LipFunction;
use crate::scalar::Scalar;

/// Point labels mapped to rendered values.
pub(crate) fn labelled_values<S: Scalar>(f: &LipFunction<S>) -> BTreeMap<String, String> {
    f.space()
        .points()
        .map(|p| (f.space().label(p).to_string(), f.value(p).render()))
        .collect()
}

pub(crate) fn pair_labels<S: Scalar>(f: &LipFunction<S>, (p, q): (usize, usize)) -> [String; 2] {
    [f.space().label(p).to_string(), f.space().label(q).to_string()]
}
