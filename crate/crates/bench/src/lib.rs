//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use lipfree::random::{random_free_element, random_lip_function, random_space, rng};
use lipfree::{FiniteMetricSpace, FreeElement, LipFunction, Molecule, Scalar};

/// Seeded random space on `n` points.
pub fn space<S: Scalar>(n: usize, seed: u64) -> Arc<FiniteMetricSpace<S>> {
    Arc::new(random_space(&mut rng(seed), n, 9, 4).expect("random space"))
}

/// Element supported on every non-base point.
pub fn dense_element<S: Scalar>(space: &Arc<FiniteMetricSpace<S>>, seed: u64) -> FreeElement<S> {
    let all: Vec<usize> = space.points().collect();
    random_free_element(&mut rng(seed), space, &all, all.len(), 6).expect("random element")
}

/// Norm-one function with the molecule on its norming pair.
pub fn function_and_molecule<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    seed: u64,
) -> (LipFunction<S>, FreeElement<S>) {
    let f = random_lip_function(&mut rng(seed), space, 4).expect("random function");
    let (u, v) = f.norming_pair().expect("norm-one function has a norming pair");
    let mu = Molecule::new(u, v).expect("distinct points").to_element(space);
    (f, mu)
}
