//! Seeded generators for spaces, functions and free elements.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::free::{free_norm, FreeElement};
use crate::lip::{lipschitz_constant, LipFunction};
use crate::metric::FiniteMetricSpace;
use crate::scalar::Scalar;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for item `index` of a batch seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SeededRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index + 1);
    r
}

/// A random metric on `n` points: edge weights `k/den` with `k` in
/// `1..=max_num` and `den` in `1..=max_den`, closed under shortest paths.
pub fn random_space<S: Scalar>(
    rng: &mut impl Rng,
    n: usize,
    max_num: i64,
    max_den: i64,
) -> Result<FiniteMetricSpace<S>> {
    if n == 0 {
        return Err(Error::Argument("a space needs at least one point".into()));
    }
    let mut d: Vec<Vec<S>> = vec![vec![S::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = S::from_ratio(rng.gen_range(1..=max_num), rng.gen_range(1..=max_den));
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].clone() + d[k][j].clone();
                if i != j && via.less_than(&d[i][j]) {
                    d[i][j] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    FiniteMetricSpace::new(labels, 0, d)
}

/// A random element with `support` non-base points and integer-over-small
/// denominator weights in `[-max_num, max_num]`.
pub fn random_free_element<S: Scalar>(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace<S>>,
    candidates: &[usize],
    support: usize,
    max_num: i64,
) -> Result<FreeElement<S>> {
    let mut pool: Vec<usize> = candidates.iter().copied().filter(|&p| p != space.base()).collect();
    pool.shuffle(rng);
    pool.truncate(support.max(1));
    pool.sort_unstable();
    loop {
        let weights: Vec<(usize, S)> = pool
            .iter()
            .map(|&p| {
                (
                    p,
                    S::from_ratio(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=4)),
                )
            })
            .collect();
        let mu = FreeElement::from_weights(space.clone(), weights)?;
        if !mu.is_zero() || pool.is_empty() {
            return Ok(mu);
        }
    }
}

/// Random element divided by its norm.
pub fn random_norm_one_element<S: Scalar>(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace<S>>,
    candidates: &[usize],
    support: usize,
) -> Result<FreeElement<S>> {
    if !candidates.iter().any(|&p| p != space.base()) {
        return Err(Error::Argument("no non-base candidate points".into()));
    }
    let mu = random_free_element(rng, space, candidates, support, 6)?;
    let norm = free_norm(&mu)?.value;
    Ok(mu.scale(&(S::one() / norm)))
}

/// Integer values in `[-range, range]` (zero at the base), divided by the
/// Lipschitz constant.
pub fn random_lip_function<S: Scalar>(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace<S>>,
    range: i64,
) -> Result<LipFunction<S>> {
    if space.len() < 2 {
        return Err(Error::Argument("norm-one functions need at least two points".into()));
    }
    loop {
        let values: Vec<S> = space
            .points()
            .map(|p| {
                if p == space.base() {
                    S::zero()
                } else {
                    S::from_int(rng.gen_range(-range..=range))
                }
            })
            .collect();
        let (c, _) = lipschitz_constant(space, &values);
        if c.is_positive() {
            let scaled = values.into_iter().map(|v| v / c.clone()).collect();
            return LipFunction::new(space.clone(), scaled);
        }
    }
}

/// Random values in `[-range, range]` on an arbitrary subset.
pub fn random_values<S: Scalar>(rng: &mut impl Rng, count: usize, range: i64, den: i64) -> Vec<S> {
    (0..count)
        .map(|_| S::from_ratio(rng.gen_range(-range * den..=range * den), den))
        .collect()
}
