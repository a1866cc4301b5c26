use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::scalar::Scalar;

use super::{LipFunction, PointFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `p -> max_x (f(x) - L d(x,p))`, the pointwise smallest extension.
    Lower,
    /// `p -> min_x (f(x) + L d(x,p))`, the pointwise largest extension.
    Upper,
}

/// McShane-Whitney extension of `values` (given on `subset`) to the whole
/// space with constant `l`. Fails with a witness pair if the data are not
/// `l`-Lipschitz on `subset`.
pub fn mcshane_extend<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    subset: &[usize],
    values: &[S],
    l: &S,
    direction: Direction,
) -> Result<PointFunction<S>> {
    if subset.is_empty() {
        return Err(Error::Argument("extension needs a non-empty subset".into()));
    }
    if subset.len() != values.len() {
        return Err(Error::Structure(format!(
            "{} subset points but {} values",
            subset.len(),
            values.len()
        )));
    }
    if l.is_negative() {
        return Err(Error::Argument("Lipschitz bound must be nonnegative".into()));
    }
    let mut seen = BTreeSet::new();
    for &p in subset {
        space.check_point(p)?;
        if !seen.insert(p) {
            return Err(Error::Argument(format!("point {} listed twice", space.label(p))));
        }
    }
    for (i, &p) in subset.iter().enumerate() {
        for (j, &q) in subset.iter().enumerate().skip(i + 1) {
            let gap = (values[i].clone() - values[j].clone()).abs();
            if gap.greater_than(&(l.clone() * space.dist(p, q).clone())) {
                return Err(Error::precondition(
                    format!(
                        "values are not {}-Lipschitz on the subset: |f({}) - f({})| = {}",
                        l.render(),
                        space.label(p),
                        space.label(q),
                        gap.render()
                    ),
                    vec![p, q],
                ));
            }
        }
    }
    let out = space
        .points()
        .map(|p| {
            if let Some(i) = subset.iter().position(|&x| x == p) {
                return values[i].clone();
            }
            let candidates = subset.iter().zip(values).map(|(&x, fx)| {
                let step = l.clone() * space.dist(x, p).clone();
                match direction {
                    Direction::Lower => fx.clone() - step,
                    Direction::Upper => fx.clone() + step,
                }
            });
            candidates
                .reduce(|a, b| match direction {
                    Direction::Lower => a.max_of(b),
                    Direction::Upper => a.min_of(b),
                })
                .expect("subset is non-empty")
        })
        .collect();
    PointFunction::new(space.clone(), out)
}

/// Replaces `g(u)` by `sup_{v != u} (g(v) - d(v,u))`, leaving every other
/// value alone.
pub fn flatten_at_point<S: Scalar>(g: &LipFunction<S>, u: usize) -> Result<LipFunction<S>> {
    let space = g.space();
    space.check_point(u)?;
    if u == space.base() {
        return Err(Error::Argument("cannot flatten at the base point".into()));
    }
    if g.norm().greater_than(&S::one()) {
        return Err(Error::precondition(
            format!("flattening needs norm at most 1, got {}", g.norm().render()),
            g.norming_pair().map(|(p, q)| vec![p, q]).unwrap_or_default(),
        ));
    }
    let others: Vec<usize> = space.points().filter(|&p| p != u).collect();
    let vals: Vec<S> = others.iter().map(|&p| g.value(p).clone()).collect();
    let ext = mcshane_extend(space, &others, &vals, &S::one(), Direction::Lower)?;
    LipFunction::new(space.clone(), ext.values().to_vec())
}
