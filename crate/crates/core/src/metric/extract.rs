use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::FiniteMetricSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractionMode {
    /// Single points `u_i` with `a(i-1)/i <= d(u_i,u_j) <= a(i+1)/i`.
    Equidistant,
    /// Pairs `(u_i, v_i)` with the three separated-pair inequalities.
    Pairs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedSequence<S> {
    pub a: Option<S>,
    pub points: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
}

impl<S> SeparatedSequence<S> {
    fn empty() -> Self {
        Self {
            a: None,
            points: Vec::new(),
            pairs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len().max(self.pairs.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn frac<S: Scalar>(a: &S, num: usize, den: usize) -> S {
    a.clone() * S::from_ratio(num as i64, den as i64)
}

fn within_band<S: Scalar>(d: &S, a: &S, i: usize, tol: &S) -> bool {
    let lo = frac(a, i - 1, i) - tol.clone();
    let hi = frac(a, i + 1, i) + tol.clone();
    d.at_least(&lo) && d.at_most(&hi)
}

/// Exhaustive check of the equidistant inequalities (1-based `i < j`).
pub fn check_equidistant_sequence<S: Scalar>(space: &FiniteMetricSpace<S>, a: &S, seq: &[usize], tol: &S) -> bool {
    let distinct: BTreeSet<usize> = seq.iter().copied().collect();
    distinct.len() == seq.len()
        && seq.iter().all(|&p| p < space.len())
        && seq.iter().enumerate().all(|(i0, &ui)| {
            seq[i0 + 1..]
                .iter()
                .all(|&uj| within_band(space.dist(ui, uj), a, i0 + 1, tol))
        })
}

/// Exhaustive check of the three separated-pair inequalities at scale `a`.
pub fn check_pair_sequence<S: Scalar>(space: &FiniteMetricSpace<S>, a: &S, pairs: &[(usize, usize)], tol: &S) -> bool {
    let pts: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    let distinct: BTreeSet<usize> = pts.iter().copied().collect();
    if distinct.len() != pts.len() || pts.iter().any(|&p| p >= space.len()) {
        return false;
    }
    pairs
        .iter()
        .enumerate()
        .all(|(i0, &(u, v))| pair_admissible(space, a, pairs, i0, u, v, tol))
}

/// Checks pair `i0` (0-based) against all earlier pairs and all points.
fn pair_admissible<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    a: &S,
    pairs: &[(usize, usize)],
    i0: usize,
    u: usize,
    v: usize,
    tol: &S,
) -> bool {
    let i = i0 + 1;
    if !within_band(space.dist(u, v), a, i, tol) {
        return false;
    }
    let far_from_earlier = pairs[..i0].iter().enumerate().all(|(j0, &(uj, vj))| {
        let bound = frac(a, j0, j0 + 1) - tol.clone();
        [u, v].iter().all(|&p| {
            space
                .dist(uj, p)
                .clone()
                .min_of(space.dist(vj, p).clone())
                .at_least(&bound)
        })
    });
    if !far_from_earlier {
        return false;
    }
    let bound = frac(a, i - 1, 2 * i) - tol.clone();
    space.points().filter(|&q| q != u && q != v).all(|q| {
        space
            .dist(u, q)
            .clone()
            .min_of(space.dist(v, q).clone())
            .at_least(&bound)
    })
}

/// Nested-shell ordering from `start`: each step takes the `m`-th nearest
/// remaining point distance as the local scale `a_n` and keeps the points in
/// the open shell `(a_n (2n-1)/(2n), a_n (2n+1)/(2n))`.
fn shell_chain<S: Scalar>(space: &FiniteMetricSpace<S>, start: usize, population: usize) -> Vec<usize> {
    let mut chain = vec![start];
    let mut pool: Vec<usize> = space.points().filter(|&p| p != start).collect();
    let mut current = start;
    let mut n = 1;
    while !pool.is_empty() {
        let mut dists: Vec<S> = pool.iter().map(|&p| space.dist(current, p).clone()).collect();
        dists.sort_by(|x, y| x.compare(y));
        let m = population.clamp(1, dists.len());
        let an = dists[m - 1].clone();
        let lo = frac(&an, 2 * n - 1, 2 * n);
        let hi = frac(&an, 2 * n + 1, 2 * n);
        pool.retain(|&p| {
            let d = space.dist(current, p);
            d.greater_than(&lo) && d.less_than(&hi)
        });
        let Some(&next) = pool.first() else { break };
        pool.remove(0);
        chain.push(next);
        current = next;
        n += 1;
    }
    chain
}

/// Searches for a separated sequence and re-verifies it before returning.
///
/// `population` is the finite stand-in for "infinitely many points in the
/// ball": a radius counts as sparse while fewer than `population` points lie
/// within it. `None` uses `ceil(n/4)`.
pub fn extract_separated_pairs<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    tolerance: &S,
    mode: ExtractionMode,
    population: Option<usize>,
) -> Result<SeparatedSequence<S>> {
    if !tolerance.is_positive() {
        return Err(Error::Argument("extraction tolerance must be positive".into()));
    }
    if space.len() < 2 {
        return Ok(SeparatedSequence::empty());
    }
    let population = population.unwrap_or_else(|| space.len().div_ceil(4));
    let scales = space.distinct_distances();
    let best = match mode {
        ExtractionMode::Equidistant => {
            let mut best: Option<(S, Vec<usize>)> = None;
            for start in space.points() {
                let chain = shell_chain(space, start, population);
                let mut orders = vec![chain];
                orders.push(
                    std::iter::once(start)
                        .chain(space.points().filter(|&p| p != start))
                        .collect(),
                );
                for order in &orders {
                    for a in &scales {
                        let mut seq: Vec<usize> = Vec::new();
                        for &p in order {
                            let mut trial = seq.clone();
                            trial.push(p);
                            if check_equidistant_sequence(space, a, &trial, tolerance) {
                                seq = trial;
                            }
                        }
                        if best.as_ref().is_none_or(|(_, b)| seq.len() > b.len()) {
                            best = Some((a.clone(), seq));
                        }
                    }
                }
            }
            best.filter(|(_, s)| s.len() >= 2).map(|(a, points)| SeparatedSequence {
                a: Some(a),
                points,
                pairs: Vec::new(),
            })
        }
        ExtractionMode::Pairs => {
            let mut best: Option<(S, Vec<(usize, usize)>)> = None;
            for a in &scales {
                let mut pairs: Vec<(usize, usize)> = Vec::new();
                let mut used = BTreeSet::new();
                loop {
                    let next = space.ordered_pairs().find(|&(u, v)| {
                        !used.contains(&u)
                            && !used.contains(&v)
                            && pair_admissible(space, a, &pairs, pairs.len(), u, v, tolerance)
                    });
                    match next {
                        Some((u, v)) => {
                            pairs.push((u, v));
                            used.insert(u);
                            used.insert(v);
                        }
                        None => break,
                    }
                }
                if best.as_ref().is_none_or(|(_, b)| pairs.len() > b.len()) {
                    best = Some((a.clone(), pairs));
                }
            }
            best.filter(|(_, p)| p.len() >= 2).map(|(a, pairs)| SeparatedSequence {
                a: Some(a),
                points: Vec::new(),
                pairs,
            })
        }
    };
    let Some(found) = best else {
        return Ok(SeparatedSequence::empty());
    };
    let a = found.a.as_ref().expect("non-empty result carries a scale");
    let ok = match mode {
        ExtractionMode::Equidistant => check_equidistant_sequence(space, a, &found.points, tolerance),
        ExtractionMode::Pairs => check_pair_sequence(space, a, &found.pairs, tolerance),
    };
    if !ok {
        return Err(Error::Certificate("extracted sequence failed re-verification".into()));
    }
    Ok(found)
}
