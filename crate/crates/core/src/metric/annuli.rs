use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::FiniteMetricSpace;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnulusCheck<S> {
    pub holds: bool,
    /// `d(u,x) + d(v,y) - (1 - eps)(d(u,v) + d(x,y))`.
    pub slack: S,
}

fn check_eps<S: Scalar>(eps: &S) -> Result<()> {
    if eps.is_positive() && eps.less_than(&S::one()) {
        Ok(())
    } else {
        Err(Error::Argument(format!("eps must lie in (0,1), got {}", eps.render())))
    }
}

fn annulus_slack<S: Scalar>(space: &FiniteMetricSpace<S>, eps: &S, q: [usize; 4]) -> S {
    let [u, v, x, y] = q;
    let lhs = space.dist(u, x).clone() + space.dist(v, y).clone();
    let rhs = (S::one() - eps.clone()) * (space.dist(u, v).clone() + space.dist(x, y).clone());
    lhs - rhs
}

/// Tests `d(u,x) + d(v,y) >= (1 - eps)(d(u,v) + d(x,y))`.
pub fn check_annulus_inequality<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    eps: &S,
    u: usize,
    v: usize,
    x: usize,
    y: usize,
) -> Result<AnnulusCheck<S>> {
    check_eps(eps)?;
    for p in [u, v, x, y] {
        space.check_point(p)?;
    }
    let slack = annulus_slack(space, eps, [u, v, x, y]);
    Ok(AnnulusCheck {
        holds: !slack.is_negative(),
        slack,
    })
}

#[derive(Debug, Clone)]
pub struct AnnulusSweep<S> {
    pub inner: Vec<usize>,
    pub ring: Vec<usize>,
    pub far_or_near: Vec<usize>,
    pub checked: usize,
    /// Quadruples `[u, v, x, y]` that fail, with their slack.
    pub failures: Vec<([usize; 4], S)>,
    pub min_slack: Option<S>,
}

impl<S> AnnulusSweep<S> {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the annulus inequality on every quadruple with `d(0,u) <= 8a`,
/// `4a < d(0,v) <= 8a` and `x, y` each either beyond `32a/eps` or within
/// `a eps` of the base.
pub fn annulus_sweep<S: Scalar>(space: &FiniteMetricSpace<S>, eps: &S, a: &S) -> Result<AnnulusSweep<S>> {
    check_eps(eps)?;
    if !a.is_positive() {
        return Err(Error::Argument("annulus sweep needs a > 0".into()));
    }
    let eight = a.clone() * S::from_int(8);
    let four = a.clone() * S::from_int(4);
    let far = a.clone() * S::from_int(32) / eps.clone();
    let near = a.clone() * eps.clone();
    let r = |p: usize| space.dist_to_base(p);
    let inner: Vec<usize> = space.points().filter(|&p| r(p).at_most(&eight)).collect();
    let ring: Vec<usize> = inner.iter().copied().filter(|&p| r(p).greater_than(&four)).collect();
    let far_or_near: Vec<usize> = space
        .points()
        .filter(|&p| r(p).greater_than(&far) || r(p).at_most(&near))
        .collect();
    let mut sweep = AnnulusSweep {
        inner,
        ring,
        far_or_near,
        checked: 0,
        failures: Vec::new(),
        min_slack: None,
    };
    for &u in &sweep.inner {
        for &v in &sweep.ring {
            for &x in &sweep.far_or_near {
                for &y in &sweep.far_or_near {
                    let slack = annulus_slack(space, eps, [u, v, x, y]);
                    sweep.checked += 1;
                    if slack.is_negative() {
                        sweep.failures.push(([u, v, x, y], slack.clone()));
                    }
                    sweep.min_slack = Some(match sweep.min_slack.take() {
                        None => slack,
                        Some(m) => m.min_of(slack),
                    });
                }
            }
        }
    }
    Ok(sweep)
}

/// A pair `(u, v)` together with its exclusion set `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnulusPair {
    pub u: usize,
    pub v: usize,
    pub set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HypothesisViolation<S> {
    Overlap { i: usize, j: usize, point: usize },
    CenterOutside { i: usize },
    Inequality { i: usize, x: usize, y: usize, slack: S },
    EarlierPointInside { i: usize, j: usize, point: usize },
}

impl<S: Scalar> HypothesisViolation<S> {
    /// Points naming the violation.
    pub fn witness(&self) -> Vec<usize> {
        match self {
            Self::Overlap { point, .. } => vec![*point],
            Self::CenterOutside { .. } => vec![],
            Self::Inequality { x, y, .. } => vec![*x, *y],
            Self::EarlierPointInside { point, .. } => vec![*point],
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnuliHypothesisReport<S> {
    pub violations: Vec<HypothesisViolation<S>>,
    /// Smallest inequality slack over all checked `(i, x, y)`.
    pub min_slack: Option<S>,
    pub checked: usize,
}

impl<S> AnnuliHypothesisReport<S> {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks disjointness of the sets, `u_i in A_i`, and the annulus
/// inequality at `eps[i]` for all `x, y` outside `A_i`. With
/// `require_ordered`, also checks that `A_i` misses every earlier `u_j, v_j`.
pub fn check_annuli_hypothesis<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    pairs: &[AnnulusPair],
    eps: &[S],
    require_ordered: bool,
) -> Result<AnnuliHypothesisReport<S>> {
    if eps.len() != pairs.len() {
        return Err(Error::Structure(format!(
            "{} pairs but {} eps values",
            pairs.len(),
            eps.len()
        )));
    }
    for e in eps {
        check_eps(e)?;
    }
    let sets: Vec<BTreeSet<usize>> = pairs.iter().map(|p| p.set.iter().copied().collect()).collect();
    for (p, s) in pairs.iter().zip(&sets) {
        space.check_point(p.u)?;
        space.check_point(p.v)?;
        for &x in s {
            space.check_point(x)?;
        }
    }
    let mut report = AnnuliHypothesisReport {
        violations: Vec::new(),
        min_slack: None,
        checked: 0,
    };
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            if let Some(&point) = sets[i].intersection(&sets[j]).next() {
                report.violations.push(HypothesisViolation::Overlap { i, j, point });
            }
        }
        if !sets[i].contains(&pairs[i].u) {
            report.violations.push(HypothesisViolation::CenterOutside { i });
        }
        if require_ordered {
            for (j, earlier) in pairs[..i].iter().enumerate() {
                for point in [earlier.u, earlier.v] {
                    if sets[i].contains(&point) {
                        report
                            .violations
                            .push(HypothesisViolation::EarlierPointInside { i, j, point });
                    }
                }
            }
        }
        let outside: Vec<usize> = space.points().filter(|p| !sets[i].contains(p)).collect();
        for &x in &outside {
            for &y in &outside {
                let slack = annulus_slack(space, &eps[i], [pairs[i].u, pairs[i].v, x, y]);
                report.checked += 1;
                if slack.is_negative() {
                    report.violations.push(HypothesisViolation::Inequality {
                        i,
                        x,
                        y,
                        slack: slack.clone(),
                    });
                }
                report.min_slack = Some(match report.min_slack.take() {
                    None => slack,
                    Some(m) => m.min_of(slack),
                });
            }
        }
    }
    Ok(report)
}

/// Whether `set` (a bitmask over points) is an admissible exclusion set for
/// the pair `(u, v)` at `eps`.
fn admissible<S: Scalar>(space: &FiniteMetricSpace<S>, eps: &S, u: usize, v: usize, set: u64) -> bool {
    if set & (1 << u) == 0 {
        return false;
    }
    let outside: Vec<usize> = space.points().filter(|&p| set & (1 << p) == 0).collect();
    outside.iter().all(|&x| {
        outside
            .iter()
            .all(|&y| !annulus_slack(space, eps, [u, v, x, y]).is_negative())
    })
}

/// Exhaustive search for the largest family of pairs with pairwise disjoint
/// admissible sets, with `eps[i]` used for the `i`-th member (the last entry
/// repeats). Returns the family size and one witness family. Only usable on
/// spaces with at most 20 points.
pub fn max_annuli_family<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    eps: &[S],
    limit: usize,
) -> Result<(usize, Vec<AnnulusPair>)> {
    let n = space.len();
    if n > 20 {
        return Err(Error::Argument(format!(
            "exhaustive annuli search limited to 20 points, got {n}"
        )));
    }
    if eps.is_empty() {
        return Err(Error::Argument("need at least one eps value".into()));
    }
    for e in eps {
        check_eps(e)?;
    }
    let eps_at = |i: usize| &eps[i.min(eps.len() - 1)];
    // For each family position, the inclusion-minimal admissible sets per pair.
    let minimal_sets = |e: &S| -> Vec<(usize, usize, u64)> {
        let mut out = Vec::new();
        for (u, v) in space.ordered_pairs() {
            let mut valid: Vec<u64> = (0u64..1 << n).filter(|&s| admissible(space, e, u, v, s)).collect();
            valid.sort_by_key(|s| s.count_ones());
            let mut minimal: Vec<u64> = Vec::new();
            for s in valid {
                if minimal.iter().all(|&m| m & s != m) {
                    minimal.push(s);
                }
            }
            minimal.sort_unstable();
            out.extend(minimal.into_iter().map(|s| (u, v, s)));
        }
        out
    };
    let mut cache: Vec<Vec<(usize, usize, u64)>> = Vec::new();
    for i in 0..limit {
        if i < eps.len() || cache.is_empty() {
            cache.push(minimal_sets(eps_at(i)));
        } else {
            let last = cache.last().cloned().unwrap_or_default();
            cache.push(last);
        }
    }

    fn search(
        cache: &[Vec<(usize, usize, u64)>],
        depth: usize,
        used: u64,
        chosen: &mut Vec<(usize, usize, u64)>,
        best: &mut Vec<(usize, usize, u64)>,
    ) {
        if chosen.len() > best.len() {
            *best = chosen.clone();
        }
        if depth == cache.len() {
            return;
        }
        for &(u, v, s) in &cache[depth] {
            if s & used == 0 {
                chosen.push((u, v, s));
                search(cache, depth + 1, used | s, chosen, best);
                chosen.pop();
                if best.len() == cache.len() {
                    return;
                }
            }
        }
    }

    let mut best = Vec::new();
    search(&cache, 0, 0, &mut Vec::new(), &mut best);
    let family = best
        .into_iter()
        .map(|(u, v, s)| AnnulusPair {
            u,
            v,
            set: (0..n).filter(|&p| s & (1 << p) != 0).collect(),
        })
        .collect::<Vec<_>>();
    Ok((family.len(), family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_two_anchor_space, half_line};
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn swapped_endpoints_leave_eps_slack() {
        let s = half_line(&[q(0, 1), q(3, 1), q(7, 1), q(20, 1)]).unwrap();
        let (u, v) = (1, 2);
        let c = check_annulus_inequality(&s, &q(1, 4), u, v, v, u).unwrap();
        assert!(c.holds);
        let total = s.dist(u, v).clone() + s.dist(v, u).clone();
        assert_eq!(c.slack, q(1, 4) * total);
    }

    #[test]
    fn identical_endpoints_leave_full_slack() {
        let s = half_line(&[q(0, 1), q(3, 1), q(7, 1)]).unwrap();
        let c = check_annulus_inequality(&s, &q(1, 2), 1, 2, 1, 2).unwrap();
        assert_eq!(c.slack, -(q(1, 2) * q(8, 1)));
        assert!(!c.holds);
    }

    #[test]
    fn eps_range_enforced() {
        let s = half_line(&[q(0, 1), q(1, 1)]).unwrap();
        assert!(check_annulus_inequality(&s, &q(0, 1), 0, 1, 0, 1).is_err());
        assert!(check_annulus_inequality(&s, &q(1, 1), 0, 1, 0, 1).is_err());
    }

    #[test]
    fn far_points_satisfy_the_inequality() {
        let s = half_line(&[q(0, 1), q(5, 1), q(6, 1), q(100, 1), q(130, 1)]).unwrap();
        for (x, y) in [(3, 4), (4, 3), (3, 3)] {
            assert!(check_annulus_inequality(&s, &q(1, 2), 1, 2, x, y).unwrap().holds);
        }
    }

    #[test]
    fn overlapping_sets_are_reported() {
        let s = half_line(&[q(0, 1), q(1, 1), q(2, 1), q(3, 1)]).unwrap();
        let pairs = vec![
            AnnulusPair {
                u: 0,
                v: 1,
                set: vec![0, 1, 2],
            },
            AnnulusPair {
                u: 2,
                v: 3,
                set: vec![2, 3],
            },
        ];
        let r = check_annuli_hypothesis(&s, &pairs, &[q(1, 2), q(1, 2)], false).unwrap();
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, HypothesisViolation::Overlap { i: 0, j: 1, point: 2 })));
    }

    #[test]
    fn whole_space_set_is_vacuous() {
        let s = half_line(&[q(0, 1), q(1, 1), q(2, 1), q(50, 1)]).unwrap();
        let pairs = vec![AnnulusPair {
            u: 1,
            v: 2,
            set: vec![0, 1, 2],
        }];
        let r = check_annuli_hypothesis(&s, &pairs, &[q(9, 10)], true).unwrap();
        assert!(r.holds());
        assert_eq!(r.checked, 1);
    }

    #[test]
    fn two_anchor_family_search_small() {
        let s = build_two_anchor_space::<Rational>(6).unwrap();
        let (k, fam) = max_annuli_family(&s, &[q(1, 4)], 4).unwrap();
        assert_eq!(k, fam.len());
        let eps = vec![q(1, 4); k];
        let r = check_annuli_hypothesis(&s, &fam, &eps, false).unwrap();
        assert!(r.holds());
    }
}
