use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lip::LipFunction;
use crate::metric::FiniteMetricSpace;
use crate::optimizer::{solve_standard, Column, Outcome, StandardForm};
use crate::scalar::Scalar;

use super::{free_dist, free_norm, FreeElement, Molecule};

/// Every ordered molecule, lexicographic in `(u, v)`.
pub fn all_molecules<S: Scalar>(space: &FiniteMetricSpace<S>) -> Vec<Molecule> {
    space.ordered_pairs().map(|(u, v)| Molecule { u, v }).collect()
}

/// LP test: `m` is a vertex of the molecule hull iff it is not a convex
/// combination of the other molecules.
pub fn is_extreme_molecule<S: Scalar>(space: &FiniteMetricSpace<S>, m: Molecule) -> Result<bool> {
    space.check_point(m.u)?;
    space.check_point(m.v)?;
    let rows_of: Vec<Option<usize>> = {
        let mut next = 0;
        space
            .points()
            .map(|p| {
                (p != space.base()).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let dim = space.len() - 1;
    let coords = |mol: Molecule| -> Vec<(usize, S)> {
        let inv = S::one() / space.dist(mol.u, mol.v).clone();
        let mut e = Vec::new();
        if let Some(r) = rows_of[mol.u] {
            e.push((r, inv.clone()));
        }
        if let Some(r) = rows_of[mol.v] {
            e.push((r, -inv));
        }
        e
    };
    let columns = all_molecules(space)
        .into_iter()
        .filter(|&k| k != m)
        .map(|k| {
            let mut entries = coords(k);
            entries.push((dim, S::one()));
            Column {
                entries,
                cost: S::zero(),
            }
        })
        .collect();
    let mut rhs = vec![S::zero(); dim + 1];
    for (r, v) in coords(m) {
        rhs[r] = v;
    }
    rhs[dim] = S::one();
    let lp = StandardForm {
        rows: dim + 1,
        columns,
        rhs,
    };
    Ok(matches!(solve_standard(&lp)?, Outcome::Infeasible))
}

/// Molecules that are vertices of the unit ball.
pub fn extreme_molecules<S: Scalar>(space: &FiniteMetricSpace<S>) -> Result<Vec<Molecule>> {
    let candidates = all_molecules(space);
    let flags: Vec<Result<bool>> = candidates.par_iter().map(|&m| is_extreme_molecule(space, m)).collect();
    let mut out = Vec::new();
    for (m, f) in candidates.into_iter().zip(flags) {
        if f? {
            out.push(m);
        }
    }
    Ok(out)
}

fn check_unit<S: Scalar>(norm: &S, what: &str) -> Result<()> {
    if norm.approx_eq(&S::one()) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "{what} must have norm 1, got {}",
            norm.render()
        )))
    }
}

/// Molecules `m` with `f(m) > 1 - alpha`.
pub fn molecules_in_slice<S: Scalar>(f: &LipFunction<S>, alpha: &S) -> Result<Vec<Molecule>> {
    check_unit(f.norm(), "slice functional")?;
    if !alpha.is_positive() || alpha.greater_than(&S::from_int(2)) {
        return Err(Error::Argument("slice depth must lie in (0, 2]".into()));
    }
    let level = S::one() - alpha.clone();
    Ok(all_molecules(f.space())
        .into_iter()
        .filter(|m| f.eval_molecule(m).greater_than(&level))
        .collect())
}

/// Molecules at distance at least `2 - eps` from `x`.
pub fn delta_set_molecules<S: Scalar>(x: &FreeElement<S>, eps: &S) -> Result<Vec<Molecule>> {
    check_unit(&free_norm(x)?.value, "element")?;
    if !eps.is_positive() || eps.greater_than(&S::from_int(2)) {
        return Err(Error::Argument("eps must lie in (0, 2]".into()));
    }
    let space: &Arc<FiniteMetricSpace<S>> = x.space();
    let level = S::from_int(2) - eps.clone();
    let candidates = all_molecules(space);
    let dists: Vec<Result<S>> = candidates
        .par_iter()
        .map(|m| free_dist(x, &m.to_element(space)))
        .collect();
    let mut out = Vec::new();
    for (m, d) in candidates.into_iter().zip(dists) {
        if d?.at_least(&level) {
            out.push(m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::half_line;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn two_points_both_extreme() {
        let s = half_line(&[q(0, 1), q(1, 1)]).unwrap();
        assert_eq!(extreme_molecules(&s).unwrap().len(), 2);
    }

    #[test]
    fn midpoint_breaks_extremality() {
        let s = half_line(&[q(0, 1), q(1, 1), q(2, 1)]).unwrap();
        let ext = extreme_molecules(&s).unwrap();
        assert!(!ext.contains(&Molecule { u: 0, v: 2 }));
        assert!(!ext.contains(&Molecule { u: 2, v: 0 }));
        assert!(ext.contains(&Molecule { u: 0, v: 1 }));
        assert_eq!(ext.len(), 4);
    }

    #[test]
    fn slice_at_full_depth_is_positive_part() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(3, 1)]).unwrap());
        let f = LipFunction::distance_to_base(s.clone());
        let all = molecules_in_slice(&f, &q(2, 1)).unwrap();
        let positive: Vec<Molecule> = all_molecules(&s)
            .into_iter()
            .filter(|m| f.eval_molecule(m).is_positive())
            .collect();
        assert_eq!(all, positive);
        assert!(molecules_in_slice(&f.scale(&q(1, 2)), &q(1, 1)).is_err());
    }

    #[test]
    fn delta_set_contains_reverse_molecule() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(3, 1), q(4, 1)]).unwrap());
        let x = FreeElement::molecule(s.clone(), 1, 2);
        let set = delta_set_molecules(&x, &q(1, 100)).unwrap();
        assert!(set.contains(&Molecule { u: 2, v: 1 }));
        assert_eq!(delta_set_molecules(&x, &q(2, 1)).unwrap().len(), 12);
    }
}
