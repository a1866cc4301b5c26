use serde::{Deserialize, Serialize};

use crate::diametral::greedy_packing;
use crate::error::{Error, Result};
use crate::free::{free_dist, molecules_in_slice, Molecule};
use crate::lip::LipFunction;
use crate::scalar::Scalar;

/// Slices with more molecules than this are packed on a prefix only.
const PACKING_CAP: usize = 64;

/// One row of the scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRow {
    pub eps: String,
    pub slice_molecules: usize,
    pub min_pair_distance: Option<String>,
    pub max_base_distance: Option<String>,
    /// A slice molecule with `d(u,v) <= eps`.
    pub small_pair: Option<[String; 2]>,
    /// A slice molecule with both endpoints at distance `>= R` from the base.
    pub escaping: Option<[String; 2]>,
    /// Size of a greedy packing of slice molecules at mutual distance `>= 1`.
    pub packing: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyScan {
    pub radius: String,
    pub mode: String,
    pub rows: Vec<DichotomyRow>,
}

impl DichotomyScan {
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("eps,slice_molecules,min_pair_distance,max_base_distance,small_pair,escaping,packing\n");
        let pair = |p: &Option<[String; 2]>| p.as_ref().map(|[a, b]| format!("{a}-{b}")).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.eps,
                r.slice_molecules,
                r.min_pair_distance.clone().unwrap_or_default(),
                r.max_base_distance.clone().unwrap_or_default(),
                pair(&r.small_pair),
                pair(&r.escaping),
                r.packing
            ));
        }
        out
    }
}

/// For each `eps`, classifies the molecules in the slice `S(f, eps)` by
/// pair distance and distance from the base. A finite diagnostic only.
pub fn scan_dichotomy<S: Scalar>(f: &LipFunction<S>, eps_grid: &[S], radius: &S) -> Result<DichotomyScan> {
    if !f.norm().approx_eq(&S::one()) {
        return Err(Error::Argument(format!(
            "f must have norm 1, got {}",
            f.norm().render()
        )));
    }
    let space = f.space();
    let base = space.base();
    let labels = |m: &Molecule| [space.label(m.u).to_string(), space.label(m.v).to_string()];
    let mut rows = Vec::with_capacity(eps_grid.len());
    for eps in eps_grid {
        let slice = molecules_in_slice(f, eps)?;
        let min_pair = slice
            .iter()
            .min_by(|a, b| space.dist(a.u, a.v).compare(space.dist(b.u, b.v)));
        let far = |m: &Molecule| space.dist(base, m.u).clone().max_of(space.dist(base, m.v).clone());
        let max_base = slice.iter().map(far).reduce(|a, b| a.max_of(b));
        let small_pair = slice.iter().find(|m| space.dist(m.u, m.v).at_most(eps)).map(labels);
        let escaping = slice
            .iter()
            .find(|m| space.dist(base, m.u).at_least(radius) && space.dist(base, m.v).at_least(radius))
            .map(labels);
        let pool: Vec<Molecule> = slice.iter().copied().take(PACKING_CAP).collect();
        let packing = greedy_packing(
            &pool,
            |a, b| free_dist(&a.to_element(space), &b.to_element(space)),
            &S::one(),
        )?;
        rows.push(DichotomyRow {
            eps: eps.render(),
            slice_molecules: slice.len(),
            min_pair_distance: min_pair.map(|m| space.dist(m.u, m.v).render()),
            max_base_distance: max_base.map(|d| d.render()),
            small_pair,
            escaping,
            packing: packing.len(),
        });
    }
    Ok(DichotomyScan {
        radius: radius.render(),
        mode: S::MODE.to_string(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::half_line;
    use crate::scalar::Rational;
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn half_line_escapes() {
        let coords: Vec<Rational> = (0..=8).map(|k| q(k, 1)).collect();
        let s = Arc::new(half_line(&coords).unwrap());
        let f = LipFunction::distance_to_base(s);
        let scan = scan_dichotomy(&f, &[q(1, 2), q(1, 10)], &q(5, 1)).unwrap();
        for row in &scan.rows {
            assert!(row.escaping.is_some());
            assert!(row.small_pair.is_none());
        }
        assert!(scan.to_csv().lines().count() == 3);
    }

    #[test]
    fn single_molecule_neither() {
        let s = Arc::new(half_line(&[q(0, 1), q(10, 1), q(30, 1)]).unwrap());
        let f = LipFunction::new(s, vec![q(0, 1), q(0, 1), q(-20, 1)]).unwrap();
        let scan = scan_dichotomy(&f, &[q(1, 100)], &q(100, 1)).unwrap();
        let row = &scan.rows[0];
        assert!(row.small_pair.is_none() && row.escaping.is_none());
    }
}
