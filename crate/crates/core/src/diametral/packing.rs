use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A greedily chosen separated subfamily.
#[derive(Debug, Clone)]
pub struct PackingReport<T, S> {
    pub items: Vec<T>,
    /// Positions of `items` in the input list.
    pub indices: Vec<usize>,
    pub separation: S,
    /// Recomputed distances between the chosen items (zero diagonal).
    pub distances: Vec<Vec<S>>,
    pub certified: bool,
}

impl<T, S> PackingReport<T, S> {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Scans `items` in order and keeps each one that is at least `separation`
/// from everything kept so far. The kept family is then re-measured in both
/// directions and `certified` records whether every distance clears the bar.
pub fn greedy_packing<T: Clone, S: Scalar>(
    items: &[T],
    dist: impl Fn(&T, &T) -> Result<S>,
    separation: &S,
) -> Result<PackingReport<T, S>> {
    if separation.is_negative() {
        return Err(Error::Argument("separation must be nonnegative".into()));
    }
    let mut kept: Vec<usize> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let mut ok = true;
        for &j in &kept {
            if dist(&items[j], item)?.less_than(separation) {
                ok = false;
                break;
            }
        }
        if ok {
            kept.push(i);
        }
    }
    let mut distances = vec![vec![S::zero(); kept.len()]; kept.len()];
    let mut certified = true;
    for (a, &i) in kept.iter().enumerate() {
        for (b, &j) in kept.iter().enumerate() {
            if a != b {
                let d = dist(&items[i], &items[j])?;
                certified &= d.at_least(separation);
                distances[a][b] = d;
            }
        }
    }
    Ok(PackingReport {
        items: kept.iter().map(|&i| items[i].clone()).collect(),
        indices: kept,
        separation: separation.clone(),
        distances,
        certified,
    })
}
