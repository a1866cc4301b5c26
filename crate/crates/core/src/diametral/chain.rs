use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free::{free_dist, free_norm, molecules_in_slice, FreeElement, Molecule};
use crate::lip::LipFunction;
use crate::scalar::Scalar;

use super::SliceSpec;

/// Elements of one slice that are pairwise far apart, each with the
/// functional that separated it from the center.
#[derive(Debug, Clone)]
pub struct SeparatedChain<S: Scalar> {
    pub center: FreeElement<S>,
    pub alpha: S,
    /// `elements[0]` is the center.
    pub elements: Vec<FreeElement<S>>,
    pub molecules: Vec<Option<Molecule>>,
    /// `functionals[0]` is the slice function; later entries norm
    /// `center - elements[i]`.
    pub functionals: Vec<LipFunction<S>>,
    pub distances: Vec<Vec<S>>,
    /// Smallest pairwise distance, if the chain has two or more elements.
    pub separation: Option<S>,
    pub verified: bool,
}

impl<S: Scalar> SeparatedChain<S> {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

fn in_slice<S: Scalar>(slice: &SliceSpec<S>, x: &FreeElement<S>) -> Result<bool> {
    slice.contains_element(x)
}

/// Grows a chain from `center` inside a free-side slice. Each step sums the
/// functionals found so far, ranks the slice molecules by that sum, and
/// takes the first one at distance at least `2 - alpha - tol` from every
/// chain element. Stops at `max_len` or when no molecule qualifies.
pub fn build_separated_chain<S: Scalar>(
    center: &FreeElement<S>,
    slice: &SliceSpec<S>,
    max_len: usize,
    tol: &S,
) -> Result<SeparatedChain<S>> {
    let f = slice.function()?.clone();
    f.ensure_same_space(center.space())?;
    if !in_slice(slice, center)? {
        return Err(Error::precondition(
            "center is not in the slice",
            center.support().collect(),
        ));
    }
    let space = center.space().clone();
    let target = S::from_int(2) - slice.alpha.clone() - tol.clone();
    let mut elements = vec![center.clone()];
    let mut molecules: Vec<Option<Molecule>> = vec![None];
    let mut functionals = vec![f.clone()];
    let mut pool: Vec<(Molecule, FreeElement<S>)> = molecules_in_slice(&f, &slice.alpha)?
        .into_iter()
        .map(|m| (m, m.to_element(&space)))
        .filter(|(_, e)| e != center)
        .collect();
    while elements.len() < max_len.max(1) && !pool.is_empty() {
        let mut aggregate = LipFunction::zero(space.clone());
        for g in &functionals {
            aggregate = aggregate.add(g)?;
        }
        pool.sort_by(|a, b| {
            aggregate
                .eval_molecule(&b.0)
                .compare(&aggregate.eval_molecule(&a.0))
                .then(a.0.cmp(&b.0))
        });
        // A candidate too close to some chain element stays too close, so
        // rejected candidates are dropped for good.
        let mut chosen = None;
        while let Some((_, elem)) = pool.first() {
            let mut far = true;
            for prev in &elements {
                if free_dist(prev, elem)?.less_than(&target) {
                    far = false;
                    break;
                }
            }
            if far {
                chosen = Some(pool.remove(0));
                break;
            }
            pool.remove(0);
        }
        let Some((m, elem)) = chosen else { break };
        let witness = free_norm(&center.sub(&elem)?)?.witness;
        elements.push(elem);
        molecules.push(Some(m));
        functionals.push(witness);
    }
    let n = elements.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let measured: Vec<Result<S>> = pairs
        .par_iter()
        .map(|&(i, j)| free_dist(&elements[i], &elements[j]))
        .collect();
    let mut distances = vec![vec![S::zero(); n]; n];
    let mut separation: Option<S> = None;
    for (&(i, j), d) in pairs.iter().zip(measured) {
        let d = d?;
        separation = Some(match separation {
            None => d.clone(),
            Some(s) => s.min_of(d.clone()),
        });
        distances[i][j] = d.clone();
        distances[j][i] = d;
    }
    let mut verified = separation.as_ref().is_none_or(|s| s.at_least(&target));
    for e in &elements {
        verified &= in_slice(slice, e)?;
    }
    Ok(SeparatedChain {
        center: center.clone(),
        alpha: slice.alpha.clone(),
        elements,
        molecules,
        functionals,
        distances,
        separation,
        verified,
    })
}

/// Farthest slice molecule from `mu`, with the shortest pair length among
/// slice molecules.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaScore<S> {
    pub value: S,
    pub molecule: Option<Molecule>,
    pub min_pair_distance: Option<S>,
    pub slice_molecules: usize,
}

/// Largest `||mu - m||` over molecules `m` in the slice.
pub fn delta_score_free<S: Scalar>(mu: &FreeElement<S>, slice: &SliceSpec<S>) -> Result<DeltaScore<S>> {
    let f = slice.function()?;
    f.ensure_same_space(mu.space())?;
    if !f.eval(mu)?.greater_than(&slice.level()) {
        return Err(Error::precondition(
            "element is not in the slice",
            mu.support().collect(),
        ));
    }
    let norm = free_norm(mu)?.value;
    if !norm.approx_eq(&S::one()) {
        return Err(Error::Argument(format!("element has norm {}", norm.render())));
    }
    let space = mu.space();
    let ms = molecules_in_slice(f, &slice.alpha)?;
    let dists: Vec<Result<S>> = ms.par_iter().map(|m| free_dist(mu, &m.to_element(space))).collect();
    let mut value = S::zero();
    let mut molecule = None;
    for (m, d) in ms.iter().zip(dists) {
        let d = d?;
        if molecule.is_none() || d.greater_than(&value) {
            value = d;
            molecule = Some(*m);
        }
    }
    let min_pair_distance = ms
        .iter()
        .map(|m| space.dist(m.u, m.v).clone())
        .reduce(|a, b| a.min_of(b));
    Ok(DeltaScore {
        value,
        molecule,
        min_pair_distance,
        slice_molecules: ms.len(),
    })
}
