//! Finitely supported elements of the free space over a finite pointed
//! metric space.

mod geometry;
mod norm;

pub use geometry::{all_molecules, delta_set_molecules, extreme_molecules, is_extreme_molecule, molecules_in_slice};
pub use norm::{free_dist, free_norm, molecule_distance_formula, FreeNorm};

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::scalar::Scalar;

/// `(delta_u - delta_v) / d(u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Molecule {
    pub u: usize,
    pub v: usize,
}

impl Molecule {
    pub fn new(u: usize, v: usize) -> Result<Self> {
        if u == v {
            return Err(Error::Argument(format!(
                "molecule needs distinct points, got {u} twice"
            )));
        }
        Ok(Self { u, v })
    }

    pub fn reversed(self) -> Self {
        Self { u: self.v, v: self.u }
    }

    pub fn to_element<S: Scalar>(self, space: &Arc<FiniteMetricSpace<S>>) -> FreeElement<S> {
        FreeElement::molecule(space.clone(), self.u, self.v)
    }
}

/// Weighted point masses with the base coordinate dropped.
#[derive(Clone)]
pub struct FreeElement<S> {
    space: Arc<FiniteMetricSpace<S>>,
    weights: BTreeMap<usize, S>,
}

impl<S: Scalar> PartialEq for FreeElement<S> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space) && self.weights == other.weights
    }
}

impl<S: Scalar> std::fmt::Debug for FreeElement<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map()
            .entries(self.weights.iter().map(|(&p, w)| (self.space.label(p), w.render())))
            .finish()
    }
}

impl<S: Scalar> FreeElement<S> {
    pub fn zero(space: Arc<FiniteMetricSpace<S>>) -> Self {
        Self {
            space,
            weights: BTreeMap::new(),
        }
    }

    /// Builds from arbitrary weights; the base weight and zeros are dropped.
    pub fn from_weights(
        space: Arc<FiniteMetricSpace<S>>,
        weights: impl IntoIterator<Item = (usize, S)>,
    ) -> Result<Self> {
        let mut out = Self::zero(space);
        for (p, w) in weights {
            out.space.check_point(p)?;
            out.add_weight(p, w);
        }
        Ok(out)
    }

    pub fn delta(space: Arc<FiniteMetricSpace<S>>, p: usize) -> Self {
        let mut out = Self::zero(space);
        out.add_weight(p, S::one());
        out
    }

    /// `m_uv`; panics if `u == v`.
    pub fn molecule(space: Arc<FiniteMetricSpace<S>>, u: usize, v: usize) -> Self {
        assert_ne!(u, v, "molecule needs distinct points");
        let inv = S::one() / space.dist(u, v).clone();
        let mut out = Self::zero(space);
        out.add_weight(u, inv.clone());
        out.add_weight(v, -inv);
        out
    }

    fn add_weight(&mut self, p: usize, w: S) {
        if p == self.space.base() {
            return;
        }
        let entry = self.weights.entry(p).or_insert_with(S::zero);
        let scale = entry.to_f64().abs().max(w.to_f64().abs());
        *entry = entry.clone() + w;
        // Cancellation is judged against the summands, so small weights on
        // spaces with large distances survive in float mode.
        let cancelled = if S::EXACT {
            entry.is_zero_tol()
        } else {
            entry.to_f64().abs() <= S::tolerance() * scale
        };
        if cancelled {
            self.weights.remove(&p);
        }
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace<S>> {
        &self.space
    }

    pub fn weights(&self) -> &BTreeMap<usize, S> {
        &self.weights
    }

    pub fn weight(&self, p: usize) -> S {
        self.weights.get(&p).cloned().unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.keys().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn ensure_same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space {
            Ok(())
        } else {
            Err(Error::Structure("free elements live on different spaces".into()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_space(other)?;
        let mut out = self.clone();
        for (&p, w) in &other.weights {
            out.add_weight(p, w.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = Self::zero(self.space.clone());
        for (&p, w) in &self.weights {
            out.add_weight(p, w.clone() * c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// Dense coefficient vector over all points (base entry zero).
    pub fn dense(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.space.len()];
        for (&p, w) in &self.weights {
            out[p] = w.clone();
        }
        out
    }

    /// `sum_p w_p f(p)` for raw values `f`.
    pub fn pair_with(&self, values: &[S]) -> S {
        self.weights
            .iter()
            .fold(S::zero(), |acc, (&p, w)| acc + w.clone() * values[p].clone())
    }
}
