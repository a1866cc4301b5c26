//! Lipschitz functions on a finite pointed metric space.

mod constructions;
mod extension;

pub use constructions::{
    annulus_case_extension, daugavet_recursive_construction, delta_hat_family, is_eps_local, locality_profile,
    nearest_point_function, slice_flatten, tail_plateau, AnnulusCase, DaugavetConstruction, DaugavetStage, HatFamily,
    LocalityEntry,
};
pub use extension::{flatten_at_point, mcshane_extend, Direction};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::{FreeElement, Molecule};
use crate::metric::FiniteMetricSpace;
use crate::scalar::Scalar;

/// Largest `|f(p) - f(q)| / d(p,q)` over pairs, with one maximizing pair.
pub fn lipschitz_constant<S: Scalar>(space: &FiniteMetricSpace<S>, values: &[S]) -> (S, Option<(usize, usize)>) {
    let mut best = S::zero();
    let mut arg = None;
    for p in space.points() {
        for q in p + 1..space.len() {
            let slope = (values[p].clone() - values[q].clone()).abs() / space.dist(p, q).clone();
            if slope.greater_than(&best) {
                best = slope;
                arg = Some(if values[p] >= values[q] { (p, q) } else { (q, p) });
            }
        }
    }
    (best, arg)
}

/// Real values on every point, not necessarily vanishing at the base.
#[derive(Clone, PartialEq)]
pub struct PointFunction<S> {
    space: Arc<FiniteMetricSpace<S>>,
    values: Vec<S>,
}

impl<S: Scalar> std::fmt::Debug for PointFunction<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.values.iter().map(|v| v.render())).finish()
    }
}

impl<S: Scalar> PointFunction<S> {
    pub fn new(space: Arc<FiniteMetricSpace<S>>, values: Vec<S>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Structure(format!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace<S>> {
        &self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, p: usize) -> &S {
        &self.values[p]
    }

    pub fn lip_constant(&self) -> S {
        lipschitz_constant(&self.space, &self.values).0
    }

    /// Shifts by `-f(base)`; molecule values are unchanged.
    pub fn normalized(&self) -> LipFunction<S> {
        let shift = self.values[self.space.base()].clone();
        let values = self.values.iter().map(|v| v.clone() - shift.clone()).collect();
        LipFunction::from_values_unchecked(self.space.clone(), values)
    }
}

/// A function vanishing at the base point, with its Lipschitz norm cached.
#[derive(Clone)]
pub struct LipFunction<S> {
    space: Arc<FiniteMetricSpace<S>>,
    values: Vec<S>,
    norm: S,
    norming_pair: Option<(usize, usize)>,
}

impl<S: Scalar> PartialEq for LipFunction<S> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space) && self.values == other.values
    }
}

impl<S: Scalar> std::fmt::Debug for LipFunction<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LipFunction")
            .field("values", &self.values.iter().map(|v| v.render()).collect::<Vec<_>>())
            .field("norm", &self.norm.render())
            .finish()
    }
}

impl<S: Scalar> LipFunction<S> {
    /// Requires `values[base] = 0`.
    pub fn new(space: Arc<FiniteMetricSpace<S>>, values: Vec<S>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Structure(format!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        if !values[space.base()].is_zero_tol() {
            return Err(Error::Argument(format!(
                "value at base {} is {}, expected 0",
                space.label(space.base()),
                values[space.base()].render()
            )));
        }
        Ok(Self::from_values_unchecked(space, values))
    }

    pub(crate) fn from_values_unchecked(space: Arc<FiniteMetricSpace<S>>, mut values: Vec<S>) -> Self {
        values[space.base()] = S::zero();
        let (norm, norming_pair) = lipschitz_constant(&space, &values);
        Self {
            space,
            values,
            norm,
            norming_pair,
        }
    }

    pub fn zero(space: Arc<FiniteMetricSpace<S>>) -> Self {
        let values = vec![S::zero(); space.len()];
        Self::from_values_unchecked(space, values)
    }

    /// `p -> d(base, p)`.
    pub fn distance_to_base(space: Arc<FiniteMetricSpace<S>>) -> Self {
        let values = space.points().map(|p| space.dist_to_base(p).clone()).collect();
        Self::from_values_unchecked(space, values)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace<S>> {
        &self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, p: usize) -> &S {
        &self.values[p]
    }

    /// Cached Lipschitz norm.
    pub fn norm(&self) -> &S {
        &self.norm
    }

    /// A pair `(p, q)` with `f(m_pq) = ||f||`, if `f` is not constant.
    pub fn norming_pair(&self) -> Option<(usize, usize)> {
        self.norming_pair
    }

    /// `(f(u) - f(v)) / d(u, v)`.
    pub fn molecule_value(&self, u: usize, v: usize) -> S {
        (self.values[u].clone() - self.values[v].clone()) / self.space.dist(u, v).clone()
    }

    pub fn eval_molecule(&self, m: &Molecule) -> S {
        self.molecule_value(m.u, m.v)
    }

    /// Duality pairing with a free element.
    pub fn eval(&self, mu: &FreeElement<S>) -> Result<S> {
        self.ensure_same_space(mu.space())?;
        Ok(mu
            .weights()
            .iter()
            .fold(S::zero(), |acc, (&p, w)| acc + w.clone() * self.values[p].clone()))
    }

    pub(crate) fn ensure_same_space(&self, other: &Arc<FiniteMetricSpace<S>>) -> Result<()> {
        if Arc::ptr_eq(&self.space, other) || *self.space == **other {
            Ok(())
        } else {
            Err(Error::Structure("function and element live on different spaces".into()))
        }
    }

    fn zip(&self, other: &Self, op: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.ensure_same_space(&other.space)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(a, b)).collect();
        Ok(Self::from_values_unchecked(self.space.clone(), values))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, c: &S) -> Self {
        let values = self.values.iter().map(|v| v.clone() * c.clone()).collect();
        Self::from_values_unchecked(self.space.clone(), values)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-S::one())
    }

    /// `||f - g||`.
    pub fn dist(&self, other: &Self) -> Result<S> {
        Ok(self.sub(other)?.norm)
    }

    /// Divides by the norm; errors on the zero function.
    pub fn normalize(&self) -> Result<Self> {
        if self.norm.is_zero_tol() {
            return Err(Error::Argument("cannot normalize a constant function".into()));
        }
        Ok(self.scale(&(S::one() / self.norm.clone())))
    }

    pub fn to_point_function(&self) -> PointFunction<S> {
        PointFunction {
            space: self.space.clone(),
            values: self.values.clone(),
        }
    }

    /// Re-checks `|f(p) - f(q)| <= L d(p,q)` on every pair; returns a
    /// violating pair if any.
    pub fn lipschitz_violation(&self, l: &S) -> Option<(usize, usize)> {
        for p in self.space.points() {
            for q in p + 1..self.space.len() {
                let lhs = (self.values[p].clone() - self.values[q].clone()).abs();
                if lhs.greater_than(&(l.clone() * self.space.dist(p, q).clone())) {
                    return Some((p, q));
                }
            }
        }
        None
    }
}

/// `||f||`, exact pairwise maximum.
pub fn lip_norm<S: Scalar>(f: &LipFunction<S>) -> S {
    f.norm().clone()
}

/// `(f(u) - f(v)) / d(u,v)`.
pub fn eval_molecule<S: Scalar>(f: &LipFunction<S>, m: &Molecule) -> S {
    f.eval_molecule(m)
}
