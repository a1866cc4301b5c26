//! Slice diagnostics: packings, separated chains, Delta and Daugavet radii,
//! and the disjoint-annuli verifier.

mod annuli;
mod chain;
mod packing;
mod radius;

pub use annuli::{annuli_battery, verify_separated_annuli};
pub use chain::{build_separated_chain, delta_score_free, DeltaScore, SeparatedChain};
pub use packing::{greedy_packing, PackingReport};
pub use radius::{wstar_daugavet_profile, wstar_delta_radius, WstarRadius};

use crate::error::{Error, Result};
use crate::free::{free_norm, FreeElement};
use crate::lip::LipFunction;
use crate::scalar::Scalar;

/// The functional defining a slice.
#[derive(Debug, Clone)]
pub enum SliceSide<S: Scalar> {
    /// Slice of the free-space ball by a norm-one Lipschitz function.
    Free(LipFunction<S>),
    /// w*-slice of the Lipschitz ball by a norm-one free element.
    Lip(FreeElement<S>),
}

/// `{y in the ball : functional(y) > 1 - alpha}`.
#[derive(Debug, Clone)]
pub struct SliceSpec<S: Scalar> {
    pub side: SliceSide<S>,
    pub alpha: S,
}

fn check_alpha<S: Scalar>(alpha: &S) -> Result<()> {
    if alpha.is_positive() && alpha.at_most(&S::from_int(2)) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "slice depth must lie in (0, 2], got {}",
            alpha.render()
        )))
    }
}

impl<S: Scalar> SliceSpec<S> {
    pub fn free(f: LipFunction<S>, alpha: S) -> Result<Self> {
        check_alpha(&alpha)?;
        if !f.norm().approx_eq(&S::one()) {
            return Err(Error::Argument(format!(
                "slice functional has norm {}",
                f.norm().render()
            )));
        }
        Ok(Self {
            side: SliceSide::Free(f),
            alpha,
        })
    }

    pub fn lip(mu: FreeElement<S>, alpha: S) -> Result<Self> {
        check_alpha(&alpha)?;
        let norm = free_norm(&mu)?.value;
        if !norm.approx_eq(&S::one()) {
            return Err(Error::Argument(format!("slice functional has norm {}", norm.render())));
        }
        Ok(Self {
            side: SliceSide::Lip(mu),
            alpha,
        })
    }

    pub fn level(&self) -> S {
        S::one() - self.alpha.clone()
    }

    /// The defining function of a free-side slice.
    pub fn function(&self) -> Result<&LipFunction<S>> {
        match &self.side {
            SliceSide::Free(f) => Ok(f),
            SliceSide::Lip(_) => Err(Error::Argument("expected a slice of the free-space ball".into())),
        }
    }

    /// Membership of a free element (free side): `||x|| <= 1` and
    /// `f(x) > 1 - alpha`.
    pub fn contains_element(&self, x: &FreeElement<S>) -> Result<bool> {
        let f = self.function()?;
        if !f.eval(x)?.greater_than(&self.level()) {
            return Ok(false);
        }
        Ok(free_norm(x)?.value.at_most(&S::one()))
    }

    /// Membership of a function (Lipschitz side): `||g|| <= 1` and
    /// `mu(g) > 1 - alpha`.
    pub fn contains_function(&self, g: &LipFunction<S>) -> Result<bool> {
        match &self.side {
            SliceSide::Lip(mu) => Ok(g.norm().at_most(&S::one()) && g.eval(mu)?.greater_than(&self.level())),
            SliceSide::Free(_) => Err(Error::Argument("expected a w*-slice of the Lipschitz ball".into())),
        }
    }
}
