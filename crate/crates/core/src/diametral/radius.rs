use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free::{free_norm, FreeElement};
use crate::lip::LipFunction;
use crate::optimizer::{solve_lip_ball, LipBallProgram, LpStatus, SideConstraint};
use crate::scalar::Scalar;

/// `sup ||f - g||` over the closed w*-slice, with a maximizing `g` and the
/// pair `(p, q)` on which `(f - g)(m_pq)` attains it.
#[derive(Debug, Clone)]
pub struct WstarRadius<S: Scalar> {
    pub value: S,
    pub g: LipFunction<S>,
    pub pair: (usize, usize),
    pub programs: usize,
}

fn ensure_norm_one<S: Scalar>(mu: &FreeElement<S>) -> Result<()> {
    let norm = free_norm(mu)?.value;
    if norm.approx_eq(&S::one()) {
        Ok(())
    } else {
        Err(Error::Argument(format!("slice functional has norm {}", norm.render())))
    }
}

/// Largest `||f - g||` over `g` in the ball with `mu(g) >= 1 - alpha`.
///
/// For every ordered pair `(p, q)` this solves `max g(m_qp)` over the
/// slice, giving `f(m_pq) + max g(m_qp)`. Pairs are visited in decreasing
/// order of the bound `f(m_pq) + 1`, and the scan stops once no remaining
/// pair can reach the best value; the reported pair is the first maximizer
/// in that order.
fn radius_unchecked<S: Scalar>(f: &LipFunction<S>, mu: &FreeElement<S>, alpha: &S) -> Result<WstarRadius<S>> {
    f.ensure_same_space(mu.space())?;
    let space = f.space().clone();
    let level = S::one() - alpha.clone();
    let mut order: Vec<((usize, usize), S)> = space
        .ordered_pairs()
        .map(|(p, q)| ((p, q), f.molecule_value(p, q)))
        .collect();
    order.sort_by(|a, b| b.1.compare(&a.1).then(a.0.cmp(&b.0)));
    let chunk = 32;
    let mut best: Option<(S, LipFunction<S>, (usize, usize))> = None;
    let mut programs = 0;
    for batch in order.chunks(chunk) {
        if let Some((b, _, _)) = &best {
            if (batch[0].1.clone() + S::one()).at_most(b) {
                break;
            }
        }
        let solved: Vec<Result<Option<(S, LipFunction<S>)>>> = batch
            .par_iter()
            .map(|((p, q), fv)| {
                let program = LipBallProgram::new(FreeElement::molecule(space.clone(), *q, *p))
                    .with_constraint(SideConstraint::at_least(mu.clone(), level.clone()));
                let sol = solve_lip_ball(&program)?;
                sol.verify(&program)?;
                Ok(match sol.status {
                    LpStatus::Optimal => {
                        let v = fv.clone() + sol.optimum()?.clone();
                        Some((v, sol.argument.expect("optimal solutions carry an argument")))
                    }
                    _ => None,
                })
            })
            .collect();
        programs += batch.len();
        for (((p, q), _), r) in batch.iter().zip(solved) {
            if let Some((v, g)) = r? {
                if best.as_ref().is_none_or(|(b, _, _)| v.greater_than(b)) {
                    best = Some((v, g, (*p, *q)));
                }
            }
        }
    }
    let (value, g, pair) = best.ok_or_else(|| Error::Argument("the slice is empty".into()))?;
    Ok(WstarRadius {
        value,
        g,
        pair,
        programs,
    })
}

/// Diametral radius of the w*-slice `{g : mu(g) > 1 - alpha}` at `f`,
/// computed over its closure. Requires `f` in the slice.
pub fn wstar_delta_radius<S: Scalar>(f: &LipFunction<S>, mu: &FreeElement<S>, alpha: &S) -> Result<WstarRadius<S>> {
    if !f.norm().approx_eq(&S::one()) {
        return Err(Error::Argument(format!("f has norm {}", f.norm().render())));
    }
    if !alpha.is_positive() || alpha.greater_than(&S::from_int(2)) {
        return Err(Error::Argument("alpha must lie in (0, 2]".into()));
    }
    ensure_norm_one(mu)?;
    if !f.eval(mu)?.greater_than(&(S::one() - alpha.clone())) {
        return Err(Error::precondition("f is not in the slice", mu.support().collect()));
    }
    radius_unchecked(f, mu, alpha)
}

/// Radius at `f` of every slice in `family`, membership not required.
pub fn wstar_daugavet_profile<S: Scalar>(
    f: &LipFunction<S>,
    family: &[(FreeElement<S>, S)],
) -> Result<Vec<WstarRadius<S>>> {
    family
        .iter()
        .map(|(mu, alpha)| {
            if !alpha.is_positive() || alpha.greater_than(&S::from_int(2)) {
                return Err(Error::Argument("alpha must lie in (0, 2]".into()));
            }
            ensure_norm_one(mu)?;
            radius_unchecked(f, mu, alpha)
        })
        .collect()
}
