use crate::error::{Error, Result};
use crate::lip::LipFunction;
use crate::optimizer::{min_cost_transport, solve_lip_ball, LipBallProgram, TransportPlan};
use crate::scalar::Scalar;

use super::{FreeElement, Molecule};

/// A free-space norm with both of its certificates.
#[derive(Debug, Clone)]
pub struct FreeNorm<S: Scalar> {
    pub value: S,
    /// Norm-one (or zero) function attaining the value.
    pub witness: LipFunction<S>,
    pub plan: TransportPlan<S>,
}

/// `||mu||` computed twice: as the Lipschitz-ball maximum and as the optimal
/// transport cost. The two must agree and the witness must attain them.
pub fn free_norm<S: Scalar>(mu: &FreeElement<S>) -> Result<FreeNorm<S>> {
    if !S::EXACT {
        // The norm is homogeneous; solving at unit weight scale keeps tiny
        // weights clear of the absolute tolerance floor.
        let largest = mu.weights().values().map(|w| w.to_f64().abs()).fold(0.0, f64::max);
        if largest > 0.0 && largest != 1.0 {
            let s = S::from_rational(&num_rational::BigRational::from_float(largest).expect("finite weight"));
            let inner = solve_norm(&mu.scale(&(S::one() / s.clone())))?;
            return Ok(FreeNorm {
                value: inner.value * s.clone(),
                witness: inner.witness,
                plan: TransportPlan {
                    flow: inner.plan.flow.into_iter().map(|(k, v)| (k, v * s.clone())).collect(),
                    cost: inner.plan.cost * s,
                },
            });
        }
    }
    solve_norm(mu)
}

fn solve_norm<S: Scalar>(mu: &FreeElement<S>) -> Result<FreeNorm<S>> {
    let program = LipBallProgram::new(mu.clone());
    let sol = solve_lip_ball(&program)?;
    sol.verify(&program)?;
    let value = sol.optimum()?.clone();
    let witness = sol.argument.expect("optimal solutions carry an argument");
    let plan = min_cost_transport(mu)?;
    plan.verify(mu)
        .map_err(|v| Error::Certificate(format!("transport plan invalid at point {}: {}", v.point, v.reason)))?;
    if !plan.cost.approx_eq(&value) {
        return Err(Error::Certificate(format!(
            "duality gap: ball maximum {} vs transport cost {}",
            value.render(),
            plan.cost.render()
        )));
    }
    let attained = witness.eval(mu)?;
    if !attained.approx_eq(&value) {
        return Err(Error::Certificate(format!(
            "witness attains {} instead of {}",
            attained.render(),
            value.render()
        )));
    }
    Ok(FreeNorm { value, witness, plan })
}

/// `||mu - nu||`.
pub fn free_dist<S: Scalar>(mu: &FreeElement<S>, nu: &FreeElement<S>) -> Result<S> {
    Ok(free_norm(&mu.sub(nu)?)?.value)
}

/// `(d(u,p) + d(q,v) + |d(u,v) - d(p,q)|) / max{d(u,v), d(p,q)}` for
/// `m1 = m_uv`, `m2 = m_pq`.
pub fn molecule_distance_formula<S: Scalar>(
    space: &crate::metric::FiniteMetricSpace<S>,
    m1: Molecule,
    m2: Molecule,
) -> S {
    let (u, v, p, q) = (m1.u, m1.v, m2.u, m2.v);
    let duv = space.dist(u, v).clone();
    let dpq = space.dist(p, q).clone();
    let num = space.dist(u, p).clone() + space.dist(q, v).clone() + (duv.clone() - dpq.clone()).abs();
    num / duv.max_of(dpq)
}
