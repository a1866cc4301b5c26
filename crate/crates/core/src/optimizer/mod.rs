//! Linear programs over the Lipschitz unit ball.
//!
//! A [`LipBallProgram`] maximizes `<objective, f>` over functions with
//! `f(base) = 0`, `f(p) - f(q) <= d(p,q)` for every ordered pair, and any
//! number of side constraints `<functional, f> >= b` or `<= b`. It is solved
//! through its dual, a transshipment problem with one column per arc and one
//! per side constraint, starting from the basis that ships every point's
//! mass straight to or from the base. The optimal simplex multipliers are
//! the maximizing function, and the optimal flow is returned as a
//! certificate that [`LpSolution::verify`] checks without trusting the
//! solver.

mod simplex;
mod transport;

pub(crate) use simplex::{solve as solve_standard, Column, Outcome, StandardForm};
pub use transport::{min_cost_transport, PlanViolation, TransportPlan};

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free::FreeElement;
use crate::lip::LipFunction;
use crate::metric::FiniteMetricSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone)]
pub struct SideConstraint<S: Scalar> {
    pub functional: FreeElement<S>,
    pub relation: Relation,
    pub bound: S,
}

impl<S: Scalar> SideConstraint<S> {
    pub fn at_least(functional: FreeElement<S>, bound: S) -> Self {
        Self {
            functional,
            relation: Relation::AtLeast,
            bound,
        }
    }

    pub fn at_most(functional: FreeElement<S>, bound: S) -> Self {
        Self {
            functional,
            relation: Relation::AtMost,
            bound,
        }
    }

    fn holds(&self, values: &[S]) -> bool {
        let lhs = self.functional.pair_with(values);
        match self.relation {
            Relation::AtLeast => lhs.at_least(&self.bound),
            Relation::AtMost => lhs.at_most(&self.bound),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LipBallProgram<S: Scalar> {
    pub space: Arc<FiniteMetricSpace<S>>,
    pub objective: FreeElement<S>,
    pub side: Vec<SideConstraint<S>>,
}

impl<S: Scalar> LipBallProgram<S> {
    pub fn new(objective: FreeElement<S>) -> Self {
        Self {
            space: objective.space().clone(),
            objective,
            side: Vec::new(),
        }
    }

    pub fn with_constraint(mut self, c: SideConstraint<S>) -> Self {
        self.side.push(c);
        self
    }

    fn check(&self) -> Result<()> {
        let probe = FreeElement::zero(self.space.clone());
        probe.ensure_same_space(&self.objective)?;
        for c in &self.side {
            probe.ensure_same_space(&c.functional)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Nonnegative arc flows and side-constraint multipliers. For an optimal
/// program they reproduce the objective and price it at the optimal value;
/// for an infeasible one they form a Farkas ray.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCertificate<S> {
    pub flow: BTreeMap<(usize, usize), S>,
    pub side: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S: Scalar> {
    pub status: LpStatus,
    pub value: Option<S>,
    pub argument: Option<LipFunction<S>>,
    pub certificate: Option<DualCertificate<S>>,
}

impl<S: Scalar> LpSolution<S> {
    /// The optimal value; errors unless the status is optimal.
    pub fn optimum(&self) -> Result<&S> {
        match (&self.status, &self.value) {
            (LpStatus::Optimal, Some(v)) => Ok(v),
            _ => Err(Error::Certificate(format!("program not optimal: {:?}", self.status))),
        }
    }

    /// Independent optimality (or infeasibility) check.
    ///
    /// For an optimal solution: the argument satisfies every Lipschitz and
    /// side constraint, attains the value, and the certificate combines arc
    /// columns and side columns into the objective at the same cost, which
    /// by weak duality proves the value is the maximum.
    pub fn verify(&self, program: &LipBallProgram<S>) -> Result<()> {
        let space = &program.space;
        let cert = self
            .certificate
            .as_ref()
            .ok_or_else(|| Error::Certificate("no certificate attached".into()))?;
        if cert.side.len() != program.side.len() {
            return Err(Error::Certificate(
                "certificate side multipliers have wrong length".into(),
            ));
        }
        if cert.flow.values().chain(&cert.side).any(|v| v.is_negative()) {
            return Err(Error::Certificate("negative certificate entry".into()));
        }
        let mut combo = vec![S::zero(); space.len()];
        let mut price = S::zero();
        for (&(p, q), x) in &cert.flow {
            combo[p] = combo[p].clone() + x.clone();
            combo[q] = combo[q].clone() - x.clone();
            price = price + x.clone() * space.dist(p, q).clone();
        }
        for (c, y) in program.side.iter().zip(&cert.side) {
            let sign = match c.relation {
                Relation::AtMost => S::one(),
                Relation::AtLeast => -S::one(),
            };
            for (&p, w) in c.functional.weights() {
                combo[p] = combo[p].clone() + sign.clone() * y.clone() * w.clone();
            }
            price = price + sign * y.clone() * c.bound.clone();
        }
        let target = match self.status {
            LpStatus::Optimal => program.objective.dense(),
            _ => vec![S::zero(); space.len()],
        };
        for p in space.non_base_points() {
            if !combo[p].approx_eq(&target[p]) {
                return Err(Error::Certificate(format!(
                    "certificate misses objective at {}",
                    space.label(p)
                )));
            }
        }
        match self.status {
            LpStatus::Optimal => {
                let value = self.optimum()?;
                let f = self
                    .argument
                    .as_ref()
                    .ok_or_else(|| Error::Certificate("optimal solution lacks an argument".into()))?;
                if let Some((p, q)) = f.lipschitz_violation(&S::one()) {
                    return Err(Error::Certificate(format!("argument violates pair ({p},{q})")));
                }
                if let Some(i) = program.side.iter().position(|c| !c.holds(f.values())) {
                    return Err(Error::Certificate(format!("argument violates side constraint {i}")));
                }
                let attained = program.objective.pair_with(f.values());
                if !attained.approx_eq(value) || !price.approx_eq(value) {
                    return Err(Error::Certificate(format!(
                        "value {} but argument gives {} and certificate prices {}",
                        value.render(),
                        attained.render(),
                        price.render()
                    )));
                }
                Ok(())
            }
            LpStatus::Infeasible => {
                if price.is_negative() {
                    Ok(())
                } else {
                    Err(Error::Certificate("infeasibility ray has nonnegative price".into()))
                }
            }
            LpStatus::Unbounded => Err(Error::Certificate("the Lipschitz ball is bounded".into())),
        }
    }
}

/// Arc list in lexicographic order.
fn arcs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
        .collect()
}

/// Exact optimum of a Lipschitz-ball program.
pub fn solve_lip_ball<S: Scalar>(program: &LipBallProgram<S>) -> Result<LpSolution<S>> {
    program.check()?;
    let space = &program.space;
    let n = space.len();
    let base = space.base();
    if n == 1 {
        let f = LipFunction::zero(space.clone());
        let ok = program.side.iter().all(|c| c.holds(f.values()));
        return Ok(if ok {
            LpSolution {
                status: LpStatus::Optimal,
                value: Some(S::zero()),
                argument: Some(f),
                certificate: Some(DualCertificate {
                    flow: BTreeMap::new(),
                    side: vec![S::zero(); program.side.len()],
                }),
            }
        } else {
            LpSolution {
                status: LpStatus::Infeasible,
                value: None,
                argument: None,
                certificate: None,
            }
        });
    }
    let row_of: Vec<Option<usize>> = {
        let mut next = 0;
        (0..n)
            .map(|p| {
                (p != base).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    };
    let point_of: Vec<usize> = space.non_base_points().collect();
    let arc_list = arcs(n);
    let mut columns: Vec<Column<S>> = Vec::with_capacity(arc_list.len() + program.side.len());
    for &(p, q) in &arc_list {
        let mut entries = Vec::with_capacity(2);
        if let Some(r) = row_of[p] {
            entries.push((r, S::one()));
        }
        if let Some(r) = row_of[q] {
            entries.push((r, -S::one()));
        }
        entries.sort_by_key(|e| e.0);
        columns.push(Column {
            entries,
            cost: space.dist(p, q).clone(),
        });
    }
    for c in &program.side {
        let sign = match c.relation {
            Relation::AtMost => S::one(),
            Relation::AtLeast => -S::one(),
        };
        columns.push(Column {
            entries: c
                .functional
                .weights()
                .iter()
                .map(|(&p, w)| {
                    (
                        row_of[p].expect("base weight is never stored"),
                        sign.clone() * w.clone(),
                    )
                })
                .collect(),
            cost: sign * c.bound.clone(),
        });
    }
    let rhs: Vec<S> = point_of.iter().map(|&p| program.objective.weight(p)).collect();
    let arc_index = |p: usize, q: usize| p * (n - 1) + if q > p { q - 1 } else { q };
    let start: Vec<usize> = point_of
        .iter()
        .zip(&rhs)
        .map(|(&p, c)| {
            if c.is_negative() {
                arc_index(base, p)
            } else {
                arc_index(p, base)
            }
        })
        .collect();
    let lp = StandardForm {
        rows: point_of.len(),
        columns,
        rhs,
    };
    let split = |x: &[S]| -> DualCertificate<S> {
        let flow = arc_list
            .iter()
            .zip(x)
            .filter(|(_, v)| v.is_positive())
            .map(|(&a, v)| (a, v.clone()))
            .collect();
        DualCertificate {
            flow,
            side: x[arc_list.len()..].to_vec(),
        }
    };
    match simplex::solve_from_unit_basis(&lp, start)? {
        Outcome::Optimal { x, duals, value } => {
            let mut values = vec![S::zero(); n];
            for (r, &p) in point_of.iter().enumerate() {
                values[p] = duals[r].clone();
            }
            let f = LipFunction::new(space.clone(), values)?;
            Ok(LpSolution {
                status: LpStatus::Optimal,
                value: Some(value),
                argument: Some(f),
                certificate: Some(split(&x)),
            })
        }
        Outcome::Unbounded { ray } => Ok(LpSolution {
            status: LpStatus::Infeasible,
            value: None,
            argument: None,
            certificate: Some(split(&ray)),
        }),
        Outcome::Infeasible => Err(Error::Certificate(
            "transshipment dual lost feasibility of its starting basis".into(),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct PairMaximum<S: Scalar> {
    pub status: LpStatus,
    pub value: Option<S>,
    pub pair: Option<(usize, usize)>,
    pub argument: Option<LipFunction<S>>,
    pub solved: usize,
    pub skipped: usize,
}

/// Maximizes `<objective, g>` over `g` in the ball subject to
/// `(base_fn - g)(m_pq) >= threshold`, separately for every ordered pair in
/// `pairs` (all ordered pairs when `None`), and returns the best pair.
///
/// A pair is feasible exactly when `base_fn(m_pq) - threshold >= -1`, since
/// `g(m_pq)` ranges over `[-1, 1]` on the ball; infeasible pairs are skipped
/// without solving. Ties go to the earliest pair.
pub fn max_over_pairs<S: Scalar>(
    base_fn: &LipFunction<S>,
    threshold: &S,
    objective: &FreeElement<S>,
    pairs: Option<&[(usize, usize)]>,
) -> Result<PairMaximum<S>> {
    base_fn.ensure_same_space(objective.space())?;
    if threshold.greater_than(&S::from_int(2)) {
        return Err(Error::Argument("threshold must be at most 2".into()));
    }
    let space = base_fn.space().clone();
    let all: Vec<(usize, usize)> = match pairs {
        Some(p) => p.to_vec(),
        None => space.ordered_pairs().collect(),
    };
    for &(p, q) in &all {
        space.check_point(p)?;
        space.check_point(q)?;
        if p == q {
            return Err(Error::Argument("pair with equal endpoints".into()));
        }
    }
    let feasible: Vec<(usize, usize, S)> = all
        .iter()
        .filter_map(|&(p, q)| {
            let bound = base_fn.molecule_value(p, q) - threshold.clone();
            bound.at_least(&-S::one()).then_some((p, q, bound))
        })
        .collect();
    let skipped = all.len() - feasible.len();
    let results: Vec<Result<(usize, usize, LpSolution<S>)>> = feasible
        .par_iter()
        .map(|(p, q, bound)| {
            let program = LipBallProgram::new(objective.clone()).with_constraint(SideConstraint::at_most(
                FreeElement::molecule(space.clone(), *p, *q),
                bound.clone(),
            ));
            let sol = solve_lip_ball(&program)?;
            sol.verify(&program)?;
            Ok((*p, *q, sol))
        })
        .collect();
    let mut best = PairMaximum {
        status: LpStatus::Infeasible,
        value: None,
        pair: None,
        argument: None,
        solved: 0,
        skipped,
    };
    for r in results {
        let (p, q, sol) = r?;
        best.solved += 1;
        if sol.status != LpStatus::Optimal {
            best.skipped += 1;
            continue;
        }
        let v = sol.optimum()?.clone();
        if best.value.as_ref().is_none_or(|b| v.greater_than(b)) {
            best.status = LpStatus::Optimal;
            best.value = Some(v);
            best.pair = Some((p, q));
            best.argument = sol.argument;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{build_example1_space, half_line};
    use crate::scalar::{Float, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn solve_checked<S: Scalar>(program: &LipBallProgram<S>) -> LpSolution<S> {
        let sol = solve_lip_ball(program).unwrap();
        sol.verify(program).unwrap();
        sol
    }

    #[test]
    fn zero_objective() {
        let s = Arc::new(build_example1_space::<Rational>(5).unwrap());
        let sol = solve_checked(&LipBallProgram::new(FreeElement::zero(s)));
        assert_eq!(sol.value, Some(q(0, 1)));
    }

    #[test]
    fn molecule_and_dirac_values() {
        let s = Arc::new(build_example1_space::<Rational>(6).unwrap());
        for (u, v) in s.ordered_pairs() {
            let sol = solve_checked(&LipBallProgram::new(FreeElement::molecule(s.clone(), u, v)));
            assert_eq!(sol.value, Some(q(1, 1)));
        }
        for x in s.non_base_points() {
            let sol = solve_checked(&LipBallProgram::new(FreeElement::delta(s.clone(), x)));
            assert_eq!(sol.value.as_ref(), Some(s.dist_to_base(x)));
        }
    }

    #[test]
    fn float_mode_agrees() {
        let s = Arc::new(build_example1_space::<Float>(6).unwrap());
        let mu = FreeElement::molecule(s.clone(), 2, 4)
            .add(&FreeElement::delta(s.clone(), 5))
            .unwrap();
        let sol = solve_checked(&LipBallProgram::new(mu.clone()));
        let plan = min_cost_transport(&mu).unwrap();
        assert!(sol.value.unwrap().approx_eq(&plan.cost));
    }

    #[test]
    fn contradictory_side_constraints_are_infeasible() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(2, 1)]).unwrap());
        let program = LipBallProgram::new(FreeElement::delta(s.clone(), 1))
            .with_constraint(SideConstraint::at_least(FreeElement::delta(s.clone(), 2), q(3, 1)));
        let sol = solve_checked(&program);
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn side_constraint_binds() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(2, 1)]).unwrap());
        let program = LipBallProgram::new(FreeElement::delta(s.clone(), 2))
            .with_constraint(SideConstraint::at_most(FreeElement::delta(s.clone(), 1), q(-1, 2)));
        let sol = solve_checked(&program);
        assert_eq!(sol.value, Some(q(1, 2)));
    }

    #[test]
    fn pair_maximum_vacuous_threshold() {
        let s = Arc::new(build_example1_space::<Rational>(5).unwrap());
        let f = LipFunction::distance_to_base(s.clone()).normalize().unwrap();
        let mu = FreeElement::molecule(s.clone(), 3, 1);
        let r = max_over_pairs(&f, &q(-2, 1), &mu, None).unwrap();
        assert_eq!(r.value, Some(q(1, 1)));
        assert_eq!(r.skipped, 0);
    }

    #[test]
    fn pair_maximum_full_threshold_on_two_points() {
        let s = Arc::new(half_line(&[q(0, 1), q(3, 1)]).unwrap());
        let f = LipFunction::distance_to_base(s.clone());
        let mu = FreeElement::delta(s.clone(), 1);
        let r = max_over_pairs(&f, &q(2, 1), &mu, None).unwrap();
        assert_eq!(r.pair, Some((1, 0)));
        assert_eq!(r.argument.unwrap(), f.neg());
        assert_eq!(r.value, Some(q(-3, 1)));
        assert!(max_over_pairs(&f, &q(3, 1), &mu, None).is_err());
    }
}
