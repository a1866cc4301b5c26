//! Revised simplex over an explicit dense basis inverse.
//!
//! Problems are in standard form `min c.x` subject to `A x = b`, `x >= 0`
//! with sparse columns. Entering columns follow Dantzig's rule (lowest
//! index on ties); leaving rows follow the lexicographic ratio test relative
//! to the starting basis, which rules out cycling and makes every pivot
//! sequence deterministic.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{Float, Scalar};

const PIVOT_TOLERANCE: f64 = 1e-12;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone)]
pub(crate) struct Column<S> {
    pub entries: Vec<(usize, S)>,
    pub cost: S,
}

#[derive(Debug, Clone)]
pub(crate) struct StandardForm<S> {
    pub rows: usize,
    pub columns: Vec<Column<S>>,
    pub rhs: Vec<S>,
}

#[derive(Debug, Clone)]
pub(crate) enum Outcome<S> {
    Optimal {
        x: Vec<S>,
        duals: Vec<S>,
        value: S,
    },
    Infeasible,
    /// A ray: `A w = 0`, `w >= 0`, `c.w < 0`.
    Unbounded {
        ray: Vec<S>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Rule {
    Lexicographic,
    Bland,
}

struct Tableau<'a, S> {
    lp: &'a StandardForm<S>,
    /// Column index per row; indices `>= lp.columns.len()` are artificials.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<Vec<S>>,
    xb: Vec<S>,
    duals: Vec<S>,
    /// Diagonal of the starting basis (lexicographic reference).
    start_signs: Vec<S>,
    costs: Vec<S>,
    allow_artificial: bool,
}

impl<'a, S: Scalar> Tableau<'a, S> {
    fn total_columns(&self) -> usize {
        self.lp.columns.len() + self.lp.rows
    }

    fn with_entries<R>(&self, j: usize, f: impl FnOnce(&[(usize, S)]) -> R) -> R {
        if j < self.lp.columns.len() {
            f(&self.lp.columns[j].entries)
        } else {
            let r = j - self.lp.columns.len();
            f(&[(r, self.start_signs[r].clone())])
        }
    }

    fn ftran(&self, j: usize) -> Vec<S> {
        self.with_entries(j, |entries| {
            self.binv
                .iter()
                .map(|row| {
                    entries
                        .iter()
                        .fold(S::zero(), |acc, (k, a)| acc + row[*k].clone() * a.clone())
                })
                .collect()
        })
    }

    fn reduced_cost(&self, j: usize) -> S {
        self.with_entries(j, |entries| {
            entries.iter().fold(self.costs[j].clone(), |acc, (k, a)| {
                acc - self.duals[*k].clone() * a.clone()
            })
        })
    }

    fn recompute_duals(&mut self) {
        let m = self.lp.rows;
        self.duals = (0..m)
            .map(|k| {
                (0..m).fold(S::zero(), |acc, i| {
                    acc + self.costs[self.basis[i]].clone() * self.binv[i][k].clone()
                })
            })
            .collect();
    }

    fn entering(&self, rule: Rule) -> Option<(usize, S)> {
        let mut best: Option<(usize, S)> = None;
        for j in 0..self.total_columns() {
            if self.in_basis[j] || (!self.allow_artificial && j >= self.lp.columns.len()) {
                continue;
            }
            let r = self.reduced_cost(j);
            if !self.improving(j, &r) {
                continue;
            }
            match rule {
                Rule::Bland => return Some((j, r)),
                Rule::Lexicographic => {
                    if best.as_ref().is_none_or(|(_, b)| r.less_than(b)) {
                        best = Some((j, r));
                    }
                }
            }
        }
        best
    }

    /// Floating pivots use a tighter threshold than comparisons so the
    /// optimum is not left short by the comparison tolerance.
    fn improving(&self, j: usize, r: &S) -> bool {
        if S::EXACT {
            return r.is_negative();
        }
        let cost = self.costs[j].to_f64().abs();
        r.to_f64() < -PIVOT_TOLERANCE * cost.max(1.0)
    }

    fn lex_row(&self, i: usize, d: &S) -> impl Iterator<Item = S> + '_ {
        let d = d.clone();
        std::iter::once(self.xb[i].clone() / d.clone()).chain(
            self.binv[i]
                .iter()
                .zip(&self.start_signs)
                .map(move |(b, s)| b.clone() * s.clone() / d.clone()),
        )
    }

    fn leaving(&self, col: &[S], rule: Rule) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..self.lp.rows {
            if !col[i].is_positive() {
                continue;
            }
            let Some(b) = best else {
                best = Some(i);
                continue;
            };
            let ord = match rule {
                Rule::Bland => {
                    let lhs = self.xb[i].clone() / col[i].clone();
                    let rhs = self.xb[b].clone() / col[b].clone();
                    lhs.compare(&rhs).then(self.basis[i].cmp(&self.basis[b]))
                }
                Rule::Lexicographic => {
                    let mut ord = Ordering::Equal;
                    for (x, y) in self.lex_row(i, &col[i]).zip(self.lex_row(b, &col[b])) {
                        ord = x.compare(&y);
                        if ord != Ordering::Equal {
                            break;
                        }
                    }
                    ord
                }
            };
            if ord == Ordering::Less {
                best = Some(i);
            }
        }
        best
    }

    fn pivot(&mut self, r: usize, j: usize, col: &[S], reduced: &S) {
        let m = self.lp.rows;
        let dr = col[r].clone();
        let step = reduced.clone() / dr.clone();
        for k in 0..m {
            if !self.binv[r][k].is_zero_tol() {
                self.duals[k] = self.duals[k].clone() + step.clone() * self.binv[r][k].clone();
            }
        }
        let theta = self.xb[r].clone() / dr.clone();
        let pivot_row: Vec<S> = self.binv[r].iter().map(|v| v.clone() / dr.clone()).collect();
        for i in 0..m {
            if i == r || col[i].is_zero_tol() {
                continue;
            }
            let factor = col[i].clone();
            for k in 0..m {
                if !pivot_row[k].is_zero_tol() {
                    self.binv[i][k] = self.binv[i][k].clone() - factor.clone() * pivot_row[k].clone();
                }
            }
            self.xb[i] = self.xb[i].clone() - factor * theta.clone();
        }
        self.binv[r] = pivot_row;
        self.xb[r] = theta;
        self.in_basis[self.basis[r]] = false;
        self.basis[r] = j;
        self.in_basis[j] = true;
        if !S::EXACT {
            for v in &mut self.xb {
                if v.is_zero_tol() {
                    *v = S::zero();
                }
            }
        }
    }

    /// Runs to optimality; returns the ray column on unboundedness.
    fn run(&mut self, rule: Rule) -> Result<Option<(usize, Vec<S>)>> {
        for _ in 0..MAX_PIVOTS {
            let Some((j, reduced)) = self.entering(rule) else {
                return Ok(None);
            };
            let col = self.ftran(j);
            let Some(r) = self.leaving(&col, rule) else {
                return Ok(Some((j, col)));
            };
            self.pivot(r, j, &col, &reduced);
        }
        Err(Error::Certificate(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }

    fn objective(&self) -> S {
        (0..self.lp.rows).fold(S::zero(), |acc, i| {
            acc + self.costs[self.basis[i]].clone() * self.xb[i].clone()
        })
    }

    fn primal(&self) -> Vec<S> {
        let mut x = vec![S::zero(); self.lp.columns.len()];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < x.len() {
                x[j] = self.xb[i].clone();
            }
        }
        x
    }

    fn ray(&self, j: usize, col: &[S]) -> Vec<S> {
        let mut w = vec![S::zero(); self.lp.columns.len()];
        w[j] = S::one();
        for (i, &b) in self.basis.iter().enumerate() {
            if b < w.len() {
                w[b] = -col[i].clone();
            }
        }
        w
    }
}

fn phase_two_costs<S: Scalar>(lp: &StandardForm<S>) -> Vec<S> {
    lp.columns
        .iter()
        .map(|c| c.cost.clone())
        .chain((0..lp.rows).map(|_| S::zero()))
        .collect()
}

/// Solves starting from a basis of signed unit columns: `basis[i]` must be a
/// column equal to `signs[i] e_i` with `signs[i] b_i >= 0`.
pub(crate) fn solve_from_unit_basis<S: Scalar>(lp: &StandardForm<S>, basis: Vec<usize>) -> Result<Outcome<S>> {
    let m = lp.rows;
    if basis.len() != m || lp.rhs.len() != m {
        return Err(Error::Structure("starting basis does not match row count".into()));
    }
    let mut signs = Vec::with_capacity(m);
    for (i, &j) in basis.iter().enumerate() {
        let col = lp
            .columns
            .get(j)
            .ok_or_else(|| Error::Structure(format!("basis column {j} out of range")))?;
        match col.entries.as_slice() {
            [(r, s)] if *r == i && (s.approx_eq(&S::one()) || s.approx_eq(&-S::one())) => signs.push(s.clone()),
            _ => {
                return Err(Error::Structure(format!(
                    "basis column {j} is not a signed unit column"
                )))
            }
        }
        if (signs[i].clone() * lp.rhs[i].clone()).is_negative() {
            return Err(Error::Structure(format!("starting basis infeasible in row {i}")));
        }
    }
    if S::EXACT {
        if let Some(out) = crossover(lp, &basis, &signs)? {
            return Ok(out);
        }
    }
    finish(unit_tableau(lp, basis, signs), Rule::Lexicographic)
}

fn unit_tableau<S: Scalar>(lp: &StandardForm<S>, basis: Vec<usize>, signs: Vec<S>) -> Tableau<'_, S> {
    let m = lp.rows;
    let mut in_basis = vec![false; lp.columns.len() + m];
    for &j in &basis {
        in_basis[j] = true;
    }
    let binv = (0..m)
        .map(|i| {
            (0..m)
                .map(|k| if i == k { signs[i].clone() } else { S::zero() })
                .collect()
        })
        .collect();
    let xb = (0..m).map(|i| signs[i].clone() * lp.rhs[i].clone()).collect();
    let mut t = Tableau {
        lp,
        basis,
        in_basis,
        binv,
        xb,
        duals: vec![S::zero(); m],
        start_signs: signs,
        costs: phase_two_costs(lp),
        allow_artificial: false,
    };
    t.recompute_duals();
    t
}

/// Exact inverse by Gauss-Jordan elimination; `None` when singular.
fn invert<S: Scalar>(mut a: Vec<Vec<S>>) -> Option<Vec<Vec<S>>> {
    let m = a.len();
    let mut inv: Vec<Vec<S>> = (0..m)
        .map(|i| (0..m).map(|k| if i == k { S::one() } else { S::zero() }).collect())
        .collect();
    for c in 0..m {
        let p = (c..m).find(|&r| !a[r][c].is_zero_tol())?;
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c].clone();
        for k in 0..m {
            if !a[c][k].is_zero_tol() {
                a[c][k] = a[c][k].clone() / d.clone();
            }
            if !inv[c][k].is_zero_tol() {
                inv[c][k] = inv[c][k].clone() / d.clone();
            }
        }
        for r in 0..m {
            if r == c || a[r][c].is_zero_tol() {
                continue;
            }
            let factor = a[r][c].clone();
            for k in 0..m {
                if !a[c][k].is_zero_tol() {
                    a[r][k] = a[r][k].clone() - factor.clone() * a[c][k].clone();
                }
                if !inv[c][k].is_zero_tol() {
                    inv[r][k] = inv[r][k].clone() - factor.clone() * inv[c][k].clone();
                }
            }
        }
    }
    Some(inv)
}

/// Runs the simplex in `f64` to locate a basis, then rebuilds that basis
/// exactly and finishes with Bland's rule. Any trouble in the floating
/// pass (cycling, unboundedness, a basis that is singular or infeasible in
/// exact arithmetic) returns `None` and the caller solves from scratch.
fn crossover<S: Scalar>(lp: &StandardForm<S>, basis: &[usize], signs: &[S]) -> Result<Option<Outcome<S>>> {
    let m = lp.rows;
    let approx = StandardForm {
        rows: m,
        columns: lp
            .columns
            .iter()
            .map(|c| Column {
                entries: c.entries.iter().map(|(r, v)| (*r, Float(v.to_f64()))).collect(),
                cost: Float(c.cost.to_f64()),
            })
            .collect(),
        rhs: lp.rhs.iter().map(|v| Float(v.to_f64())).collect(),
    };
    let mut t = unit_tableau(
        &approx,
        basis.to_vec(),
        signs.iter().map(|s| Float(s.to_f64())).collect(),
    );
    if !matches!(t.run(Rule::Lexicographic), Ok(None)) {
        return Ok(None);
    }
    let found = t.basis;
    if found.iter().any(|&j| j >= lp.columns.len()) {
        return Ok(None);
    }
    let mut dense = vec![vec![S::zero(); m]; m];
    for (k, &j) in found.iter().enumerate() {
        for (r, v) in &lp.columns[j].entries {
            dense[*r][k] = v.clone();
        }
    }
    let Some(binv) = invert(dense) else {
        return Ok(None);
    };
    let xb: Vec<S> = binv
        .iter()
        .map(|row| {
            row.iter()
                .zip(&lp.rhs)
                .filter(|(a, _)| !a.is_zero_tol())
                .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
        })
        .collect();
    if xb.iter().any(|v| v.is_negative()) {
        return Ok(None);
    }
    let mut in_basis = vec![false; lp.columns.len() + m];
    for &j in &found {
        in_basis[j] = true;
    }
    let mut exact = Tableau {
        lp,
        basis: found,
        in_basis,
        binv,
        xb,
        duals: vec![S::zero(); m],
        start_signs: signs.to_vec(),
        costs: phase_two_costs(lp),
        allow_artificial: false,
    };
    exact.recompute_duals();
    finish(exact, Rule::Bland).map(Some)
}

fn finish<S: Scalar>(mut t: Tableau<'_, S>, rule: Rule) -> Result<Outcome<S>> {
    match t.run(rule)? {
        Some((j, col)) => Ok(Outcome::Unbounded { ray: t.ray(j, &col) }),
        None => Ok(Outcome::Optimal {
            value: t.objective(),
            x: t.primal(),
            duals: t.duals.clone(),
        }),
    }
}

/// Two-phase solve with one artificial per row.
pub(crate) fn solve<S: Scalar>(lp: &StandardForm<S>) -> Result<Outcome<S>> {
    let m = lp.rows;
    let n = lp.columns.len();
    if lp.rhs.len() != m || lp.columns.iter().any(|c| c.entries.iter().any(|(r, _)| *r >= m)) {
        return Err(Error::Structure("column entries exceed the row count".into()));
    }
    let signs: Vec<S> = lp
        .rhs
        .iter()
        .map(|b| if b.is_negative() { -S::one() } else { S::one() })
        .collect();
    let mut in_basis = vec![false; n + m];
    for flag in &mut in_basis[n..] {
        *flag = true;
    }
    let mut costs = vec![S::zero(); n];
    costs.extend((0..m).map(|_| S::one()));
    let mut t = Tableau {
        lp,
        basis: (n..n + m).collect(),
        in_basis,
        binv: (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| if i == k { signs[i].clone() } else { S::zero() })
                    .collect()
            })
            .collect(),
        xb: (0..m).map(|i| signs[i].clone() * lp.rhs[i].clone()).collect(),
        duals: vec![S::zero(); m],
        start_signs: signs,
        costs,
        allow_artificial: true,
    };
    t.recompute_duals();
    if t.run(Rule::Lexicographic)?.is_some() {
        return Err(Error::Certificate("phase one reported an unbounded ray".into()));
    }
    if t.objective().is_positive() {
        return Ok(Outcome::Infeasible);
    }
    // Drive zero-level artificials out where a structural column can replace them.
    let mut drove = false;
    for r in 0..m {
        if t.basis[r] < n {
            continue;
        }
        let replacement = (0..n).filter(|&j| !t.in_basis[j]).find_map(|j| {
            let col = t.ftran(j);
            (!col[r].is_zero_tol()).then_some((j, col))
        });
        if let Some((j, col)) = replacement {
            let reduced = t.reduced_cost(j);
            t.pivot(r, j, &col, &reduced);
            drove = true;
        }
    }
    t.costs = phase_two_costs(lp);
    t.allow_artificial = false;
    t.recompute_duals();
    finish(t, if drove { Rule::Bland } else { Rule::Lexicographic })
}
