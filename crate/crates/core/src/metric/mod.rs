//! Finite pointed metric spaces.
//!
//! A [`FiniteMetricSpace`] is an `n x n` distance matrix with point labels
//! and a distinguished base point. Construction through [`FiniteMetricSpace::new`]
//! enforces the metric axioms; [`FiniteMetricSpace::from_raw`] only checks
//! shapes so that broken inputs can still be inspected with
//! [`FiniteMetricSpace::validate`].

mod annuli;
mod builders;
mod extract;

pub use annuli::{
    annulus_sweep, check_annuli_hypothesis, check_annulus_inequality, max_annuli_family, AnnuliHypothesisReport,
    AnnulusCheck, AnnulusPair, AnnulusSweep, HypothesisViolation,
};
pub use builders::{
    build_example1_space, build_example2_space, build_hat_space, build_nested_annuli_space, build_two_anchor_space,
    half_line, regular_simplex, Example2Family, Example2Layout, HatSpace, NestedAnnuli, TwoAnchorLayout,
};
pub use extract::{
    check_equidistant_sequence, check_pair_sequence, extract_separated_pairs, ExtractionMode, SeparatedSequence,
};

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct FiniteMetricSpace<S> {
    labels: Vec<String>,
    base: usize,
    n: usize,
    d: Vec<S>,
}

impl<S: Scalar> fmt::Debug for FiniteMetricSpace<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMetricSpace")
            .field("n", &self.n)
            .field("base", &self.labels[self.base])
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    NonZeroDiagonal,
    Asymmetric,
    NonPositive,
    Triangle,
}

/// One failed axiom. For [`ViolationKind::Triangle`] the indices are
/// `(i, j, k)` with `d(i,k) > d(i,j) + d(j,k)` and `slack` is the excess.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation<S> {
    pub kind: ViolationKind,
    pub indices: Vec<usize>,
    pub slack: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<S> {
    pub ok: bool,
    pub violations: Vec<Violation<S>>,
}

impl<S: Scalar> FiniteMetricSpace<S> {
    /// Builds a space checking only shapes, label uniqueness and the base index.
    pub fn from_raw(labels: Vec<String>, base: usize, rows: Vec<Vec<S>>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Structure("a metric space needs at least one point".into()));
        }
        if rows.len() != n {
            return Err(Error::Structure(format!(
                "{} labels but {} distance rows",
                n,
                rows.len()
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Structure(format!(
                "distance row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        if base >= n {
            return Err(Error::Structure(format!("base index {base} out of range 0..{n}")));
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::Structure(format!("duplicate label {l:?}")));
            }
        }
        Ok(Self {
            labels,
            base,
            n,
            d: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds and validates a space; any axiom violation is an error.
    pub fn new(labels: Vec<String>, base: usize, rows: Vec<Vec<S>>) -> Result<Self> {
        let space = Self::from_raw(labels, base, rows)?;
        space.ensure_metric()?;
        Ok(space)
    }

    /// Builds a validated space from a distance function on indices.
    pub fn from_fn(labels: Vec<String>, base: usize, dist: impl Fn(usize, usize) -> S) -> Result<Self> {
        let n = labels.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { S::zero() } else { dist(i, j) }).collect())
            .collect();
        Self::new(labels, base, rows)
    }

    pub(crate) fn ensure_metric(&self) -> Result<()> {
        let report = self.validate();
        match report.violations.first() {
            None => Ok(()),
            Some(v) => {
                let names: Vec<&str> = v.indices.iter().map(|&i| self.label(i)).collect();
                Err(Error::Metric(format!(
                    "{:?} at {:?} (slack {}); {} violation(s) in total",
                    v.kind,
                    names,
                    v.slack.render(),
                    report.violations.len()
                )))
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> &S {
        &self.d[i * self.n + j]
    }

    pub fn dist_to_base(&self, i: usize) -> &S {
        self.dist(i, self.base)
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    /// Points other than the base, in index order.
    pub fn non_base_points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&p| p != self.base)
    }

    pub fn check_point(&self, p: usize) -> Result<()> {
        if p < self.n {
            Ok(())
        } else {
            Err(Error::Structure(format!("point index {p} out of range 0..{}", self.n)))
        }
    }

    /// Ordered pairs `(p, q)` with `p != q`, lexicographic.
    pub fn ordered_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
    }

    pub fn diameter(&self) -> S {
        self.d.iter().cloned().fold(S::zero(), S::max_of)
    }

    /// Distinct off-diagonal distances, ascending.
    pub fn distinct_distances(&self) -> Vec<S> {
        let mut out: Vec<S> = Vec::new();
        for (p, q) in self.ordered_pairs().filter(|(p, q)| p < q) {
            out.push(self.dist(p, q).clone());
        }
        sort_dedup(&mut out);
        out
    }

    /// Reports every violation of the metric axioms with its exact slack.
    pub fn validate(&self) -> ValidationReport<S> {
        let n = self.n;
        let mut violations = Vec::new();
        for i in 0..n {
            let dii = self.dist(i, i);
            if !dii.is_zero_tol() {
                violations.push(Violation {
                    kind: ViolationKind::NonZeroDiagonal,
                    indices: vec![i],
                    slack: dii.abs(),
                });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (self.dist(i, j), self.dist(j, i));
                if !a.approx_eq(b) {
                    violations.push(Violation {
                        kind: ViolationKind::Asymmetric,
                        indices: vec![i, j],
                        slack: (a.clone() - b.clone()).abs(),
                    });
                }
                for (x, y, v) in [(i, j, a), (j, i, b)] {
                    if !v.is_positive() {
                        violations.push(Violation {
                            kind: ViolationKind::NonPositive,
                            indices: vec![x, y],
                            slack: -v.clone(),
                        });
                    }
                }
            }
        }
        for i in 0..n {
            for k in i + 1..n {
                let dik = self.dist(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let through = self.dist(i, j).clone() + self.dist(j, k).clone();
                    if dik.greater_than(&through) {
                        violations.push(Violation {
                            kind: ViolationKind::Triangle,
                            indices: vec![i, j, k],
                            slack: dik.clone() - through,
                        });
                    }
                }
            }
        }
        ValidationReport {
            ok: violations.is_empty(),
            violations,
        }
    }

    /// Points `p` with `d(u,p) + d(v,p) < d(u,v) + delta`.
    pub fn seg(&self, u: usize, v: usize, delta: &S) -> Result<Vec<usize>> {
        self.check_point(u)?;
        self.check_point(v)?;
        if u == v {
            return Err(Error::Argument("seg needs distinct endpoints".into()));
        }
        if !delta.is_positive() {
            return Err(Error::Argument("seg needs delta > 0".into()));
        }
        let bound = self.dist(u, v).clone() + delta.clone();
        Ok(self
            .points()
            .filter(|&p| (self.dist(u, p).clone() + self.dist(v, p).clone()).less_than(&bound))
            .collect())
    }

    /// Closed ball `{p : d(c,p) <= r}`.
    pub fn ball(&self, center: usize, radius: &S) -> Vec<usize> {
        self.points()
            .filter(|&p| self.dist(center, p).at_most(radius))
            .collect()
    }

    /// Converts distances to another backend (used to run float mode on
    /// spaces built with exact builders).
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> FiniteMetricSpace<T> {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            base: self.base,
            n: self.n,
            d: self.d.iter().map(f).collect(),
        }
    }

    /// Distance rows, for serialization.
    pub fn rows(&self) -> Vec<&[S]> {
        self.d.chunks(self.n).collect()
    }
}

pub(crate) fn sort_dedup<S: Scalar>(v: &mut Vec<S>) {
    v.sort_by(|a, b| a.compare(b));
    v.dedup_by(|a, b| a.approx_eq(b));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn single_point_space_is_valid() {
        let s = FiniteMetricSpace::<Rational>::from_raw(labels(1), 0, vec![vec![q(0, 1)]]).unwrap();
        assert!(s.validate().ok);
    }

    #[test]
    fn triangle_violation_reports_exact_slack() {
        // a=0, b=1, c=2 with d(a,b)=5, d(b,c)=1, d(a,c)=1
        let rows = vec![
            vec![q(0, 1), q(5, 1), q(1, 1)],
            vec![q(5, 1), q(0, 1), q(1, 1)],
            vec![q(1, 1), q(1, 1), q(0, 1)],
        ];
        let s = FiniteMetricSpace::from_raw(vec!["a".into(), "b".into(), "c".into()], 0, rows).unwrap();
        let report = s.validate();
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.kind, ViolationKind::Triangle);
        assert_eq!(v.indices, vec![0, 2, 1]);
        assert_eq!(v.slack, q(3, 1));
        assert!(FiniteMetricSpace::new(s.labels().to_vec(), 0, rows_of(&s)).is_err());
    }

    fn rows_of(s: &FiniteMetricSpace<Rational>) -> Vec<Vec<Rational>> {
        s.rows().iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn asymmetry_and_positivity_reported() {
        let rows = vec![vec![q(0, 1), q(1, 1)], vec![q(2, 1), q(1, 1)]];
        let s = FiniteMetricSpace::from_raw(labels(2), 0, rows).unwrap();
        let kinds: Vec<_> = s.validate().violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::Asymmetric));
        assert!(kinds.contains(&ViolationKind::NonZeroDiagonal));
        let rows = vec![vec![q(0, 1), q(0, 1)], vec![q(0, 1), q(0, 1)]];
        let s = FiniteMetricSpace::from_raw(labels(2), 0, rows).unwrap();
        assert_eq!(s.validate().violations[0].kind, ViolationKind::NonPositive);
    }

    #[test]
    fn structural_errors() {
        assert!(FiniteMetricSpace::<Rational>::from_raw(labels(2), 0, vec![vec![q(0, 1)]]).is_err());
        assert!(FiniteMetricSpace::<Rational>::from_raw(labels(1), 3, vec![vec![q(0, 1)]]).is_err());
        assert!(FiniteMetricSpace::<Rational>::from_raw(vec![], 0, vec![]).is_err());
        let dup = vec!["a".to_string(), "a".to_string()];
        let rows = vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]];
        assert!(FiniteMetricSpace::from_raw(dup, 0, rows).is_err());
    }

    #[test]
    fn seg_on_a_line() {
        let s = half_line(&[q(0, 1), q(1, 1), q(2, 1)]).unwrap();
        assert_eq!(s.seg(0, 2, &q(1, 2)).unwrap(), vec![0, 1, 2]);
        assert_eq!(s.seg(0, 1, &q(1, 2)).unwrap(), vec![0, 1]);
        assert!(s.seg(1, 1, &q(1, 2)).is_err());
        assert!(s.seg(0, 1, &q(0, 1)).is_err());
    }

    #[test]
    fn seg_with_huge_delta_is_everything() {
        let s = build_example1_space::<Rational>(6).unwrap();
        let delta = s.diameter() * q(2, 1) + q(1, 1);
        assert_eq!(s.seg(1, 4, &delta).unwrap(), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn seg_in_example2_space() {
        let s = build_example2_space::<Rational>(3).unwrap();
        let layout = Example2Layout::new(3);
        // brute force over all points: only the endpoints satisfy the strict bound
        let (x1, y1) = (layout.x(1), layout.y(1));
        let bound = s.dist(x1, y1).clone() + q(1, 2);
        let brute: Vec<usize> = s
            .points()
            .filter(|&p| (s.dist(x1, p).clone() + s.dist(y1, p).clone()) < bound)
            .collect();
        let mut expected = vec![x1, y1];
        expected.sort();
        assert_eq!(brute, expected);
        assert_eq!(s.seg(x1, y1, &q(1, 2)).unwrap(), expected);
    }
}
