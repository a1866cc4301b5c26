use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::Molecule;
use crate::metric::{
    check_annuli_hypothesis, check_pair_sequence, AnnulusPair, Example2Family, Example2Layout, FiniteMetricSpace,
    HypothesisViolation,
};
use crate::scalar::Scalar;

use super::{lipschitz_constant, mcshane_extend, Direction, LipFunction};

fn require_unit_ball<S: Scalar>(g: &LipFunction<S>, what: &str) -> Result<()> {
    if g.norm().greater_than(&S::one()) {
        return Err(Error::precondition(
            format!("{what} needs norm at most 1, got {}", g.norm().render()),
            g.norming_pair().map(|(p, q)| vec![p, q]).unwrap_or_default(),
        ));
    }
    Ok(())
}

fn violation_error<S: Scalar>(v: &HypothesisViolation<S>, pairs: &[AnnulusPair]) -> Error {
    let (reason, witness) = match v {
        HypothesisViolation::Overlap { i, j, point } => (
            format!("sets {} and {} share point {point}", i + 1, j + 1),
            vec![*point],
        ),
        HypothesisViolation::CenterOutside { i } => (format!("u_{} is not in its set", i + 1), vec![pairs[*i].u]),
        HypothesisViolation::Inequality { i, x, y, slack } => (
            format!("annulus inequality fails for pair {} (slack {})", i + 1, slack.render()),
            vec![pairs[*i].u, pairs[*i].v, *x, *y],
        ),
        HypothesisViolation::EarlierPointInside { i, j, point } => (
            format!("set {} contains point {point} of earlier pair {}", i + 1, j + 1),
            vec![*point],
        ),
    };
    Error::precondition(reason, witness)
}

/// `h(p) = max{min_i g(y_i), max_i (g(x_i) - d(x_i, p))} + a`, with `a`
/// chosen so that `h(base) = 0`.
pub fn slice_flatten<S: Scalar>(g: &LipFunction<S>, xs: &[usize], ys: &[usize]) -> Result<LipFunction<S>> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Argument("anchor lists must be non-empty".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Argument(format!(
            "{} x anchors but {} y anchors",
            xs.len(),
            ys.len()
        )));
    }
    require_unit_ball(g, "slice flattening")?;
    let space = g.space();
    for &p in xs.iter().chain(ys) {
        space.check_point(p)?;
    }
    let floor = ys
        .iter()
        .map(|&y| g.value(y).clone())
        .reduce(|a, b| a.min_of(b))
        .expect("non-empty");
    let raw: Vec<S> = space
        .points()
        .map(|p| {
            xs.iter()
                .map(|&x| g.value(x).clone() - space.dist(x, p).clone())
                .fold(floor.clone(), |a, b| a.max_of(b))
        })
        .collect();
    let shift = raw[space.base()].clone();
    Ok(LipFunction::from_values_unchecked(
        space.clone(),
        raw.into_iter().map(|v| v - shift.clone()).collect(),
    ))
}

/// Keeps `g` on the core `{index <= k}` of the four-family space and puts
/// the plateau `a - 1, a + 1, a, a` on the tail `x, y, u, v` points, where
/// `a` is the midpoint of the range of `g` on the core.
pub fn tail_plateau<S: Scalar>(g: &LipFunction<S>, core: &[usize], layout: &Example2Layout) -> Result<LipFunction<S>> {
    let space = g.space();
    if space.len() != layout.len() {
        return Err(Error::Argument(format!(
            "layout has {} points but the space has {}",
            layout.len(),
            space.len()
        )));
    }
    let mut sorted = core.to_vec();
    sorted.sort_unstable();
    let k = sorted.len() / 4;
    if k == 0 || sorted != layout.core(k) {
        return Err(Error::Argument(
            "core must be all points with family index at most k".into(),
        ));
    }
    let restricted: Vec<(usize, S)> = sorted.iter().map(|&p| (p, g.value(p).clone())).collect();
    for (i, (p, gp)) in restricted.iter().enumerate() {
        for (q, gq) in &restricted[i + 1..] {
            if (gp.clone() - gq.clone()).abs().greater_than(space.dist(*p, *q)) {
                return Err(Error::precondition(
                    "g restricted to the core has norm above 1",
                    vec![*p, *q],
                ));
            }
        }
    }
    let hi = restricted
        .iter()
        .map(|(_, v)| v.clone())
        .reduce(|a, b| a.max_of(b))
        .expect("non-empty");
    let lo = restricted
        .iter()
        .map(|(_, v)| v.clone())
        .reduce(|a, b| a.min_of(b))
        .expect("non-empty");
    let a = (hi + lo) / S::from_int(2);
    let values: Vec<S> = space
        .points()
        .map(|p| {
            let (family, i) = layout.classify(p);
            if i <= k {
                return g.value(p).clone();
            }
            match family {
                Example2Family::X => a.clone() - S::one(),
                Example2Family::Y => a.clone() + S::one(),
                Example2Family::U | Example2Family::V => a.clone(),
            }
        })
        .collect();
    let shift = values[space.base()].clone();
    Ok(LipFunction::from_values_unchecked(
        space.clone(),
        values.into_iter().map(|v| v - shift.clone()).collect(),
    ))
}

/// `f(p) = min over sites of d(site, p)`; the first site must be the base.
pub fn nearest_point_function<S: Scalar>(space: &Arc<FiniteMetricSpace<S>>, sites: &[usize]) -> Result<LipFunction<S>> {
    match sites.first() {
        None => return Err(Error::Argument("need at least one site".into())),
        Some(&s) if s != space.base() => {
            return Err(Error::Argument("the first site must be the base point".into()));
        }
        _ => {}
    }
    for &s in sites {
        space.check_point(s)?;
    }
    let values = space
        .points()
        .map(|p| {
            sites
                .iter()
                .map(|&s| space.dist(s, p).clone())
                .reduce(|a, b| a.min_of(b))
                .expect("non-empty")
        })
        .collect();
    LipFunction::new(space.clone(), values)
}

/// Per-stage record of the recursive construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DaugavetStage<S> {
    pub stage: usize,
    pub u: usize,
    pub v: usize,
    pub value_u: S,
    pub value_v: S,
    /// Lipschitz constant of the partial function on the first `stage` pairs.
    pub lip_constant: S,
    /// `1 - 2^-stage`.
    pub lip_bound: S,
    /// `f(m_{u_s v_s})`.
    pub molecule_value: S,
    /// `1 - 2^-(stage-1)`.
    pub molecule_bound: S,
}

impl<S: Scalar> DaugavetStage<S> {
    pub fn holds(&self) -> bool {
        self.lip_constant.at_most(&self.lip_bound) && self.molecule_value.at_least(&self.molecule_bound)
    }
}

#[derive(Debug, Clone)]
pub struct DaugavetConstruction<S: Scalar> {
    pub f: LipFunction<S>,
    pub stages: Vec<DaugavetStage<S>>,
    /// Factor applied after the final extension to reach norm one.
    pub rescale: S,
}

/// Defines `f` on the pairs stage by stage and extends it to the space.
///
/// The sets must be pairwise disjoint, miss all earlier pair points, and
/// satisfy the annulus inequality with `eps_i = 2^-(i+1)`. `u_1` must be
/// the base point.
pub fn daugavet_recursive_construction<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    pairs: &[AnnulusPair],
) -> Result<DaugavetConstruction<S>> {
    let Some(first) = pairs.first() else {
        return Err(Error::Argument("need at least one pair".into()));
    };
    if first.u != space.base() {
        return Err(Error::Argument("u_1 must be the base point".into()));
    }
    let eps: Vec<S> = (1..=pairs.len()).map(|i| S::inv_pow2(i as u32 + 1)).collect();
    let report = check_annuli_hypothesis(space, pairs, &eps, true)?;
    if let Some(v) = report.violations.first() {
        return Err(violation_error(v, pairs));
    }
    let mut values: Vec<Option<S>> = vec![None; space.len()];
    let mut defined: Vec<usize> = Vec::new();
    let mut stages = Vec::with_capacity(pairs.len());
    for (i0, pair) in pairs.iter().enumerate() {
        let s = i0 + 1;
        let (u, v) = (pair.u, pair.v);
        if u == v || values[v].is_some() || (s > 1 && values[u].is_some()) {
            return Err(Error::Argument(format!("pair {s} reuses an earlier point")));
        }
        let c = S::one() - S::inv_pow2(s as u32);
        let (fu, fv) = if s == 1 {
            (S::zero(), S::zero())
        } else {
            let fu = defined
                .iter()
                .map(|&x| values[x].clone().expect("defined") + c.clone() * space.dist(x, u).clone())
                .reduce(|a, b| a.min_of(b))
                .expect("stage 1 defines points");
            let fv = defined
                .iter()
                .map(|&x| (x, values[x].clone().expect("defined")))
                .chain(std::iter::once((u, fu.clone())))
                .map(|(x, fx)| fx - c.clone() * space.dist(x, v).clone())
                .reduce(|a, b| a.max_of(b))
                .expect("non-empty");
            (fu, fv)
        };
        values[u] = Some(fu.clone());
        values[v] = Some(fv.clone());
        defined.push(u);
        defined.push(v);
        let sub = space.points().filter(|p| values[*p].is_some());
        let mut lip = S::zero();
        let pts: Vec<usize> = sub.collect();
        for (a, &p) in pts.iter().enumerate() {
            for &q in &pts[a + 1..] {
                let slope = (values[p].clone().expect("defined") - values[q].clone().expect("defined")).abs()
                    / space.dist(p, q).clone();
                lip = lip.max_of(slope);
            }
        }
        stages.push(DaugavetStage {
            stage: s,
            u,
            v,
            value_u: fu.clone(),
            value_v: fv.clone(),
            lip_constant: lip,
            lip_bound: c,
            molecule_value: (fu - fv) / space.dist(u, v).clone(),
            molecule_bound: S::one() - S::inv_pow2(s as u32 - 1),
        });
    }
    let subset: Vec<usize> = space.points().filter(|p| values[*p].is_some()).collect();
    let known: Vec<S> = subset.iter().map(|&p| values[p].clone().expect("defined")).collect();
    let ext = mcshane_extend(space, &subset, &known, &S::one(), Direction::Lower)?;
    let mut f = ext.normalized();
    let mut rescale = S::one();
    if f.norm().is_positive() && f.norm().less_than(&S::one()) {
        rescale = S::one() / f.norm().clone();
        f = f.scale(&rescale);
    }
    Ok(DaugavetConstruction { f, stages, rescale })
}

/// The hat functions `f` and `g_i` built on separated pairs.
#[derive(Debug, Clone)]
pub struct HatFamily<S: Scalar> {
    pub pairs: Vec<(usize, usize)>,
    pub a: S,
    /// Common factor `1 / ||f_raw||` applied to every function.
    pub scale: S,
    pub f: LipFunction<S>,
    /// `g[i-1]` is `f` with the signs at `u_i, v_i` swapped.
    pub g: Vec<LipFunction<S>>,
}

impl<S: Scalar> HatFamily<S> {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `m_{u_i v_i}` for 1-based `i`.
    pub fn molecule(&self, i: usize) -> Molecule {
        let (u, v) = self.pairs[i - 1];
        Molecule { u, v }
    }

    /// `(1/len) * sum_{k=1..len} g_{k+offset}`.
    pub fn window_average(&self, len: usize, offset: usize) -> Result<LipFunction<S>> {
        if len == 0 || offset + len > self.g.len() {
            return Err(Error::Argument(format!(
                "window of {len} starting after {offset} exceeds {} functions",
                self.g.len()
            )));
        }
        let mut sum = LipFunction::zero(self.f.space().clone());
        for g in &self.g[offset..offset + len] {
            sum = sum.add(g)?;
        }
        Ok(sum.scale(&(S::one() / S::from_int(len as i64))))
    }
}

/// `f(u_i) = a(i-2)/(2i)`, `f(v_i) = -a(i-2)/(2i)` for `i >= 2`, zero on
/// `u_1, v_1` and off the pairs, then divided by its norm.
pub fn delta_hat_family<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    pairs: &[(usize, usize)],
    a: &S,
) -> Result<HatFamily<S>> {
    if pairs.len() < 3 {
        return Err(Error::Argument(format!("need at least 3 pairs, got {}", pairs.len())));
    }
    if !a.is_positive() {
        return Err(Error::Argument("scale a must be positive".into()));
    }
    let zero = S::zero();
    for end in 1..=pairs.len() {
        if !check_pair_sequence(space, a, &pairs[..end], &zero) {
            let (u, v) = pairs[end - 1];
            return Err(Error::precondition(
                format!(
                    "pair {end} breaks the separated-pair inequalities at scale {}",
                    a.render()
                ),
                vec![u, v],
            ));
        }
    }
    let height = |i: usize| {
        if i < 2 {
            S::zero()
        } else {
            a.clone() * S::from_ratio(i as i64 - 2, 2 * i as i64)
        }
    };
    let mut raw = vec![S::zero(); space.len()];
    for (i0, &(u, v)) in pairs.iter().enumerate() {
        raw[u] = height(i0 + 1);
        raw[v] = -height(i0 + 1);
    }
    let (norm, _) = lipschitz_constant(space, &raw);
    if !norm.is_positive() {
        return Err(Error::Argument("hat function is constant".into()));
    }
    let scale = S::one() / norm;
    let finish = |vals: &[S]| {
        let shift = vals[space.base()].clone();
        LipFunction::from_values_unchecked(
            space.clone(),
            vals.iter()
                .map(|v| (v.clone() - shift.clone()) * scale.clone())
                .collect(),
        )
    };
    let f = finish(&raw);
    let g = pairs
        .iter()
        .map(|&(u, v)| {
            let mut swapped = raw.clone();
            swapped.swap(u, v);
            finish(&swapped)
        })
        .collect();
    Ok(HatFamily {
        pairs: pairs.to_vec(),
        a: a.clone(),
        scale,
        f,
        g,
    })
}

/// Result of the two-case surgery around one annulus.
#[derive(Debug, Clone)]
pub struct AnnulusCase<S: Scalar> {
    pub g: LipFunction<S>,
    /// 1 when `v` lies outside the set, 2 otherwise.
    pub case: u8,
    pub molecule_value: S,
}

/// Builds `g` with `||g|| <= 1`, `g = (1 - eps) f` off `set` and
/// `g(m_uv) >= 1 - eps`.
pub fn annulus_case_extension<S: Scalar>(
    f: &LipFunction<S>,
    set: &[usize],
    u: usize,
    v: usize,
    eps: &S,
) -> Result<AnnulusCase<S>> {
    require_unit_ball(f, "annulus extension")?;
    let space = f.space();
    if u == v {
        return Err(Error::Argument("u and v must differ".into()));
    }
    let pair = AnnulusPair {
        u,
        v,
        set: set.to_vec(),
    };
    let report = check_annuli_hypothesis(space, std::slice::from_ref(&pair), std::slice::from_ref(eps), false)?;
    if let Some(v) = report.violations.first() {
        return Err(violation_error(v, std::slice::from_ref(&pair)));
    }
    let inside: BTreeSet<usize> = set.iter().copied().collect();
    let outside: Vec<usize> = space.points().filter(|p| !inside.contains(p)).collect();
    if outside.is_empty() {
        return Err(Error::Argument("the set must not cover the whole space".into()));
    }
    let shrink = S::one() - eps.clone();
    let outside_vals: Vec<S> = outside.iter().map(|&p| shrink.clone() * f.value(p).clone()).collect();
    let (case, gu) = if inside.contains(&v) {
        let upper = mcshane_extend(space, &outside, &outside_vals, &S::one(), Direction::Upper)?;
        (2, upper.value(u).clone())
    } else {
        let gv = shrink.clone() * f.value(v).clone();
        (1, gv + shrink.clone() * space.dist(u, v).clone())
    };
    let mut subset = outside;
    let mut vals = outside_vals;
    subset.push(u);
    vals.push(gu);
    let ext = mcshane_extend(space, &subset, &vals, &S::one(), Direction::Lower)?;
    let g = ext.normalized();
    if g.norm().greater_than(&S::one()) {
        return Err(Error::Certificate(format!("extension has norm {}", g.norm().render())));
    }
    let molecule_value = g.molecule_value(u, v);
    if molecule_value.less_than(&shrink) {
        return Err(Error::Certificate(format!(
            "extension gives g(m_uv) = {} below {}",
            molecule_value.render(),
            shrink.render()
        )));
    }
    Ok(AnnulusCase {
        g,
        case,
        molecule_value,
    })
}

/// Best molecule value among pairs no longer than `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalityEntry<S> {
    pub radius: S,
    pub value: S,
    pub pair: (usize, usize),
}

/// For every distinct pair distance `r`, ascending, the largest `f(m_uv)`
/// with `d(u,v) <= r`.
pub fn locality_profile<S: Scalar>(f: &LipFunction<S>) -> Result<Vec<LocalityEntry<S>>> {
    if f.norm().is_zero_tol() {
        return Err(Error::Argument("locality profile of a constant function".into()));
    }
    let space = f.space();
    let mut by_length: Vec<(S, S, (usize, usize))> = space
        .ordered_pairs()
        .map(|(u, v)| (space.dist(u, v).clone(), f.molecule_value(u, v), (u, v)))
        .collect();
    by_length.sort_by(|x, y| x.0.compare(&y.0));
    let mut out: Vec<LocalityEntry<S>> = Vec::new();
    let mut best: Option<(S, (usize, usize))> = None;
    for (idx, (d, val, pair)) in by_length.iter().enumerate() {
        if best.as_ref().is_none_or(|(b, _)| val.greater_than(b)) {
            best = Some((val.clone(), *pair));
        }
        let last_of_radius = by_length.get(idx + 1).is_none_or(|next| !next.0.approx_eq(d));
        if last_of_radius {
            let (value, pair) = best.clone().expect("set above");
            out.push(LocalityEntry {
                radius: d.clone(),
                value,
                pair,
            });
        }
    }
    Ok(out)
}

/// Whether some pair with `d(u,v) < eps` has `f(m_uv) > ||f|| - eps`.
pub fn is_eps_local<S: Scalar>(profile: &[LocalityEntry<S>], norm: &S, eps: &S) -> bool {
    let level = norm.clone() - eps.clone();
    profile
        .iter()
        .take_while(|e| e.radius.less_than(eps))
        .any(|e| e.value.greater_than(&level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{
        build_example1_space, build_example2_space, build_hat_space, build_nested_annuli_space, build_two_anchor_space,
        half_line, TwoAnchorLayout,
    };
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn slice_flatten_keeps_norming_of_molecule() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(3, 1), q(4, 1)]).unwrap());
        let g = LipFunction::distance_to_base(s.clone()).neg();
        let h = slice_flatten(&g, &[1], &[3]).unwrap();
        assert!(h.norm() <= &q(1, 1));
        assert_eq!(h.molecule_value(1, 3), g.molecule_value(1, 3));
    }

    #[test]
    fn slice_flatten_of_zero_is_zero() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(3, 1)]).unwrap());
        let h = slice_flatten(&LipFunction::zero(s.clone()), &[1], &[2]).unwrap();
        assert_eq!(h, LipFunction::zero(s));
    }

    #[test]
    fn plateau_on_zero_core() {
        let s = Arc::new(build_example2_space::<Rational>(4).unwrap());
        let l = Example2Layout::new(4);
        let h = tail_plateau(&LipFunction::zero(s.clone()), &l.core(2), &l).unwrap();
        assert_eq!(*h.value(l.x(3)), q(-1, 1));
        assert_eq!(*h.value(l.y(4)), q(1, 1));
        assert_eq!(*h.value(l.u(3)), q(0, 1));
        assert!(h.norm() <= &q(1, 1));
        assert!(tail_plateau(&LipFunction::zero(s), &[0, 1], &l).is_err());
    }

    #[test]
    fn nearest_point_on_two_anchor() {
        let s = Arc::new(build_two_anchor_space::<Rational>(10).unwrap());
        let l = TwoAnchorLayout { n: 10 };
        let f = nearest_point_function(&s, &l.sites()).unwrap();
        for p in s.points() {
            let expect = if l.is_anchor(p) { q(1, 1) } else { q(0, 1) };
            assert_eq!(*f.value(p), expect);
        }
        assert_eq!(
            nearest_point_function(&s, &[0]).unwrap(),
            LipFunction::distance_to_base(s.clone())
        );
        assert!(nearest_point_function(&s, &[1]).is_err());
    }

    #[test]
    fn recursion_on_nested_annuli() {
        let na = build_nested_annuli_space::<Rational>(5).unwrap();
        let space = Arc::new(na.space.clone());
        let pairs: Vec<AnnulusPair> = na
            .pairs
            .iter()
            .zip(&na.sets)
            .map(|(&(u, v), set)| AnnulusPair { u, v, set: set.clone() })
            .collect();
        let c = daugavet_recursive_construction(&space, &pairs).unwrap();
        assert_eq!(c.stages[0].value_u, q(0, 1));
        assert_eq!(c.stages[0].value_v, q(0, 1));
        assert!(c.stages.iter().all(|s| s.holds()));
        assert_eq!(*c.f.norm(), q(1, 1));
    }

    #[test]
    fn hat_family_bounds() {
        let hs = build_hat_space::<Rational>(8, q(1, 1), 2).unwrap();
        let space = Arc::new(hs.space.clone());
        let fam = delta_hat_family(&space, &hs.pairs, &hs.a).unwrap();
        assert_eq!(*fam.f.norm(), q(1, 1));
        assert_eq!(*fam.f.value(hs.pairs[1].0), q(0, 1));
        for i in 3..=8 {
            assert!(fam.f.eval_molecule(&fam.molecule(i)) >= q(i as i64 - 2, i as i64 + 1));
            assert!(fam.f.dist(&fam.g[i - 1]).unwrap() >= q(2 * (i as i64 - 2), i as i64 + 1));
            assert_eq!(*fam.g[i - 1].norm(), q(1, 1));
        }
        let avg = fam.window_average(4, 2).unwrap();
        assert!(fam.f.dist(&avg).unwrap() <= q(1, 1));
    }

    #[test]
    fn annulus_case_one_from_zero() {
        let s = Arc::new(half_line(&[q(0, 1), q(100, 1), q(5, 1), q(6, 1), q(1000, 1)]).unwrap());
        let f = LipFunction::zero(s.clone());
        let eps = q(1, 2);
        let out = annulus_case_extension(&f, &[2], 2, 3, &eps).unwrap();
        assert_eq!(out.case, 1);
        assert_eq!(out.molecule_value, q(1, 2));
        let out2 = annulus_case_extension(&f, &[2, 3], 2, 3, &eps).unwrap();
        assert_eq!(out2.case, 2);
        assert!(out2.molecule_value >= q(1, 2));
        assert!(out2.g.norm() <= &q(1, 1));
    }

    #[test]
    fn annulus_precondition_reports_quadruple() {
        let s = Arc::new(half_line(&[q(0, 1), q(1, 1), q(2, 1), q(3, 1)]).unwrap());
        let f = LipFunction::zero(s.clone());
        match annulus_case_extension(&f, &[1], 1, 2, &q(1, 10)) {
            Err(Error::Precondition { witness, .. }) => assert_eq!(witness.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn profile_ends_at_norm() {
        let s = Arc::new(build_example1_space::<Rational>(6).unwrap());
        let f = LipFunction::distance_to_base(s.clone());
        let prof = locality_profile(&f).unwrap();
        assert_eq!(prof[0].radius, q(13, 6));
        assert_eq!(prof.last().unwrap().value, q(1, 1));
        assert!(!is_eps_local(&prof, f.norm(), &q(2, 1)));
        assert!(locality_profile(&LipFunction::zero(s)).is_err());
    }
}
