use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::free::{free_norm, FreeElement};
use crate::lip::annulus_case_extension;
use crate::metric::{check_annuli_hypothesis, AnnulusPair, FiniteMetricSpace, HypothesisViolation};
use crate::random::{random_norm_one_element, substream};
use crate::report::{CertificateReport, Rel};
use crate::scalar::Scalar;

/// `count` random norm-one elements, each supported off some set `A_i`
/// that avoids the base point.
pub fn annuli_battery<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    pairs: &[AnnulusPair],
    count: usize,
    seed: u64,
) -> Result<Vec<FreeElement<S>>> {
    let usable: Vec<&AnnulusPair> = pairs.iter().filter(|p| !p.set.contains(&space.base())).collect();
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        let mut rng = substream(seed, t as u64);
        if usable.is_empty() {
            return Err(Error::Argument("every set contains the base point".into()));
        }
        let pick = usable[rng.gen_range(0..usable.len())];
        let outside: Vec<usize> = space.non_base_points().filter(|p| !pick.set.contains(p)).collect();
        if outside.is_empty() {
            return Err(Error::Argument("a set covers every non-base point".into()));
        }
        let support = rng.gen_range(1..=outside.len().min(4));
        out.push(random_norm_one_element(&mut rng, space, &outside, support)?);
    }
    Ok(out)
}

/// Certifies the disjoint-annuli hypothesis for `pairs` at `eps` and, for
/// every element `F` of `battery`, that `max_i ||F + m_{u_i v_i}|| >=
/// 2 - 2 eps` over the annuli whose set misses the support of `F` and the
/// base. Each such bound is also witnessed by the explicit function from
/// [`annulus_case_extension`].
pub fn verify_separated_annuli<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    pairs: &[AnnulusPair],
    eps: &S,
    battery: &[FreeElement<S>],
) -> Result<CertificateReport> {
    let mut report = CertificateReport::new::<S>("disjoint annuli give ||F + m_i|| >= 2 - 2 eps");
    report
        .param("points", space.len())
        .param("pairs", pairs.len())
        .param("eps", eps.render())
        .param("battery", battery.len());
    let eps_all = vec![eps.clone(); pairs.len()];
    let hyp = check_annuli_hypothesis(space, pairs, &eps_all, false)?;
    let overlaps: Vec<String> = hyp
        .violations
        .iter()
        .filter_map(|v| match v {
            HypothesisViolation::Overlap { i, j, point } => {
                Some(format!("A{}/A{} share {}", i + 1, j + 1, space.label(*point)))
            }
            _ => None,
        })
        .collect();
    report.check_bool("sets are pairwise disjoint", overlaps.is_empty(), overlaps.join("; "));
    let outside: Vec<String> = hyp
        .violations
        .iter()
        .filter_map(|v| match v {
            HypothesisViolation::CenterOutside { i } => Some(format!("u{} not in A{}", i + 1, i + 1)),
            _ => None,
        })
        .collect();
    report.check_bool("u_i lies in A_i", outside.is_empty(), outside.join("; "));
    let bad_ineq = hyp
        .violations
        .iter()
        .filter(|v| matches!(v, HypothesisViolation::Inequality { .. }))
        .count();
    match &hyp.min_slack {
        Some(slack) => {
            report.check(
                format!("annulus inequality on {} quadruples ({bad_ineq} failing)", hyp.checked),
                slack,
                Rel::Ge,
                &S::zero(),
            );
        }
        None => {
            report.check_bool("annulus inequality (no quadruples to check)", true, "");
        }
    }

    let target = S::from_int(2) - S::from_int(2) * eps.clone();
    let sets: Vec<BTreeSet<usize>> = pairs.iter().map(|p| p.set.iter().copied().collect()).collect();
    for (t, f_elem) in battery.iter().enumerate() {
        let norm = free_norm(f_elem)?;
        report.check(format!("F{t}: norm"), &norm.value, Rel::Eq, &S::one());
        let blocked: BTreeSet<usize> = f_elem.support().chain(std::iter::once(space.base())).collect();
        let admissible: Vec<usize> = (0..pairs.len()).filter(|&i| sets[i].is_disjoint(&blocked)).collect();
        if admissible.is_empty() {
            report.check_bool(format!("F{t}: some annulus avoids the support"), false, "none");
            continue;
        }
        let mut best: Option<(S, usize)> = None;
        let mut best_witness: Option<(S, usize)> = None;
        for &i in &admissible {
            let AnnulusPair { u, v, .. } = pairs[i];
            let m = FreeElement::molecule(space.clone(), u, v);
            let value = free_norm(&f_elem.add(&m)?)?.value;
            if best.as_ref().is_none_or(|(b, _)| value.greater_than(b)) {
                best = Some((value, i));
            }
            match annulus_case_extension(&norm.witness, &pairs[i].set, u, v, eps) {
                Ok(case) => {
                    let w = case.g.eval(f_elem)? + case.molecule_value;
                    if best_witness.as_ref().is_none_or(|(b, _)| w.greater_than(b)) {
                        best_witness = Some((w, i));
                    }
                }
                Err(Error::Precondition { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        let (value, i) = best.expect("admissible is non-empty");
        report.check(
            format!(
                "F{t}: max ||F + m_i|| over {} annuli (best i = {})",
                admissible.len(),
                i + 1
            ),
            &value,
            Rel::Ge,
            &target,
        );
        match best_witness {
            Some((w, i)) => {
                report.check(
                    format!("F{t}: F(g) + g(m_i) with the constructed g (i = {})", i + 1),
                    &w,
                    Rel::Ge,
                    &target,
                );
            }
            None => {
                report.check_bool(
                    format!("F{t}: constructed witness"),
                    false,
                    "hypothesis fails on every admissible annulus",
                );
            }
        }
    }
    Ok(report)
}
