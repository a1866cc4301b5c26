use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lip::nearest_point_function;
use crate::metric::{build_two_anchor_space, max_annuli_family, TwoAnchorLayout};
use crate::report::{CertificateReport, Rel};
use crate::scalar::Scalar;

use super::labelled_values;

/// Sizes used for the exhaustive disjoint-annuli search.
const SEARCH_SIZES: [usize; 2] = [6, 8];

/// Checks the segment-witness hypothesis for the distance-to-sites function
/// on the two-anchor space, and that the largest disjoint-annuli family at
/// `eps = 1/4` stays bounded as the space grows.
pub fn verify_two_anchor_daugavet<S: Scalar>(big_n: usize, deltas: &[S]) -> Result<CertificateReport> {
    if big_n < 5 {
        return Err(Error::Argument(format!(
            "two-anchor certificate needs N >= 5, got {big_n}"
        )));
    }
    if deltas.is_empty() {
        return Err(Error::Argument("need at least one delta".into()));
    }
    for d in deltas {
        if !(d.is_positive() && d.less_than(&S::one())) {
            return Err(Error::Argument(format!("delta must lie in (0,1), got {}", d.render())));
        }
    }
    let space = Arc::new(build_two_anchor_space::<S>(big_n)?);
    let layout = TwoAnchorLayout { n: big_n };
    let sites = layout.sites();
    let f = nearest_point_function(&space, &sites)?;

    let mut report =
        CertificateReport::new::<S>("distance to the non-anchor points has segment witnesses at every site");
    report
        .param("N", big_n)
        .param("delta", deltas.iter().map(|d| d.render()).collect::<Vec<_>>().join(","));
    report.check("||f||", f.norm(), Rel::Eq, &S::one());
    report.witness("f", labelled_values(&f));
    for &s in &sites {
        report.check(format!("f({})", space.label(s)), f.value(s), Rel::Eq, &S::zero());
    }
    for anchor in [layout.x(), layout.y()] {
        report.check(
            format!("f({})", space.label(anchor)),
            f.value(anchor),
            Rel::Eq,
            &S::one(),
        );
    }

    for delta in deltas {
        let factor = S::one() - delta.clone();
        let mut missing = Vec::new();
        let mut anchor_only = true;
        let mut count = 0usize;
        for &u in &sites {
            for v in space.points().filter(|&v| v != u) {
                count += 1;
                let witnesses: Vec<usize> = space
                    .seg(u, v, delta)?
                    .into_iter()
                    .filter(|&p| p != u)
                    .filter(|&p| {
                        (f.value(p).clone() - f.value(u).clone())
                            .greater_than(&(factor.clone() * space.dist(u, p).clone()))
                    })
                    .collect();
                if witnesses.is_empty() {
                    missing.push(format!("{}->{}", space.label(u), space.label(v)));
                }
                anchor_only &= witnesses.iter().all(|&p| layout.is_anchor(p));
            }
        }
        report.check_bool(
            format!(
                "delta={}: every (site, v) of {count} has a segment witness",
                delta.render()
            ),
            missing.is_empty(),
            missing.join(" "),
        );
        report.check_bool(
            format!("delta={}: witnesses are anchors", delta.render()),
            anchor_only,
            "",
        );
    }

    let eps = [S::from_ratio(1, 4)];
    let mut sizes = Vec::new();
    for &m in &SEARCH_SIZES {
        let small = build_two_anchor_space::<S>(m)?;
        let (k, family) = max_annuli_family(&small, &eps, 6)?;
        report.param(format!("annuli_family_N{m}"), k);
        report.witness(
            format!("annuli_family_N{m}"),
            family
                .iter()
                .map(|p| {
                    (
                        small.label(p.u).to_string(),
                        small.label(p.v).to_string(),
                        p.set.iter().map(|&x| small.label(x).to_string()).collect::<Vec<_>>(),
                    )
                })
                .collect::<Vec<_>>(),
        );
        sizes.push(k);
    }
    report.check(
        format!(
            "largest disjoint-annuli family at N={} vs N={}",
            SEARCH_SIZES[1], SEARCH_SIZES[0]
        ),
        &S::from_int(sizes[1] as i64),
        Rel::Le,
        &S::from_int(sizes[0] as i64),
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn certificate_passes() {
        let r = verify_two_anchor_daugavet(10, &[Rational::from_ratio(1, 2), Rational::from_ratio(1, 8)]).unwrap();
        assert!(r.verified, "{}", r.to_json());
    }

    #[test]
    fn small_n_rejected() {
        assert!(verify_two_anchor_daugavet::<Rational>(4, &[Rational::from_ratio(1, 2)]).is_err());
    }
}
