use std::sync::Arc;

use crate::diametral::{annuli_battery, verify_separated_annuli};
use crate::error::{Error, Result};
use crate::lip::daugavet_recursive_construction;
use crate::metric::{build_nested_annuli_space, AnnulusPair, FiniteMetricSpace};
use crate::report::{CertificateReport, Rel};
use crate::scalar::Scalar;

use super::labelled_values;

/// The nested-annuli space with its pairs and sets.
pub fn nested_annuli_pairs<S: Scalar>(stages: usize) -> Result<(Arc<FiniteMetricSpace<S>>, Vec<AnnulusPair>)> {
    let na = build_nested_annuli_space::<S>(stages)?;
    let pairs = na
        .pairs
        .iter()
        .zip(&na.sets)
        .map(|(&(u, v), set)| AnnulusPair { u, v, set: set.clone() })
        .collect();
    Ok((Arc::new(na.space), pairs))
}

/// Certifies the disjoint-annuli hypothesis on the first `stages` pairs
/// (at `eps = 1/4` against `battery` seeded elements), then the stage
/// bounds of the recursive construction and the final norm.
pub fn verify_daugavet_recursion<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    pairs: &[AnnulusPair],
    stages: usize,
    battery: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if stages == 0 || stages > pairs.len() {
        return Err(Error::Argument(format!(
            "stages must lie in 1..={}, got {stages}",
            pairs.len()
        )));
    }
    let pairs = &pairs[..stages];
    let eps = S::from_ratio(1, 4);
    let elements = annuli_battery(space, pairs, battery, seed)?;
    let hypothesis = verify_separated_annuli(space, pairs, &eps, &elements)?;
    if !hypothesis.verified {
        let first = hypothesis
            .failures()
            .next()
            .map(|c| c.description.clone())
            .unwrap_or_default();
        return Err(Error::precondition(format!("annuli hypothesis fails: {first}"), vec![]));
    }
    let mut report = CertificateReport::new::<S>("recursive construction yields a norm-one function with stage bounds")
        .with_seed(seed);
    report
        .param("stages", stages)
        .param("points", space.len())
        .param("battery", battery)
        .param("hypothesis_eps", eps.render());
    report.absorb("hypothesis", &hypothesis);
    let built = daugavet_recursive_construction(space, pairs)?;
    for st in &built.stages {
        report.check(
            format!("stage {}: Lipschitz constant", st.stage),
            &st.lip_constant,
            Rel::Le,
            &st.lip_bound,
        );
        report.check(
            format!("stage {}: f(m_u{0} v{0})", st.stage),
            &st.molecule_value,
            Rel::Ge,
            &st.molecule_bound,
        );
    }
    report.check("final ||f||", built.f.norm(), Rel::Eq, &S::one());
    report.param("rescale", built.rescale.render());
    report.witness("f", labelled_values(&built.f));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn four_stages() {
        let (space, pairs) = nested_annuli_pairs::<Rational>(4).unwrap();
        let r = verify_daugavet_recursion(&space, &pairs, 4, 3, 2).unwrap();
        assert!(r.verified, "{}", r.to_json());
        let c = r
            .checks
            .iter()
            .find(|c| c.description == "stage 4: f(m_u4 v4)")
            .unwrap();
        assert_eq!(c.rhs, "7/8");
        let c = r
            .checks
            .iter()
            .find(|c| c.description == "stage 4: Lipschitz constant")
            .unwrap();
        assert_eq!(c.rhs, "15/16");
    }

    #[test]
    fn broken_hypothesis_is_precondition() {
        let (space, mut pairs) = nested_annuli_pairs::<Rational>(3).unwrap();
        let stolen = pairs[2].set[0];
        pairs[1].set.push(stolen);
        assert!(matches!(
            verify_daugavet_recursion(&space, &pairs, 3, 1, 0),
            Err(Error::Precondition { .. })
        ));
    }
}
