use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free::free_dist;
use crate::lip::delta_hat_family;
use crate::metric::{build_hat_space, extract_separated_pairs, ExtractionMode, FiniteMetricSpace};
use crate::report::{CertificateReport, Rel};
use crate::scalar::Scalar;

use super::labelled_values;

/// Where the separated pairs come from.
#[derive(Debug, Clone)]
pub enum DeltaInput<S: Scalar> {
    /// The hat space with the given scale.
    Generated { a: S },
    /// Pairs extracted from a given space at the given tolerance.
    Space {
        space: Arc<FiniteMetricSpace<S>>,
        tolerance: S,
    },
}

/// Builds the hat family on `k` separated pairs and certifies
/// `||f|| = 1`, `||f - g_i|| >= 2(i-2)/(i+1)` for `3 <= i <= k`,
/// `||f - avg||` at most `4/len` for every window whose length is a multiple
/// of 4, and `||m_i - m_j|| >= 1` for `5 <= i < j <= k`.
pub fn verify_delta_existence<S: Scalar>(input: &DeltaInput<S>, k: usize) -> Result<CertificateReport> {
    if k < 3 {
        return Err(Error::Argument(format!("need at least 3 pairs, got {k}")));
    }
    let mut report = CertificateReport::new::<S>("the hat function lies in the closed hull of its Delta sets");
    report.param("k", k);
    let (space, pairs, a) = match input {
        DeltaInput::Generated { a } => {
            let hat = build_hat_space(k, a.clone(), 0)?;
            report.param("source", "generated");
            (Arc::new(hat.space), hat.pairs, hat.a)
        }
        DeltaInput::Space { space, tolerance } => {
            report
                .param("source", "extracted")
                .param("tolerance", tolerance.render());
            let seq = extract_separated_pairs(space, tolerance, ExtractionMode::Pairs, None)?;
            let found = seq.pairs.len();
            report.check(
                "extracted pairs",
                &S::from_int(found as i64),
                Rel::Ge,
                &S::from_int(k as i64),
            );
            let Some(a) = seq.a.clone().filter(|_| found >= 3) else {
                report.param("pairs_found", found);
                return Ok(report);
            };
            let mut pairs = seq.pairs;
            pairs.truncate(k);
            (space.clone(), pairs, a)
        }
    };
    let k = pairs.len();
    report
        .param("points", space.len())
        .param("a", a.render())
        .param("pairs_used", k);
    let fam = delta_hat_family(&space, &pairs, &a)?;
    report.check("||f||", fam.f.norm(), Rel::Eq, &S::one());
    report.witness("f", labelled_values(&fam.f));
    report.witness(
        "pairs",
        pairs
            .iter()
            .map(|&(u, v)| [space.label(u).to_string(), space.label(v).to_string()])
            .collect::<Vec<_>>(),
    );
    for i in 3..=k {
        let g = &fam.g[i - 1];
        let dist = fam.f.sub(g)?.norm().clone();
        let bound = S::from_ratio(2 * (i as i64 - 2), i as i64 + 1);
        report.check(format!("||f - g_{i}||"), &dist, Rel::Ge, &bound);
    }
    for len in (4..=k).step_by(4) {
        let bound = S::from_ratio(4, len as i64);
        for offset in 0..=k - len {
            let avg = fam.window_average(len, offset)?;
            let dist = fam.f.sub(&avg)?.norm().clone();
            report.check(
                format!("||f - avg(g_{}..g_{})||", offset + 1, offset + len),
                &dist,
                Rel::Le,
                &bound,
            );
        }
    }
    let index_pairs: Vec<(usize, usize)> = (5..=k).flat_map(|i| (i + 1..=k).map(move |j| (i, j))).collect();
    let dists: Vec<Result<S>> = index_pairs
        .par_iter()
        .map(|&(i, j)| {
            let mi = fam.molecule(i).to_element(&space);
            let mj = fam.molecule(j).to_element(&space);
            free_dist(&mi, &mj)
        })
        .collect();
    for (&(i, j), d) in index_pairs.iter().zip(dists) {
        report.check(format!("||m_{i} - m_{j}||"), &d?, Rel::Ge, &S::one());
    }
    Ok(report)
}
