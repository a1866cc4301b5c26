use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free::{free_norm, FreeElement};
use crate::lip::{lipschitz_constant, LipFunction};
use crate::metric::{build_example1_space, FiniteMetricSpace};
use crate::optimizer::max_over_pairs;
use crate::random::substream;
use crate::report::{CertificateReport, Rel};
use crate::scalar::Scalar;

use super::{labelled_values, pair_labels};

/// `1/(3n) - 1/(3(n+1))`.
pub fn example1_alpha<S: Scalar>(n: usize) -> S {
    let n = n as i64;
    S::from_ratio(1, 3 * n) - S::from_ratio(1, 3 * (n + 1))
}

/// `(1/(n-1)) sum_{i<n} m_{i n}`, with points labelled `1..=N`.
pub fn example1_mu<S: Scalar>(space: &Arc<FiniteMetricSpace<S>>, n: usize) -> Result<FreeElement<S>> {
    if n < 2 || n > space.len() {
        return Err(Error::Argument(format!("index n = {n} outside 2..={}", space.len())));
    }
    let mut mu = FreeElement::zero(space.clone());
    for i in 1..n {
        mu = mu.add(&FreeElement::molecule(space.clone(), i - 1, n - 1))?;
    }
    Ok(mu.scale(&S::from_ratio(1, n as i64 - 1)))
}

/// A function brought to the normal form used by the certificate.
#[derive(Debug, Clone)]
pub struct SignNormalized<S: Scalar> {
    pub f: LipFunction<S>,
    pub flipped: bool,
    /// Smallest label `n >= 2` with `f(m_{1n}) >= 0`.
    pub n: usize,
}

fn normal_index<S: Scalar>(f: &LipFunction<S>) -> Option<usize> {
    let space = f.space();
    let three_quarters = S::from_ratio(3, 4);
    if space
        .non_base_points()
        .any(|k| f.molecule_value(k, 0).greater_than(&three_quarters))
    {
        return None;
    }
    space
        .non_base_points()
        .find(|&k| !f.molecule_value(0, k).is_negative())
        .map(|k| k + 1)
}

/// Keeps `f` when some `f(m_{1n}) >= 0` and every `f(m_{k1}) <= 3/4`,
/// otherwise replaces it by `-f`.
pub fn sign_normalize<S: Scalar>(f: &LipFunction<S>) -> Result<SignNormalized<S>> {
    if let Some(n) = normal_index(f) {
        return Ok(SignNormalized {
            f: f.clone(),
            flipped: false,
            n,
        });
    }
    let neg = f.neg();
    normal_index(&neg)
        .map(|n| SignNormalized {
            f: neg,
            flipped: true,
            n,
        })
        .ok_or_else(|| {
            Error::precondition(
                "neither f nor -f is in normal form; is the norm 1?",
                f.norming_pair().map(|(p, q)| vec![p, q]).unwrap_or_default(),
            )
        })
}

/// Draws integer values with `f(k) > 0` for `2 <= k < n` and `f(n) <= 0`,
/// rescales to norm one and retries until the normal form has index `n`.
pub fn sample_example1_function<S: Scalar>(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace<S>>,
    n: usize,
) -> Result<SignNormalized<S>> {
    const RANGE: i64 = 12;
    if n < 2 || n > space.len() {
        return Err(Error::Argument(format!("index n = {n} outside 2..={}", space.len())));
    }
    for _ in 0..10_000 {
        let values: Vec<S> = space
            .points()
            .map(|p| {
                let k = rng.gen_range(match p + 1 {
                    1 => 0..=0,
                    label if label < n => 1..=RANGE,
                    label if label == n => -RANGE..=0,
                    _ => -RANGE..=RANGE,
                });
                S::from_int(k)
            })
            .collect();
        let (c, _) = lipschitz_constant(space, &values);
        if !c.is_positive() {
            continue;
        }
        let f = LipFunction::new(space.clone(), values.into_iter().map(|v| v / c.clone()).collect())?;
        let normal = sign_normalize(&f)?;
        if normal.n == n {
            return Ok(normal);
        }
    }
    Err(Error::Argument(format!("no sample reached normal index {n}")))
}

struct SampleOutcome<S: Scalar> {
    normal: SignNormalized<S>,
    value: Option<S>,
    pair: Option<(usize, usize)>,
    solved: usize,
}

/// Certifies that every `g` in the ball with `(f - g)(m_kl) >= 2 - alpha`
/// for some pair has `mu(g) < 1 - alpha/n`, for the supplied `f` or for
/// `samples` seeded random functions of normal index `n`.
pub fn verify_example1<S: Scalar>(
    big_n: usize,
    n: usize,
    f: Option<&LipFunction<S>>,
    samples: usize,
    seed: u64,
) -> Result<CertificateReport> {
    if n < 2 || n >= big_n {
        return Err(Error::Argument(format!("need 2 <= n < N, got n = {n}, N = {big_n}")));
    }
    let space = Arc::new(build_example1_space::<S>(big_n)?);
    let alpha: S = example1_alpha(n);
    let mu = example1_mu(&space, n)?;
    let target = S::one() - alpha.clone() / S::from_int(n as i64);
    let threshold = S::from_int(2) - alpha.clone();

    let mut report = CertificateReport::new::<S>("no Delta-far g enters the slice S(mu, alpha/n)").with_seed(seed);
    report
        .param("N", big_n)
        .param("n", n)
        .param("alpha", format!("1/{} - 1/{} = {}", 3 * n, 3 * (n + 1), alpha.render()))
        .param("samples", if f.is_some() { 1 } else { samples });
    report.check("||mu||", &free_norm(&mu)?.value, Rel::Eq, &S::one());

    let functions: Vec<SignNormalized<S>> = match f {
        Some(f) => {
            f.ensure_same_space(&space)?;
            let normal = sign_normalize(f)?;
            if normal.n != n {
                return Err(Error::precondition(
                    format!("f has normal index {}, not {n}", normal.n),
                    vec![normal.n - 1],
                ));
            }
            vec![normal]
        }
        None => (0..samples)
            .into_par_iter()
            .map(|t| sample_example1_function(&mut substream(seed, t as u64), &space, n))
            .collect::<Result<_>>()?,
    };
    let outcomes: Vec<SampleOutcome<S>> = functions
        .into_par_iter()
        .map(|normal| {
            let best = max_over_pairs(&normal.f, &threshold, &mu, None)?;
            Ok(SampleOutcome {
                value: best.value,
                pair: best.pair,
                solved: best.solved,
                normal,
            })
        })
        .collect::<Result<_>>()?;

    let mut worst: Option<S> = None;
    for (t, out) in outcomes.iter().enumerate() {
        let g = &out.normal.f;
        report.check(format!("f{t}: norm"), g.norm(), Rel::Eq, &S::one());
        report.check(
            format!("f{t}: f(m_1n)"),
            &g.molecule_value(0, n - 1),
            Rel::Ge,
            &S::zero(),
        );
        for k in 1..n - 1 {
            report.check(
                format!("f{t}: f(m_1{}) below 0", k + 1),
                &g.molecule_value(0, k),
                Rel::Lt,
                &S::zero(),
            );
        }
        let top = space
            .non_base_points()
            .map(|k| g.molecule_value(k, 0))
            .reduce(|a, b| a.max_of(b))
            .expect("N >= 2");
        report.check(format!("f{t}: max_k f(m_k1)"), &top, Rel::Le, &S::from_ratio(3, 4));
        match &out.value {
            Some(v) => {
                report.check(
                    format!("f{t}: max mu(g) over {} far pairs", out.solved),
                    v,
                    Rel::Lt,
                    &target,
                );
                if worst.as_ref().is_none_or(|w| v.greater_than(w)) {
                    worst = Some(v.clone());
                }
            }
            None => {
                report.check_bool(
                    format!("f{t}: no g in the ball is (2 - alpha)-far"),
                    true,
                    "all pairs infeasible",
                );
            }
        }
        if t == 0 {
            report.witness("f0", labelled_values(g));
            report.witness("f0_flipped", out.normal.flipped);
            if let Some(pair) = out.pair {
                report.witness("f0_best_pair", pair_labels(g, pair));
            }
        }
    }
    if let Some(w) = worst {
        report.param("worst_value", w.render());
    }
    report.param("bound", target.render());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;
    use crate::scalar::Rational;

    #[test]
    fn alpha_values() {
        assert_eq!(example1_alpha::<Rational>(2), Rational::from_ratio(1, 18));
        assert_eq!(example1_alpha::<Rational>(3), Rational::from_ratio(1, 36));
    }

    #[test]
    fn mu_has_norm_one() {
        let s = Arc::new(build_example1_space::<Rational>(8).unwrap());
        for n in 2..=6 {
            let mu = example1_mu(&s, n).unwrap();
            assert_eq!(free_norm(&mu).unwrap().value, Rational::one());
        }
    }

    #[test]
    fn sampler_hits_requested_index() {
        let s = Arc::new(build_example1_space::<Rational>(10).unwrap());
        for n in 2..=5 {
            let normal = sample_example1_function(&mut rng(n as u64), &s, n).unwrap();
            assert_eq!(normal.n, n);
            assert_eq!(*normal.f.norm(), Rational::one());
        }
    }

    #[test]
    fn small_certificate_passes() {
        let r = verify_example1::<Rational>(10, 3, None, 4, 1).unwrap();
        assert!(r.verified, "{}", r.to_json());
        assert_eq!(r.parameters["alpha"], "1/9 - 1/12 = 1/36");
    }

    #[test]
    fn n_out_of_range() {
        assert!(matches!(
            verify_example1::<Rational>(5, 5, None, 1, 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            verify_example1::<Rational>(5, 1, None, 1, 0),
            Err(Error::Argument(_))
        ));
    }
}
