use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free::{free_dist, free_norm, molecule_distance_formula, FreeElement, Molecule};
use crate::lip::{tail_plateau, LipFunction};
use crate::metric::{build_example2_space, Example2Family, Example2Layout, FiniteMetricSpace};
use crate::optimizer::max_over_pairs;
use crate::random::{random_lip_function, random_norm_one_element, substream};
use crate::report::{CertificateReport, Rel};
use crate::scalar::Scalar;

use super::labelled_values;

#[derive(Debug, Clone)]
pub struct Example2Params<S> {
    /// Family length of the truncated space (`4N` points).
    pub big_n: usize,
    /// Core size; the pair `(u_{n+1}, v_{n+1})` is the first tail pair.
    pub n: usize,
    pub alphas: Vec<S>,
    pub eps: Vec<S>,
    pub samples: usize,
    pub seed: u64,
}

/// `0` on `X` and `U`, `-2` on `Y` and `V` (the base `x_1` is on `X`).
pub fn example2_function<S: Scalar>(
    space: &Arc<FiniteMetricSpace<S>>,
    layout: &Example2Layout,
) -> Result<LipFunction<S>> {
    let values = space
        .points()
        .map(|p| match layout.classify(p).0 {
            Example2Family::X | Example2Family::U => S::zero(),
            Example2Family::Y | Example2Family::V => S::from_int(-2),
        })
        .collect();
    LipFunction::new(space.clone(), values)
}

fn is_positive_side(layout: &Example2Layout, p: usize) -> bool {
    matches!(layout.classify(p).0, Example2Family::X | Example2Family::U)
}

/// Certifies the w*-Daugavet part by explicit plateau witnesses and the
/// non-Delta part by per-pair LP maxima.
pub fn verify_example2<S: Scalar>(params: &Example2Params<S>) -> Result<CertificateReport> {
    let Example2Params {
        big_n,
        n,
        alphas,
        eps,
        samples,
        seed,
    } = params;
    let (big_n, n, seed) = (*big_n, *n, *seed);
    if n == 0 || n + 1 > big_n {
        return Err(Error::Argument(format!(
            "need 1 <= n and n + 1 <= N, got n = {n}, N = {big_n}"
        )));
    }
    for a in alphas {
        if !(a.is_positive() && a.less_than(&S::one())) {
            return Err(Error::Argument(format!("alpha must lie in (0,1), got {}", a.render())));
        }
    }
    for e in eps {
        if !(e.is_positive() && e.less_than(&S::from_ratio(1, 2))) {
            return Err(Error::Argument(format!("eps must lie in (0,1/2), got {}", e.render())));
        }
    }
    let space = Arc::new(build_example2_space::<S>(big_n)?);
    let layout = Example2Layout::new(big_n);
    let f = example2_function(&space, &layout)?;
    let core = layout.core(n);
    let core_support: Vec<usize> = core.iter().copied().filter(|&p| p != space.base()).collect();
    let (xt, yt) = (layout.x(n + 1), layout.y(n + 1));
    let tail = Molecule {
        u: layout.u(n + 1),
        v: layout.v(n + 1),
    };
    let tail_elem = tail.to_element(&space);

    let mut report = CertificateReport::new::<S>("w*-Daugavet but not a Delta-point").with_seed(seed);
    report
        .param("N", big_n)
        .param("n", n)
        .param("points", space.len())
        .param("alpha", alphas.iter().map(|a| a.render()).collect::<Vec<_>>().join(","))
        .param("eps", eps.iter().map(|e| e.render()).collect::<Vec<_>>().join(","))
        .param("samples", samples);
    report.check("||f||", f.norm(), Rel::Eq, &S::one());
    report.witness("f", labelled_values(&f));

    // w*-Daugavet part.
    let jobs: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|a| (0..*samples).map(move |t| (a, t)))
        .collect();
    let results: Vec<Result<(S, S, S, S, S)>> = jobs
        .par_iter()
        .map(|&(ai, t)| {
            let alpha = &alphas[ai];
            let mut rng = substream(seed, (ai * samples + t) as u64);
            let mu = random_norm_one_element(&mut rng, &space, &core_support, 4)?;
            let witness = free_norm(&mu)?.witness;
            let noise = random_lip_function(&mut rng, &space, 6)?;
            let t_mix = alpha.clone() / S::from_int(4);
            let g = witness.scale(&(S::one() - t_mix.clone())).add(&noise.scale(&t_mix))?;
            let h = tail_plateau(&g, &core, &layout)?;
            let g_mu = g.eval(&mu)?;
            let h_mu = h.eval(&mu)?;
            let gap = f.molecule_value(xt, yt) - h.molecule_value(xt, yt);
            let dist = f.sub(&h)?.norm().clone();
            Ok((g_mu, h_mu, h.norm().clone(), gap, dist))
        })
        .collect();
    for (&(ai, t), r) in jobs.iter().zip(results) {
        let (g_mu, h_mu, h_norm, gap, dist) = r?;
        let alpha = &alphas[ai];
        let floor = S::one() - alpha.clone();
        let tag = format!("alpha={} mu{t}", alpha.render());
        report.check(format!("{tag}: g(mu)"), &g_mu, Rel::Gt, &floor);
        report.check(format!("{tag}: h(mu)"), &h_mu, Rel::Gt, &floor);
        report.check(format!("{tag}: ||h||"), &h_norm, Rel::Le, &S::one());
        report.check(
            format!("{tag}: (f - h)(m_x{0} y{0})", n + 1),
            &gap,
            Rel::Eq,
            &S::from_int(2),
        );
        report.check(format!("{tag}: ||f - h||"), &dist, Rel::Eq, &S::from_int(2));
    }

    // Core witness pairs: positive side to negative side.
    let witness_pairs: Vec<(usize, usize)> = core
        .iter()
        .flat_map(|&p| core.iter().map(move |&q| (p, q)))
        .filter(|&(p, q)| is_positive_side(&layout, p) && !is_positive_side(&layout, q))
        .collect();
    let core_pairs: Vec<(usize, usize)> = core
        .iter()
        .flat_map(|&p| core.iter().map(move |&q| (p, q)))
        .filter(|(p, q)| p != q)
        .collect();
    report.check(
        format!("f(m_u{0} v{0})", n + 1),
        &f.eval_molecule(&tail),
        Rel::Eq,
        &S::one(),
    );

    // Non-Delta part.
    for e in eps {
        let two_e = S::from_int(2) * e.clone();
        let member = max_over_pairs(&f, &(S::from_int(2) - e.clone()), &tail_elem, Some(&core_pairs))?;
        let relaxed = max_over_pairs(&f, &(S::from_int(2) - two_e.clone()), &tail_elem, Some(&core_pairs))?;
        let tag = format!("eps={}", e.render());
        match (&member.value, &relaxed.value) {
            (Some(v), Some(w)) => {
                report.check(
                    format!(
                        "{tag}: max g(m_tail) over g with a core pair at ||f - g|| >= 2 - eps ({} LPs)",
                        member.solved
                    ),
                    v,
                    Rel::Lt,
                    &two_e,
                );
                report.check(
                    format!(
                        "{tag}: max g(m_tail) over g with (f - g)(m_pq) >= 2 - 2eps ({} LPs)",
                        relaxed.solved
                    ),
                    w,
                    Rel::Le,
                    &two_e,
                );
                report.check(
                    format!("{tag}: f(m_tail) - max g(m_tail)"),
                    &(S::one() - v.clone()),
                    Rel::Gt,
                    &(S::one() - two_e.clone()),
                );
            }
            _ => {
                report.check_bool(format!("{tag}: witness LPs feasible"), false, "no feasible core pair");
            }
        }
    }

    // Molecule distances from the tail molecule.
    let dists: Vec<Result<(S, S)>> = witness_pairs
        .par_iter()
        .map(|&(p, q)| {
            let m = FreeElement::molecule(space.clone(), p, q);
            let lp = free_dist(&tail_elem, &m)?;
            let formula = molecule_distance_formula(&space, tail, Molecule { u: p, v: q });
            Ok((lp, formula))
        })
        .collect();
    let mut all_one = true;
    let mut matches = true;
    let mut first_bad = String::new();
    for (k, (&(p, q), r)) in witness_pairs.iter().zip(dists).enumerate() {
        let (lp, formula) = r?;
        if k == 0 {
            report.witness(
                "molecule_distance",
                serde_json::json!({
                    "from": [space.label(tail.u), space.label(tail.v)],
                    "to": [space.label(p), space.label(q)],
                    "lp": lp.render(),
                    "formula": formula.render(),
                }),
            );
        }
        let ok_one = lp.approx_eq(&S::one());
        let ok_formula = lp.approx_eq(&formula);
        if (!ok_one || !ok_formula) && first_bad.is_empty() {
            first_bad = format!(
                "m_{} {}: LP {} formula {}",
                space.label(p),
                space.label(q),
                lp.render(),
                formula.render()
            );
        }
        all_one &= ok_one;
        matches &= ok_formula;
    }
    report.check_bool(
        format!("||m_tail - m_pq|| = 1 on {} core witness pairs", witness_pairs.len()),
        all_one,
        first_bad.clone(),
    );
    report.check_bool(
        "LP distance equals the closed form on every core witness pair",
        matches,
        first_bad,
    );
    Ok(report)
}
