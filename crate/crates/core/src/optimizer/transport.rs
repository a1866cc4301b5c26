use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free::FreeElement;
use crate::scalar::Scalar;

/// Mass shipped along arcs `(from, to)`; the base absorbs any imbalance.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S> {
    pub flow: BTreeMap<(usize, usize), S>,
    pub cost: S,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanViolation {
    pub point: usize,
    pub reason: String,
}

impl<S: Scalar> TransportPlan<S> {
    /// Recomputes the cost and checks nonnegativity and mass balance at every
    /// non-base point.
    pub fn verify(&self, mu: &FreeElement<S>) -> std::result::Result<(), PlanViolation> {
        let space = mu.space();
        let mut net = vec![S::zero(); space.len()];
        let mut cost = S::zero();
        for (&(p, q), m) in &self.flow {
            if m.is_negative() {
                return Err(PlanViolation {
                    point: p,
                    reason: format!("negative mass on arc ({p},{q})"),
                });
            }
            net[p] = net[p].clone() + m.clone();
            net[q] = net[q].clone() - m.clone();
            cost = cost + m.clone() * space.dist(p, q).clone();
        }
        for p in space.non_base_points() {
            if !net[p].approx_eq(&mu.weight(p)) {
                return Err(PlanViolation {
                    point: p,
                    reason: format!("net outflow {} but weight {}", net[p].render(), mu.weight(p).render()),
                });
            }
        }
        if !cost.approx_eq(&self.cost) {
            return Err(PlanViolation {
                point: space.base(),
                reason: format!("stated cost {} but arcs sum to {}", self.cost.render(), cost.render()),
            });
        }
        Ok(())
    }
}

/// Optimal transport of the positive part of `mu` onto its negative part
/// (with the base balancing the total), by successive shortest paths.
pub fn min_cost_transport<S: Scalar>(mu: &FreeElement<S>) -> Result<TransportPlan<S>> {
    let space = mu.space();
    let base = space.base();
    let total = mu.weights().values().fold(S::zero(), |a, w| a + w.clone());
    let mut sources: Vec<(usize, S)> = Vec::new();
    let mut sinks: Vec<(usize, S)> = Vec::new();
    let mut nodes: Vec<(usize, S)> = mu.weights().iter().map(|(&p, w)| (p, w.clone())).collect();
    if !total.is_zero_tol() {
        nodes.push((base, -total));
        nodes.sort_by_key(|(p, _)| *p);
    }
    for (p, w) in nodes {
        if w.is_positive() {
            sources.push((p, w));
        } else if w.is_negative() {
            sinks.push((p, -w));
        }
    }
    let (ns, nt) = (sources.len(), sinks.len());
    let cost = |i: usize, k: usize| space.dist(sources[i].0, sinks[k].0).clone();
    let mut flow: Vec<Vec<S>> = vec![vec![S::zero(); nt]; ns];
    let mut supply: Vec<S> = sources.iter().map(|(_, s)| s.clone()).collect();
    let mut demand: Vec<S> = sinks.iter().map(|(_, s)| s.clone()).collect();

    let max_rounds = 4 * (ns + nt + 1) * (ns * nt + 1) + 16;
    for _ in 0..max_rounds {
        if supply.iter().all(|s| !s.is_positive()) || demand.iter().all(|d| !d.is_positive()) {
            break;
        }
        // Bellman-Ford over sources (0..ns) and sinks (ns..ns+nt).
        let v = ns + nt;
        let mut dist: Vec<Option<S>> = vec![None; v];
        let mut pred: Vec<Option<usize>> = vec![None; v];
        for i in 0..ns {
            if supply[i].is_positive() {
                dist[i] = Some(S::zero());
            }
        }
        for _ in 0..v {
            let mut changed = false;
            for i in 0..ns {
                let Some(di) = dist[i].clone() else { continue };
                for k in 0..nt {
                    let cand = di.clone() + cost(i, k);
                    if dist[ns + k].as_ref().is_none_or(|dk| cand.less_than(dk)) {
                        dist[ns + k] = Some(cand);
                        pred[ns + k] = Some(i);
                        changed = true;
                    }
                }
            }
            for k in 0..nt {
                let Some(dk) = dist[ns + k].clone() else { continue };
                for i in 0..ns {
                    if !flow[i][k].is_positive() {
                        continue;
                    }
                    let cand = dk.clone() - cost(i, k);
                    if dist[i].as_ref().is_none_or(|d| cand.less_than(d)) {
                        dist[i] = Some(cand);
                        pred[i] = Some(ns + k);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let target = (0..nt)
            .filter(|&k| demand[k].is_positive())
            .filter_map(|k| dist[ns + k].clone().map(|d| (k, d)))
            .fold(None::<(usize, S)>, |best, (k, d)| match best {
                Some((_, ref bd)) if !d.less_than(bd) => best,
                _ => Some((k, d)),
            });
        let Some((k_end, _)) = target else {
            return Err(Error::Certificate("transport: no augmenting path".into()));
        };
        // Walk back to the starting source.
        let mut path = vec![ns + k_end];
        let mut cur = ns + k_end;
        while let Some(p) = pred[cur] {
            path.push(p);
            cur = p;
            if path.len() > 2 * v + 2 {
                return Err(Error::Certificate("transport: cyclic predecessor chain".into()));
            }
        }
        path.reverse();
        let start = path[0];
        let mut delta = supply[start].clone().min_of(demand[k_end].clone());
        for w in path.windows(2) {
            if w[0] >= ns {
                // backward arc sink -> source cancels flow
                delta = delta.min_of(flow[w[1]][w[0] - ns].clone());
            }
        }
        for w in path.windows(2) {
            if w[0] < ns {
                let k = w[1] - ns;
                flow[w[0]][k] = flow[w[0]][k].clone() + delta.clone();
            } else {
                let i = w[1];
                let k = w[0] - ns;
                flow[i][k] = flow[i][k].clone() - delta.clone();
                if flow[i][k].is_zero_tol() {
                    flow[i][k] = S::zero();
                }
            }
        }
        supply[start] = supply[start].clone() - delta.clone();
        demand[k_end] = demand[k_end].clone() - delta;
        for s in supply.iter_mut().chain(demand.iter_mut()) {
            if s.is_zero_tol() {
                *s = S::zero();
            }
        }
    }
    if supply.iter().any(|s| s.is_positive()) || demand.iter().any(|d| d.is_positive()) {
        return Err(Error::Certificate("transport did not converge".into()));
    }
    let mut plan = BTreeMap::new();
    let mut total_cost = S::zero();
    for i in 0..ns {
        for k in 0..nt {
            if flow[i][k].is_positive() {
                total_cost = total_cost + flow[i][k].clone() * cost(i, k);
                plan.insert((sources[i].0, sinks[k].0), flow[i][k].clone());
            }
        }
    }
    Ok(TransportPlan {
        flow: plan,
        cost: total_cost,
    })
}
