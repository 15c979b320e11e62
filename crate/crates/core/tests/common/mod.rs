//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls into the evaluator or search modules; costs are
//! expanded straight from the model's matrices.

#![allow(dead_code)]

use scall_core::{ArchitectureModel, TradeoffVector};

/// Cost formula as a literal double loop, with feasibility checked from
/// scratch. Returns `None` for infeasible allocations.
pub fn brute_cost(model: &ArchitectureModel, f: &TradeoffVector, p: &[usize]) -> Option<f64> {
    let (n, m, l) = (model.n(), model.m(), model.l());
    for (i, &h) in p.iter().enumerate() {
        let allowed = &model.components()[i].allowed_units;
        if !allowed.is_empty() && !allowed.iter().any(|id| *id == model.units()[h].id) {
            return None;
        }
    }
    for h in 0..m {
        for k in 0..l {
            let used: f64 = (0..n).filter(|&i| p[i] == h).map(|i| model.consumption(i, h, k)).sum();
            if used > model.availability(h, k) {
                return None;
            }
        }
    }
    for g in 0..m {
        for h in g + 1..m {
            let mut traffic = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    if (p[i] == g && p[j] == h) || (p[i] == h && p[j] == g) {
                        traffic += model.intensity(i, j);
                    }
                }
            }
            if traffic > model.bandwidth(g, h) {
                return None;
            }
        }
    }
    let mut w = 0.0;
    for k in 0..l {
        let mut s = 0.0;
        for i in 0..n {
            s += model.consumption(i, p[i], k);
        }
        w += f.resource_weights()[k] * s;
    }
    let mut comm = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            comm += model.intensity(i, j) * model.comm_cost(p[i], p[j]);
        }
    }
    Some(w + f.communication_weight() * comm)
}

/// Every vector in `{0..m}^n`, lexicographic order.
pub fn all_allocations(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut p = vec![0; n];
        for slot in p.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
        p
    })
}

/// Cheapest feasible allocation by plain enumeration; the first one wins ties.
pub fn brute_optimum(model: &ArchitectureModel, f: &TradeoffVector) -> Option<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for p in all_allocations(model.n(), model.m()) {
        if let Some(w) = brute_cost(model, f, &p) {
            if best.as_ref().is_none_or(|(_, b)| w < *b) {
                best = Some((p, w));
            }
        }
    }
    best
}
