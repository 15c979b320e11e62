//! Weighted allocation cost with resource (rho) and bandwidth (kappa)
//! feasibility multipliers.
//!
//! The cost of an allocation `p` under trade-off weights `F` is
//!
//! ```text
//! w = (sum_k f_k * sum_i T[i][p_i][k]  +  fc * sum_{i<j} K[i][j] * C[p_i][p_j]) * rho * kappa
//! ```
//!
//! `rho` drops to 0 when some unit's summed consumption of a resource exceeds
//! its availability, `kappa` when the summed cross-unit intensity between two
//! units exceeds their bandwidth. An allocation that breaks an allowed-unit
//! constraint is infeasible as well.

use serde::{Deserialize, Serialize};

use crate::ahp::TradeoffVector;
use crate::model::{Allocation, ArchitectureModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvaluationResult {
    pub w: f64,
    pub rho: u8,
    pub kappa: u8,
    /// `[unit][resource]` summed consumption.
    pub unit_load: Vec<Vec<f64>>,
    /// `[unit][unit]` summed intensity of cross-unit component pairs.
    pub pair_traffic: Vec<Vec<f64>>,
    pub constraints_satisfied: bool,
    pub feasible: bool,
}

pub fn resource_load(model: &ArchitectureModel, p: &Allocation) -> Vec<Vec<f64>> {
    let mut load = vec![vec![0.0; model.l()]; model.m()];
    for (i, &h) in p.as_slice().iter().enumerate() {
        for (acc, t) in load[h].iter_mut().zip(model.consumption_row(i, h)) {
            *acc += t;
        }
    }
    load
}

pub fn comm_traffic(model: &ArchitectureModel, p: &Allocation) -> Vec<Vec<f64>> {
    let m = model.m();
    let p = p.as_slice();
    let mut traffic = vec![vec![0.0; m]; m];
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let (g, h) = (p[i], p[j]);
            if g != h {
                let k = model.intensity(i, j);
                traffic[g][h] += k;
                traffic[h][g] += k;
            }
        }
    }
    traffic
}

/// The bracketed part of the cost, before the feasibility multipliers.
///
/// Sums run in formula order (resources outer, components inner; pairs in
/// lexicographic order) so independent expansions agree bit for bit.
pub fn weighted_cost(model: &ArchitectureModel, f: &TradeoffVector, p: &[usize]) -> f64 {
    let mut resource_term = 0.0;
    for (k, fk) in f.resource_weights().iter().enumerate() {
        let mut sum = 0.0;
        for (i, &h) in p.iter().enumerate() {
            sum += model.consumption(i, h, k);
        }
        resource_term += fk * sum;
    }
    let mut comm = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            comm += model.intensity(i, j) * model.comm_cost(p[i], p[j]);
        }
    }
    resource_term + f.communication_weight() * comm
}

fn constraints_hold(model: &ArchitectureModel, p: &[usize]) -> bool {
    p.iter().enumerate().all(|(i, &h)| model.is_allowed(i, h))
}

/// Full evaluation with load and traffic breakdowns.
///
/// `p` must have one in-range unit index per component; allowed-unit
/// violations are reported through `constraints_satisfied` rather than
/// rejected.
pub fn evaluate(model: &ArchitectureModel, f: &TradeoffVector, p: &Allocation) -> EvaluationResult {
    assert_eq!(p.len(), model.n(), "allocation length must match component count");
    let unit_load = resource_load(model, p);
    let pair_traffic = comm_traffic(model, p);
    let over_budget = (0..model.m()).any(|h| (0..model.l()).any(|k| unit_load[h][k] > model.availability(h, k)));
    let over_bandwidth =
        (0..model.m()).any(|g| (g + 1..model.m()).any(|h| pair_traffic[g][h] > model.bandwidth(g, h)));
    let rho = u8::from(!over_budget);
    let kappa = u8::from(!over_bandwidth);
    let constraints_satisfied = constraints_hold(model, p.as_slice());
    let feasible = rho == 1 && kappa == 1 && constraints_satisfied;
    let w = if feasible { weighted_cost(model, f, p.as_slice()) * f64::from(rho) * f64::from(kappa) } else { 0.0 };
    EvaluationResult { w, rho, kappa, unit_load, pair_traffic, constraints_satisfied, feasible }
}

/// Compact outcome used by the search loops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    /// Cost `w`; 0 when infeasible.
    pub w: f64,
    pub feasible: bool,
    /// Sum of relative resource and bandwidth overshoots plus one per broken
    /// allowed-unit constraint; 0 exactly when feasible.
    pub violation: f64,
}

/// Overshoot relative to the budget, or the absolute overshoot when the
/// budget is 0.
fn overshoot(used: f64, budget: f64) -> f64 {
    if used <= budget {
        0.0
    } else if budget > 0.0 {
        (used - budget) / budget
    } else {
        used - budget
    }
}

/// Allocation-free scorer reusing its load and traffic buffers.
#[derive(Debug, Clone)]
pub struct Scorer<'a> {
    model: &'a ArchitectureModel,
    weights: &'a TradeoffVector,
    load: Vec<f64>,
    traffic: Vec<f64>,
}

impl<'a> Scorer<'a> {
    pub fn new(model: &'a ArchitectureModel, weights: &'a TradeoffVector) -> Self {
        Self { model, weights, load: vec![0.0; model.m() * model.l()], traffic: vec![0.0; model.m() * model.m()] }
    }

    pub fn score(&mut self, p: &[usize]) -> Score {
        let model = self.model;
        let (m, l) = (model.m(), model.l());
        self.load.fill(0.0);
        self.traffic.fill(0.0);
        for (i, &h) in p.iter().enumerate() {
            for (acc, t) in self.load[h * l..(h + 1) * l].iter_mut().zip(model.consumption_row(i, h)) {
                *acc += t;
            }
        }
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                let (g, h) = (p[i], p[j]);
                if g != h {
                    let (lo, hi) = if g < h { (g, h) } else { (h, g) };
                    self.traffic[lo * m + hi] += model.intensity(i, j);
                }
            }
        }
        let mut violation = 0.0;
        for h in 0..m {
            for k in 0..l {
                violation += overshoot(self.load[h * l + k], model.availability(h, k));
            }
            for g in h + 1..m {
                violation += overshoot(self.traffic[h * m + g], model.bandwidth(h, g));
            }
        }
        violation += p.iter().enumerate().filter(|(i, h)| !model.is_allowed(*i, **h)).count() as f64;
        let feasible = violation == 0.0;
        let w = if feasible { weighted_cost(model, self.weights, p) } else { 0.0 };
        Score { w, feasible, violation }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::validate_model;

    fn half() -> TradeoffVector {
        TradeoffVector::new(vec![0.5], 0.5).unwrap()
    }

    fn alloc(p: &[usize]) -> Allocation {
        Allocation::from_indices(p.to_vec())
    }

    #[test]
    fn load_examples() {
        let e1 = fixtures::e1();
        assert_eq!(resource_load(&e1, &alloc(&[0, 0])), vec![vec![5.0], vec![0.0]]);
        assert_eq!(resource_load(&e1, &alloc(&[0, 1])), vec![vec![2.0], vec![1.0]]);
    }

    #[test]
    fn single_component_load_is_its_row() {
        let mut doc = fixtures::e1().to_document();
        doc.components.pop();
        doc.consumption.pop();
        doc.intensity = vec![vec![0.0]];
        let model = validate_model(&doc).unwrap();
        assert_eq!(resource_load(&model, &alloc(&[0])), vec![vec![2.0], vec![0.0]]);
    }

    #[test]
    fn traffic_examples() {
        let e1 = fixtures::e1();
        assert_eq!(comm_traffic(&e1, &alloc(&[0, 1])), vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(comm_traffic(&e1, &alloc(&[0, 0])), vec![vec![0.0; 2]; 2]);

        let mut doc = fixtures::e1().to_document();
        doc.components.push(crate::model::SoftwareComponent { id: "s3".into(), name: String::new(), allowed_units: vec![] });
        doc.consumption.push(vec![vec![1.0], vec![1.0]]);
        doc.availability = vec![vec![50.0], vec![50.0]];
        doc.intensity = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 4.0], vec![2.0, 4.0, 0.0]];
        let model = validate_model(&doc).unwrap();
        assert_eq!(comm_traffic(&model, &alloc(&[0, 0, 1]))[0][1], 6.0);
    }

    #[test]
    fn cost_examples() {
        let e1 = fixtures::e1();
        let f = half();
        for (p, w) in [([0, 0], 2.5), ([0, 1], 2.5), ([1, 0], 4.5), ([1, 1], 2.5)] {
            let r = evaluate(&e1, &f, &alloc(&p));
            assert!(r.feasible);
            assert_eq!((r.rho, r.kappa), (1, 1));
            assert!((r.w - w).abs() <= 1e-12, "{p:?}: {} != {w}", r.w);
        }
    }

    #[test]
    fn rho_and_kappa() {
        let mut doc = fixtures::e1().to_document();
        doc.availability[0][0] = 4.0;
        let tight = validate_model(&doc).unwrap();
        let r = evaluate(&tight, &half(), &alloc(&[0, 0]));
        assert_eq!((r.rho, r.kappa, r.w, r.feasible), (0, 1, 0.0, false));

        let mut doc = fixtures::e1().to_document();
        doc.bandwidth = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let narrow = validate_model(&doc).unwrap();
        let r = evaluate(&narrow, &half(), &alloc(&[0, 1]));
        assert_eq!((r.rho, r.kappa, r.w, r.feasible), (1, 0, 0.0, false));
        // co-located pairs do not use the link
        assert!(evaluate(&narrow, &half(), &alloc(&[0, 0])).feasible);
    }

    #[test]
    fn budget_comparison_is_strict() {
        let mut doc = fixtures::e1().to_document();
        doc.availability[0][0] = 5.0;
        doc.bandwidth = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        let exact = validate_model(&doc).unwrap();
        assert!(evaluate(&exact, &half(), &alloc(&[0, 0])).feasible);
        assert!(evaluate(&exact, &half(), &alloc(&[0, 1])).feasible);
    }

    #[test]
    fn constraint_violation_zeroes_cost() {
        let mut doc = fixtures::e1().to_document();
        doc.components[0].allowed_units = vec!["h2".into()];
        let model = validate_model(&doc).unwrap();
        let r = evaluate(&model, &half(), &alloc(&[0, 0]));
        assert_eq!((r.rho, r.kappa, r.constraints_satisfied, r.feasible, r.w), (1, 1, false, false, 0.0));
        let s = Scorer::new(&model, &half()).score(&[0, 0]);
        assert_eq!(s.violation, 1.0);
    }

    #[test]
    fn scorer_agrees_with_evaluate() {
        let e1 = fixtures::e1();
        let f = half();
        let mut scorer = Scorer::new(&e1, &f);
        for p in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let s = scorer.score(&p);
            let r = evaluate(&e1, &f, &alloc(&p));
            assert_eq!(s.w.to_bits(), r.w.to_bits());
            assert_eq!(s.feasible, r.feasible);
        }
    }

    #[test]
    fn overshoot_measures() {
        assert_eq!(overshoot(5.0, 4.0), 0.25);
        assert_eq!(overshoot(3.0, 4.0), 0.0);
        assert_eq!(overshoot(2.0, 0.0), 2.0);
    }
}
