//! Wire form of search results: allocations spelled with unit ids and
//! annotated with residual budgets.

use serde::{Deserialize, Serialize};

use crate::evaluator::EvaluationResult;
use crate::model::{Allocation, ArchitectureModel};
use crate::search::SearchReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AllocationView {
    /// Unit id per component, in component order.
    pub allocation: Vec<String>,
    pub w: f64,
    pub rho: u8,
    pub kappa: u8,
    pub feasible: bool,
    pub constraints_satisfied: bool,
    pub unit_load: Vec<Vec<f64>>,
    /// `R - unitLoad`, per unit and resource.
    pub residual: Vec<Vec<f64>>,
    pub pair_traffic: Vec<Vec<f64>>,
    /// `B - pairTraffic`, per unit pair.
    pub bandwidth_headroom: Vec<Vec<f64>>,
}

impl AllocationView {
    pub fn new(model: &ArchitectureModel, p: &Allocation, r: &EvaluationResult) -> Self {
        let residual = (0..model.m())
            .map(|h| (0..model.l()).map(|k| model.availability(h, k) - r.unit_load[h][k]).collect())
            .collect();
        let bandwidth_headroom = (0..model.m())
            .map(|g| (0..model.m()).map(|h| model.bandwidth(g, h) - r.pair_traffic[g][h]).collect())
            .collect();
        Self {
            allocation: p.unit_ids(model).into_iter().map(str::to_owned).collect(),
            w: r.w,
            rho: r.rho,
            kappa: r.kappa,
            feasible: r.feasible,
            constraints_satisfied: r.constraints_satisfied,
            unit_load: r.unit_load.clone(),
            residual,
            pair_traffic: r.pair_traffic.clone(),
            bandwidth_headroom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ga,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportView {
    pub method: Method,
    pub exact: bool,
    pub seed: Option<u64>,
    pub components: Vec<String>,
    pub units: Vec<String>,
    pub resources: Vec<String>,
    pub best: AllocationView,
    pub alternatives: Vec<AllocationView>,
    pub evaluated: u64,
    pub generations: usize,
    pub elapsed_ms: f64,
}

impl ReportView {
    pub fn new(model: &ArchitectureModel, report: &SearchReport) -> Self {
        Self {
            method: if report.exact { Method::Exhaustive } else { Method::Ga },
            exact: report.exact,
            seed: report.seed,
            components: model.components().iter().map(|c| c.id.clone()).collect(),
            units: model.units().iter().map(|u| u.id.clone()).collect(),
            resources: model.resources().iter().map(|r| r.id.clone()).collect(),
            best: AllocationView::new(model, &report.best, &report.best_result),
            alternatives: report.alternatives.iter().map(|a| AllocationView::new(model, &a.allocation, &a.result)).collect(),
            evaluated: report.evaluated,
            generations: report.generations,
            elapsed_ms: report.elapsed_ms,
        }
    }

    /// Combines GA re-runs: the cheapest run supplies `best`, and each run's
    /// best allocation becomes one alternative.
    ///
    /// `reports` must be non-empty and sorted cheapest first, as returned by
    /// [`crate::search::alternatives`].
    pub fn from_reruns(model: &ArchitectureModel, reports: &[SearchReport]) -> Self {
        let mut view = Self::new(model, &reports[0]);
        view.alternatives = reports.iter().map(|r| AllocationView::new(model, &r.best, &r.best_result)).collect();
        view.evaluated = reports.iter().map(|r| r.evaluated).sum();
        view.generations = reports.iter().map(|r| r.generations).sum();
        view.elapsed_ms = reports.iter().map(|r| r.elapsed_ms).sum();
        view
    }

    /// The view with timing zeroed, for byte-level comparisons.
    pub fn without_timing(&self) -> Self {
        Self { elapsed_ms: 0.0, ..self.clone() }
    }
}
