//! Random architecture generator and the GA-versus-exhaustive benchmark.
//!
//! Generation recipe, per instance (all draws from a ChaCha8 stream seeded
//! with `derive_seed(spec.seed, index)`):
//!
//! - `n`, `m`, `l` uniform over their inclusive ranges;
//! - `T[i][h][k]` uniform in `[1, 10)`;
//! - each component pair communicates with probability `density`, with
//!   intensity uniform in `[1, 5)`;
//! - `C[g][h]` uniform in `[1, 3)` off the diagonal;
//! - `R[h][k] = tightness * sum_i mean_h(T[i][h][k]) / m`;
//! - `B[g][h] = tightness * (1 - 1/m) * sum_{i<j} K[i][j]`, the expected
//!   total cross-unit traffic under uniformly random placement.

use std::io::Write;
use std::ops::RangeInclusive;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ahp::{derive_tradeoff, AhpError, PairwiseComparisonMatrix, TradeoffVector};
use crate::model::{validate_model, ArchitectureModel, ComputingUnit, ModelDocument, ResourceDef, SoftwareComponent};
use crate::search::{derive_seed, exhaustive_search, ga_search, ExhaustiveConfig, GaConfig, SearchError};

pub const CSV_HEADER: [&str; 10] = ["index", "n", "m", "l", "space", "w_opt", "w_ga", "gap", "t_opt_ms", "t_ga_ms"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: usize,
    pub max: usize,
}

impl IntRange {
    pub fn new(min: usize, max: usize) -> Self {
        Self { min, max }
    }

    pub fn exactly(v: usize) -> Self {
        Self { min: v, max: v }
    }

    fn range(&self) -> RangeInclusive<usize> {
        self.min..=self.max
    }
}

impl std::str::FromStr for IntRange {
    type Err = String;

    /// Accepts `"A..B"`, `"A..=B"` or a single number.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
        match s.split_once("..") {
            Some((a, b)) => Ok(Self::new(parse(a)?, parse(b.trim_start_matches('='))?)),
            None => parse(s).map(Self::exactly),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BenchSpec {
    pub n_range: IntRange,
    pub m_range: IntRange,
    pub l_range: IntRange,
    pub instances: usize,
    pub seed: u64,
    /// Probability that a component pair communicates.
    pub density: f64,
    /// Ratio of provided capacity to expected demand.
    pub tightness: f64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            n_range: IntRange::new(3, 7),
            m_range: IntRange::new(3, 5),
            l_range: IntRange::new(2, 3),
            instances: 30,
            seed: 1,
            density: 0.5,
            tightness: 1.5,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error("comparison matrix of order {order} does not fit an instance with {resources} resources")]
    ComparisonOrder { order: usize, resources: usize },
    #[error(transparent)]
    Ahp(#[from] AhpError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

impl BenchSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        for (name, r) in [("n", self.n_range), ("m", self.m_range), ("l", self.l_range)] {
            if r.min == 0 || r.min > r.max {
                return Err(BenchError::InvalidSpec(format!("{name} range {}..{} is empty or starts at 0", r.min, r.max)));
            }
        }
        if self.instances == 0 {
            return Err(BenchError::InvalidSpec("instances must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return Err(BenchError::InvalidSpec("density must lie in [0, 1]".into()));
        }
        if !(self.tightness.is_finite() && self.tightness > 0.0) {
            return Err(BenchError::InvalidSpec("tightness must be positive".into()));
        }
        Ok(())
    }
}

/// Builds instance `index` of the batch described by `spec`.
///
/// Panics if `spec` does not validate.
pub fn generate_model(spec: &BenchSpec, index: u64) -> ArchitectureModel {
    spec.validate().expect("benchmark spec must be valid");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, index));
    let n = rng.gen_range(spec.n_range.range());
    let m = rng.gen_range(spec.m_range.range());
    let l = rng.gen_range(spec.l_range.range());

    let consumption: Vec<Vec<Vec<f64>>> =
        (0..n).map(|_| (0..m).map(|_| (0..l).map(|_| rng.gen_range(1.0..10.0)).collect()).collect()).collect();

    let mut intensity = vec![vec![0.0; n]; n];
    let mut total_intensity = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(spec.density) {
                let k = rng.gen_range(1.0..5.0);
                intensity[i][j] = k;
                intensity[j][i] = k;
                total_intensity += k;
            }
        }
    }

    let mut comm_cost = vec![vec![0.0; m]; m];
    for g in 0..m {
        for h in g + 1..m {
            let c = rng.gen_range(1.0..3.0);
            comm_cost[g][h] = c;
            comm_cost[h][g] = c;
        }
    }

    let demand: Vec<f64> = (0..l)
        .map(|k| (0..n).map(|i| (0..m).map(|h| consumption[i][h][k]).sum::<f64>() / m as f64).sum())
        .collect();
    let availability = vec![demand.iter().map(|d| spec.tightness * d / m as f64).collect::<Vec<_>>(); m];

    let link = spec.tightness * (1.0 - 1.0 / m as f64) * total_intensity;
    let bandwidth = (0..m).map(|g| (0..m).map(|h| if g == h { 0.0 } else { link }).collect()).collect();

    let doc = ModelDocument {
        resources: (0..l).map(|k| ResourceDef { id: format!("r{k}"), name: format!("resource {k}"), unit: String::new() }).collect(),
        units: (0..m).map(|h| ComputingUnit { id: format!("u{h}"), name: format!("unit {h}"), kind: String::new() }).collect(),
        components: (0..n)
            .map(|i| SoftwareComponent { id: format!("c{i}"), name: format!("component {i}"), allowed_units: vec![] })
            .collect(),
        consumption,
        availability,
        intensity,
        comm_cost,
        bandwidth,
        comparison: None,
    };
    validate_model(&doc).expect("generated models satisfy every model invariant")
}

/// One benchmark instance. Exhaustive fields are `None` when the space
/// exceeded the cap; cost fields are `None` when the search found nothing
/// feasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InstanceRecord {
    pub index: u64,
    pub n: usize,
    pub m: usize,
    pub l: usize,
    pub space: u128,
    pub w_opt: Option<f64>,
    pub w_ga: Option<f64>,
    pub gap: Option<f64>,
    pub t_opt_ms: Option<f64>,
    pub t_ga_ms: f64,
    /// `OK`, `NO_FEASIBLE_ALLOCATION` or `EXHAUSTIVE_SKIPPED`.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GapStats {
    pub per_instance: Vec<InstanceRecord>,
    /// Mean over instances with a gap; 0 when there are none.
    pub mean_gap: f64,
    pub max_gap: f64,
    pub mean_t_ga_ms: f64,
    /// Instances where the GA matched the exhaustive optimum exactly.
    pub exact_hits: usize,
    /// Instances with both searches feasible.
    pub compared: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchOptions {
    /// Enumeration cap; instances above it only run the GA.
    pub cap: Option<u128>,
    /// Judgments applied to every instance; uniform weights when absent.
    pub comparison: Option<PairwiseComparisonMatrix>,
}

fn weights_for(model: &ArchitectureModel, comparison: Option<&PairwiseComparisonMatrix>) -> Result<TradeoffVector, BenchError> {
    match comparison {
        None => Ok(TradeoffVector::uniform(model.l())),
        Some(c) if c.order() == model.l() + 1 => Ok(derive_tradeoff(c)?),
        Some(c) => Err(BenchError::ComparisonOrder { order: c.order(), resources: model.l() }),
    }
}

/// Relative distance of the GA cost from the optimum.
pub fn gap(w_ga: f64, w_opt: f64) -> Option<f64> {
    (w_opt > 0.0).then(|| (w_ga - w_opt) / w_opt)
}

fn run_instance(spec: &BenchSpec, ga: &GaConfig, opts: &BenchOptions, index: u64) -> Result<InstanceRecord, BenchError> {
    let model = generate_model(spec, index);
    let f = weights_for(&model, opts.comparison.as_ref())?;
    let cap = opts.cap.unwrap_or(crate::search::DEFAULT_EXHAUSTIVE_CAP);
    let space = model.space_size();
    let mut status = "OK";

    let (w_opt, t_opt_ms) = if space <= cap {
        let start = Instant::now();
        let res = exhaustive_search(&model, &f, &ExhaustiveConfig { top_k: 1, cap });
        let t = start.elapsed().as_secs_f64() * 1e3;
        match res {
            Ok(rep) => (Some(rep.best_result.w), Some(t)),
            Err(SearchError::NoFeasibleAllocation { .. }) => {
                status = "NO_FEASIBLE_ALLOCATION";
                (None, Some(t))
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        status = "EXHAUSTIVE_SKIPPED";
        (None, None)
    };

    let start = Instant::now();
    let res = ga_search(&model, &f, &GaConfig { seed: derive_seed(ga.seed, index), ..ga.clone() });
    let t_ga_ms = start.elapsed().as_secs_f64() * 1e3;
    let w_ga = match res {
        Ok(rep) => Some(rep.best_result.w),
        Err(SearchError::NoFeasibleAllocation { .. }) => {
            if status == "OK" {
                status = "NO_FEASIBLE_ALLOCATION";
            }
            None
        }
        Err(e) => return Err(e.into()),
    };
    let gap = match (w_ga, w_opt) {
        (Some(g), Some(o)) => gap(g, o),
        _ => None,
    };
    Ok(InstanceRecord {
        index,
        n: model.n(),
        m: model.m(),
        l: model.l(),
        space,
        w_opt,
        w_ga,
        gap,
        t_opt_ms,
        t_ga_ms,
        status: status.to_string(),
    })
}

/// Runs every instance sequentially so per-instance timings are not skewed
/// by sibling work.
pub fn run_benchmark(spec: &BenchSpec, ga: &GaConfig, opts: &BenchOptions) -> Result<GapStats, BenchError> {
    spec.validate()?;
    ga.validate()?;
    let per_instance = (0..spec.instances as u64).map(|i| run_instance(spec, ga, opts, i)).collect::<Result<Vec<_>, _>>()?;

    let gaps: Vec<f64> = per_instance.iter().filter_map(|r| r.gap).collect();
    let compared = per_instance.iter().filter(|r| r.w_opt.is_some() && r.w_ga.is_some()).count();
    let exact_hits = per_instance.iter().filter(|r| matches!((r.w_ga, r.w_opt), (Some(g), Some(o)) if g == o)).count();
    let mean_gap = if gaps.is_empty() { 0.0 } else { gaps.iter().sum::<f64>() / gaps.len() as f64 };
    let max_gap = gaps.iter().copied().fold(0.0, f64::max);
    let mean_t_ga_ms = per_instance.iter().map(|r| r.t_ga_ms).sum::<f64>() / per_instance.len() as f64;
    Ok(GapStats { per_instance, mean_gap, max_gap, mean_t_ga_ms, exact_hits, compared })
}

/// Writes one CSV row per instance under [`CSV_HEADER`]; missing values are
/// left empty.
pub fn write_csv<W: Write>(stats: &GapStats, out: W) -> Result<(), csv::Error> {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &stats.per_instance {
        w.write_record([
            r.index.to_string(),
            r.n.to_string(),
            r.m.to_string(),
            r.l.to_string(),
            r.space.to_string(),
            opt(r.w_opt),
            opt(r.w_ga),
            opt(r.gap),
            opt(r.t_opt_ms),
            r.t_ga_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
