//! Allocation search: exhaustive enumeration (the exact oracle) and a genetic
//! algorithm for spaces too large to enumerate.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ahp::TradeoffVector;
use crate::evaluator::{evaluate, EvaluationResult, Scorer};
use crate::model::{Allocation, ArchitectureModel};

pub const DEFAULT_EXHAUSTIVE_CAP: u128 = 10_000_000;

/// Environment variable overriding the enumeration cap.
pub const EXHAUSTIVE_CAP_ENV: &str = "SCALL_EXHAUSTIVE_CAP";

/// Linear index range handled by one exhaustive worker.
const CHUNK: u128 = 1 << 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("search space of {space} allocations exceeds the exhaustive cap of {cap}")]
    SpaceTooLarge { space: u128, cap: u128 },
    #[error("no feasible allocation among {evaluated} evaluated")]
    NoFeasibleAllocation {
        evaluated: u64,
        /// Smallest total overshoot seen (GA only).
        least_violation: Option<f64>,
    },
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
}

impl SearchError {
    pub fn code(&self) -> &'static str {
        match self {
            SearchError::SpaceTooLarge { .. } => "SPACE_TOO_LARGE",
            SearchError::NoFeasibleAllocation { .. } => "NO_FEASIBLE_ALLOCATION",
            SearchError::InvalidConfig(_) => "INVALID_CONFIG",
        }
    }
}

/// Reads [`EXHAUSTIVE_CAP_ENV`], falling back to [`DEFAULT_EXHAUSTIVE_CAP`].
pub fn exhaustive_cap_from_env() -> u128 {
    std::env::var(EXHAUSTIVE_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_EXHAUSTIVE_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExhaustiveConfig {
    /// How many of the best distinct feasible allocations to keep.
    pub top_k: usize,
    pub cap: u128,
}

impl Default for ExhaustiveConfig {
    fn default() -> Self {
        Self { top_k: 1, cap: DEFAULT_EXHAUSTIVE_CAP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    /// Probability of single-point crossover per offspring pair.
    pub crossover_rate: f64,
    /// Per-gene resampling probability; `None` means `1 / n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutation_rate: Option<f64>,
    pub elitism: usize,
    pub seed: u64,
    /// Generations without improvement of the best feasible cost before stopping.
    pub stall_limit: usize,
    /// Distinct feasible allocations retained as alternatives.
    pub archive_size: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 200,
            tournament_size: 2,
            crossover_rate: 0.9,
            mutation_rate: None,
            elitism: 1,
            seed: 0,
            stall_limit: 50,
            archive_size: 5,
        }
    }
}

impl GaConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: &str| Err(SearchError::InvalidConfig(msg.to_string()));
        if self.population_size < 2 {
            return bad("populationSize must be at least 2");
        }
        if self.generations == 0 {
            return bad("generations must be positive");
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return bad("tournamentSize must be between 1 and populationSize");
        }
        if self.elitism >= self.population_size {
            return bad("elitism must be smaller than populationSize");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad("crossoverRate must lie in [0, 1]");
        }
        if let Some(rate) = self.mutation_rate {
            if !(0.0..=1.0).contains(&rate) {
                return bad("mutationRate must lie in [0, 1]");
            }
        }
        if self.stall_limit == 0 {
            return bad("stallLimit must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAllocation {
    pub allocation: Allocation,
    pub result: EvaluationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchReport {
    pub best: Allocation,
    pub best_result: EvaluationResult,
    /// Best distinct feasible allocations by ascending cost; the first is `best`.
    pub alternatives: Vec<RankedAllocation>,
    pub evaluated: u64,
    pub generations: usize,
    pub exact: bool,
    pub seed: Option<u64>,
    pub elapsed_ms: f64,
}

/// Orders candidates by cost, then lexicographically by unit index.
fn by_cost_then_lex(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1))
}

/// Keeps the `k` best candidates, sorted.
struct TopK {
    k: usize,
    items: Vec<(f64, Vec<usize>)>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self { k, items: Vec::with_capacity(k + 1) }
    }

    fn accepts(&self, w: f64) -> bool {
        self.items.len() < self.k || self.items.last().is_some_and(|worst| w <= worst.0)
    }

    fn offer(&mut self, w: f64, p: &[usize]) {
        if !self.accepts(w) {
            return;
        }
        let cand = (w, p.to_vec());
        if let Err(pos) = self.items.binary_search_by(|x| by_cost_then_lex(x, &cand)) {
            if pos < self.k {
                self.items.insert(pos, cand);
                self.items.truncate(self.k);
            }
        }
    }

    fn merge(mut self, other: TopK) -> TopK {
        for (w, p) in other.items {
            self.offer(w, &p);
        }
        self
    }
}

fn ranked(model: &ArchitectureModel, f: &TradeoffVector, items: Vec<(f64, Vec<usize>)>) -> Vec<RankedAllocation> {
    items
        .into_iter()
        .map(|(_, p)| {
            let allocation = Allocation::from_indices(p);
            let result = evaluate(model, f, &allocation);
            RankedAllocation { allocation, result }
        })
        .collect()
}

/// Enumerates every allocation that respects the allowed-unit constraints.
///
/// Returns the cheapest feasible allocation, ties going to the
/// lexicographically smallest unit-index vector, and the `top_k` best
/// distinct feasible allocations.
pub fn exhaustive_search(
    model: &ArchitectureModel,
    f: &TradeoffVector,
    cfg: &ExhaustiveConfig,
) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    if cfg.top_k == 0 {
        return Err(SearchError::InvalidConfig("topK must be positive".into()));
    }
    let space = model.constrained_space_size();
    if space > cfg.cap {
        return Err(SearchError::SpaceTooLarge { space, cap: cfg.cap });
    }
    let n = model.n();
    let radix: Vec<u128> = (0..n).map(|i| model.allowed_units(i).len() as u128).collect();
    let chunks = space.div_ceil(CHUNK);

    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(space);
            let mut scorer = Scorer::new(model, f);
            let mut top = TopK::new(cfg.top_k);
            // mixed-radix digits, component 0 most significant
            let mut digits = vec![0usize; n];
            let mut rest = lo;
            for i in (0..n).rev() {
                digits[i] = (rest % radix[i]) as usize;
                rest /= radix[i];
            }
            let mut p: Vec<usize> = (0..n).map(|i| model.allowed_units(i)[digits[i]]).collect();
            for _ in lo..hi {
                let s = scorer.score(&p);
                if s.feasible {
                    top.offer(s.w, &p);
                }
                for i in (0..n).rev() {
                    digits[i] += 1;
                    if digits[i] < radix[i] as usize {
                        p[i] = model.allowed_units(i)[digits[i]];
                        break;
                    }
                    digits[i] = 0;
                    p[i] = model.allowed_units(i)[0];
                }
            }
            top
        })
        .reduce(|| TopK::new(cfg.top_k), TopK::merge);

    let evaluated = u64::try_from(space).unwrap_or(u64::MAX);
    if best.items.is_empty() {
        return Err(SearchError::NoFeasibleAllocation { evaluated, least_violation: None });
    }
    let alternatives = ranked(model, f, best.items);
    Ok(SearchReport {
        best: alternatives[0].allocation.clone(),
        best_result: alternatives[0].result.clone(),
        alternatives,
        evaluated,
        generations: 0,
        exact: true,
        seed: None,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Fitness rank: every feasible individual beats every infeasible one.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Fitness {
    Feasible(f64),
    Infeasible(f64),
}

impl Fitness {
    fn cmp(&self, other: &Fitness) -> Ordering {
        match (self, other) {
            (Fitness::Feasible(a), Fitness::Feasible(b)) | (Fitness::Infeasible(a), Fitness::Infeasible(b)) => {
                a.total_cmp(b)
            }
            (Fitness::Feasible(_), Fitness::Infeasible(_)) => Ordering::Less,
            (Fitness::Infeasible(_), Fitness::Feasible(_)) => Ordering::Greater,
        }
    }
}

struct Population<'a> {
    scorer: Scorer<'a>,
    cache: HashMap<Vec<usize>, Fitness>,
    evaluated: u64,
    best: Option<(f64, Vec<usize>)>,
    least_violation: Option<f64>,
    archive: TopK,
}

impl Population<'_> {
    fn fitness(&mut self, p: &[usize]) -> Fitness {
        if let Some(f) = self.cache.get(p) {
            return *f;
        }
        let s = self.scorer.score(p);
        self.evaluated += 1;
        let fit = if s.feasible {
            self.archive.offer(s.w, p);
            if self.best.as_ref().is_none_or(|(w, _)| s.w < *w) {
                self.best = Some((s.w, p.to_vec()));
            }
            Fitness::Feasible(s.w)
        } else {
            if self.least_violation.is_none_or(|v| s.violation < v) {
                self.least_violation = Some(s.violation);
            }
            Fitness::Infeasible(s.violation)
        };
        self.cache.insert(p.to_vec(), fit);
        fit
    }

    fn best_cost(&self) -> Option<f64> {
        self.best.as_ref().map(|(w, _)| *w)
    }
}

fn tournament(rng: &mut ChaCha8Rng, fitness: &[Fitness], size: usize) -> usize {
    let mut winner = rng.gen_range(0..fitness.len());
    for _ in 1..size {
        let challenger = rng.gen_range(0..fitness.len());
        if fitness[challenger].cmp(&fitness[winner]) == Ordering::Less {
            winner = challenger;
        }
    }
    winner
}

fn mutate(rng: &mut ChaCha8Rng, model: &ArchitectureModel, genes: &mut [usize], rate: f64) {
    for (i, g) in genes.iter_mut().enumerate() {
        if rng.gen::<f64>() < rate {
            *g = *model.allowed_units(i).choose(rng).expect("validated models allow at least one unit");
        }
    }
}

/// Genetic search over allocation vectors.
///
/// Deterministic for a given model, weights and `cfg.seed`. Genes only ever
/// take allowed units. The returned best is the cheapest feasible individual
/// seen in any generation.
pub fn ga_search(model: &ArchitectureModel, f: &TradeoffVector, cfg: &GaConfig) -> Result<SearchReport, SearchError> {
    let start = Instant::now();
    cfg.validate()?;
    let n = model.n();
    let mutation_rate = cfg.mutation_rate.unwrap_or(1.0 / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pop = Population {
        scorer: Scorer::new(model, f),
        cache: HashMap::new(),
        evaluated: 0,
        best: None,
        least_violation: None,
        archive: TopK::new(cfg.archive_size.max(1)),
    };

    let mut individuals: Vec<Vec<usize>> = (0..cfg.population_size)
        .map(|_| (0..n).map(|i| *model.allowed_units(i).choose(&mut rng).expect("non-empty")).collect())
        .collect();
    let mut fitness: Vec<Fitness> = individuals.iter().map(|p| pop.fitness(p)).collect();

    let mut generations = 0;
    let mut stall = 0;
    while generations < cfg.generations && stall < cfg.stall_limit {
        let before = pop.best_cost();
        let mut order: Vec<usize> = (0..individuals.len()).collect();
        order.sort_by(|&a, &b| fitness[a].cmp(&fitness[b]));

        let mut next: Vec<Vec<usize>> = order.iter().take(cfg.elitism).map(|&i| individuals[i].clone()).collect();
        while next.len() < cfg.population_size {
            let a = tournament(&mut rng, &fitness, cfg.tournament_size);
            let b = tournament(&mut rng, &fitness, cfg.tournament_size);
            let mut c1 = individuals[a].clone();
            let mut c2 = individuals[b].clone();
            if n > 1 && rng.gen::<f64>() < cfg.crossover_rate {
                let cut = rng.gen_range(1..n);
                c1[cut..].swap_with_slice(&mut c2[cut..]);
            }
            mutate(&mut rng, model, &mut c1, mutation_rate);
            mutate(&mut rng, model, &mut c2, mutation_rate);
            next.push(c1);
            if next.len() < cfg.population_size {
                next.push(c2);
            }
        }
        individuals = next;
        fitness = individuals.iter().map(|p| pop.fitness(p)).collect();
        generations += 1;

        let improved = match (before, pop.best_cost()) {
            (None, Some(_)) => true,
            (Some(b), Some(a)) => a < b,
            _ => false,
        };
        stall = if improved { 0 } else { stall + 1 };
    }

    if pop.best.is_none() {
        return Err(SearchError::NoFeasibleAllocation { evaluated: pop.evaluated, least_violation: pop.least_violation });
    }
    let alternatives = ranked(model, f, pop.archive.items);
    Ok(SearchReport {
        best: alternatives[0].allocation.clone(),
        best_result: alternatives[0].result.clone(),
        alternatives,
        evaluated: pop.evaluated,
        generations,
        exact: false,
        seed: Some(cfg.seed),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// splitmix64 finalizer.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `run`-th re-run derived from a base seed:
/// `splitmix64(base + run * 0x9E3779B97F4A7C15)` with wrapping arithmetic.
pub fn derive_seed(base: u64, run: u64) -> u64 {
    splitmix64(base.wrapping_add(run.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// Re-runs the GA `count` times with seeds derived from `cfg.seed` and
/// returns the reports de-duplicated by best allocation, cheapest first.
///
/// Fails only when no run finds a feasible allocation.
pub fn alternatives(
    model: &ArchitectureModel,
    f: &TradeoffVector,
    cfg: &GaConfig,
    count: usize,
) -> Result<Vec<SearchReport>, SearchError> {
    if count == 0 {
        return Err(SearchError::InvalidConfig("count must be positive".into()));
    }
    cfg.validate()?;
    let runs: Vec<Result<SearchReport, SearchError>> = (0..count as u64)
        .into_par_iter()
        .map(|run| ga_search(model, f, &GaConfig { seed: derive_seed(cfg.seed, run), ..cfg.clone() }))
        .collect();

    let mut reports = Vec::new();
    let mut first_err = None;
    for r in runs {
        match r {
            Ok(rep) => reports.push(rep),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if reports.is_empty() {
        return Err(first_err.expect("count >= 1"));
    }
    // stable: equal allocations keep the earliest run
    reports.sort_by(|a, b| a.best_result.w.total_cmp(&b.best_result.w).then_with(|| a.best.cmp(&b.best)));
    reports.dedup_by(|later, earlier| later.best == earlier.best);
    Ok(reports)
}
