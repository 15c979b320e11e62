//! Acceptance gate. Each criterion prints one PASS/FAIL line; any failure
//! makes the target exit non-zero.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scall_core::ahp::{consistency_ratio, derive_tradeoff, principal_eigen};
use scall_core::benchgen::{generate_model, run_benchmark, BenchOptions, BenchSpec, IntRange};
use scall_core::*;

use common::{all_allocations, brute_cost};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// GA against the exhaustive optimum on 30 generated instances.
fn oracle_equivalence() -> Outcome {
    let spec = BenchSpec {
        n_range: IntRange::new(3, 7),
        m_range: IntRange::new(3, 5),
        l_range: IntRange::new(2, 3),
        instances: 30,
        seed: 1,
        ..Default::default()
    };
    let start = Instant::now();
    let stats = run_benchmark(&spec, &GaConfig::default(), &BenchOptions::default()).map_err(|e| e.to_string())?;
    let compared = stats.compared;
    ensure(compared > 0, || "no instance had a feasible optimum".into())?;
    for r in &stats.per_instance {
        ensure(r.w_opt.is_some() == r.w_ga.is_some(), || format!("instance {}: GA and exhaustive disagree on feasibility", r.index))?;
        if let Some(g) = r.gap {
            ensure(g >= 0.0, || format!("instance {}: GA below the exact optimum (gap {g})", r.index))?;
        }
    }
    let hit_rate = stats.exact_hits as f64 / compared as f64;
    ensure(hit_rate >= 0.80, || format!("exact on {}/{compared} instances", stats.exact_hits))?;
    ensure(stats.max_gap <= 0.13, || format!("max gap {:.4} > 0.13", stats.max_gap))?;
    ensure(stats.mean_gap <= 0.05, || format!("mean gap {:.4} > 0.05", stats.mean_gap))?;
    ensure(start.elapsed() < Duration::from_secs(120), || format!("batch took {:?}", start.elapsed()))?;
    Ok(format!(
        "exact {}/{compared} ({:.0}%), max gap {:.4}, mean gap {:.4}, {} of 30 infeasible",
        stats.exact_hits,
        hit_rate * 100.0,
        stats.max_gap,
        stats.mean_gap,
        30 - compared
    ))
}

/// GA on a 15^10 space within 5 s.
fn timing_sanity() -> Outcome {
    let spec = BenchSpec {
        n_range: IntRange::exactly(10),
        m_range: IntRange::exactly(15),
        l_range: IntRange::new(2, 3),
        instances: 1,
        seed: 11,
        ..Default::default()
    };
    let model = generate_model(&spec, 0);
    ensure(model.space_size() == 15u128.pow(10), || "unexpected space size".into())?;
    let f = TradeoffVector::uniform(model.l());
    let start = Instant::now();
    let res = ga_search(&model, &f, &GaConfig::default());
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(5), || format!("GA took {elapsed:?}"))?;
    let exhaustive = exhaustive_search(&model, &f, &ExhaustiveConfig::default());
    ensure(matches!(exhaustive, Err(SearchError::SpaceTooLarge { .. })), || "exhaustive should refuse 15^10".into())?;
    let w = match res {
        Ok(rep) => format!("w={:.3}", rep.best_result.w),
        Err(e) => format!("{}", e.code()),
    };
    Ok(format!("GA on 15^10 finished in {:.1} ms ({w})", elapsed.as_secs_f64() * 1e3))
}

/// AUV fixture: full 3^11 enumeration against an independent brute force.
fn exhaustive_oracle() -> Outcome {
    let model = fixtures::auv();
    ensure(model.n() == 11 && model.m() == 3, || "fixture shape".into())?;
    let f = derive_tradeoff(model.comparison().ok_or("fixture lacks judgments")?).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let rep = exhaustive_search(&model, &f, &ExhaustiveConfig { top_k: 2, ..Default::default() }).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(elapsed <= Duration::from_secs(30), || format!("enumeration took {elapsed:?}"))?;
    ensure(rep.evaluated == 177_147, || format!("evaluated {}", rep.evaluated))?;

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut runner_up = f64::INFINITY;
    for p in all_allocations(11, 3) {
        if let Some(w) = brute_cost(&model, &f, &p) {
            match &best {
                Some((_, b)) if w >= *b => runner_up = runner_up.min(w),
                _ => {
                    if let Some((_, b)) = &best {
                        runner_up = runner_up.min(*b);
                    }
                    best = Some((p, w));
                }
            }
        }
    }
    let (p, w) = best.ok_or("brute force found nothing feasible")?;
    ensure(rep.best.as_slice() == p.as_slice(), || format!("argmin {:?} != brute force {p:?}", rep.best.as_slice()))?;
    ensure(rep.best_result.w.to_bits() == w.to_bits(), || format!("w {} != brute force {w}", rep.best_result.w))?;
    ensure(runner_up > w, || "optimum is not unique".into())?;
    Ok(format!("177147 allocations in {:.1} ms, w={w:.4} matches brute force exactly", elapsed.as_secs_f64() * 1e3))
}

/// Hand-expanded E1 values.
fn evaluator_correctness() -> Outcome {
    let e1 = fixtures::e1();
    let f = TradeoffVector::new(vec![0.5], 0.5).map_err(|e| e.to_string())?;
    for (p, expected) in [([0, 0], 2.5), ([0, 1], 2.5), ([1, 0], 4.5), ([1, 1], 2.5)] {
        let r = evaluate(&e1, &f, &Allocation::from_indices(p.to_vec()));
        ensure((r.w - expected).abs() <= 1e-12 && r.rho == 1 && r.kappa == 1, || format!("{p:?}: w={} rho={} kappa={}", r.w, r.rho, r.kappa))?;
    }

    let mut doc = e1.to_document();
    doc.availability[0][0] = 4.0;
    let tight = validate_model(&doc).map_err(|e| e.to_string())?;
    let r = evaluate(&tight, &f, &Allocation::from_indices(vec![0, 0]));
    ensure(r.rho == 0 && r.w == 0.0 && !r.feasible, || format!("rho case: {r:?}"))?;

    let mut doc = e1.to_document();
    doc.bandwidth = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let narrow = validate_model(&doc).map_err(|e| e.to_string())?;
    let r = evaluate(&narrow, &f, &Allocation::from_indices(vec![0, 1]));
    ensure(r.kappa == 0 && r.w == 0.0 && !r.feasible, || format!("kappa case: {r:?}"))?;
    Ok("w = 2.5, 2.5, 4.5, 2.5; rho=0 and kappa=0 cases zero the cost".into())
}

/// 1,000 random (model, seed) pairs; every returned best must be feasible.
fn feasibility_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut found, mut none) = (0, 0);
    for case in 0..1000u64 {
        let spec = BenchSpec {
            n_range: IntRange::new(2, 8),
            m_range: IntRange::new(2, 5),
            l_range: IntRange::new(1, 3),
            instances: 1,
            seed: rng.gen(),
            density: rng.gen_range(0.0..=1.0),
            tightness: rng.gen_range(0.6..2.5),
        };
        let mut doc = generate_model(&spec, 0).to_document();
        let m = doc.units.len();
        for comp in doc.components.iter_mut() {
            if rng.gen_bool(0.3) {
                comp.allowed_units = (0..m).filter(|_| rng.gen_bool(0.5)).map(|h| format!("u{h}")).collect();
            }
        }
        let model = validate_model(&doc).map_err(|e| format!("case {case}: {e}"))?;
        let f = TradeoffVector::uniform(model.l());
        match ga_search(&model, &f, &GaConfig::with_seed(rng.gen())) {
            Ok(rep) => {
                found += 1;
                ensure(brute_cost(&model, &f, rep.best.as_slice()).is_some(), || format!("case {case}: best allocation is infeasible"))?;
                ensure(rep.best_result.rho == 1 && rep.best_result.kappa == 1 && rep.best_result.constraints_satisfied, || {
                    format!("case {case}: flags {:?}", rep.best_result)
                })?;
                for alt in &rep.alternatives {
                    ensure(brute_cost(&model, &f, alt.allocation.as_slice()).is_some(), || format!("case {case}: infeasible alternative"))?;
                }
            }
            Err(SearchError::NoFeasibleAllocation { .. }) => none += 1,
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    Ok(format!("{found} feasible results verified, {none} runs reported no feasible allocation"))
}

fn ahp_fixtures() -> Outcome {
    let consistent = PairwiseComparisonMatrix::new(vec![vec![1.0, 2.0, 4.0], vec![0.5, 1.0, 2.0], vec![0.25, 0.5, 1.0]])
        .map_err(|e| e.to_string())?;
    let e = principal_eigen(&consistent).map_err(|e| e.to_string())?;
    ensure((e.lambda_max - 3.0).abs() <= 1e-9, || format!("lambda_max {}", e.lambda_max))?;
    let cr = consistency_ratio(&consistent).map_err(|e| e.to_string())?;
    ensure(cr < 1e-9, || format!("CR {cr}"))?;
    for (w, x) in e.weights.iter().zip([4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0]) {
        ensure((w - x).abs() <= 1e-9, || format!("weights {:?}", e.weights))?;
    }

    let cycle = PairwiseComparisonMatrix::new(vec![
        vec![1.0, 9.0, 1.0 / 9.0],
        vec![1.0 / 9.0, 1.0, 9.0],
        vec![9.0, 1.0 / 9.0, 1.0],
    ])
    .map_err(|e| e.to_string())?;
    let cycle_cr = match derive_tradeoff(&cycle) {
        Err(AhpError::Inconsistent { cr, .. }) if cr >= 0.1 => cr,
        other => return Err(format!("cycle accepted: {other:?}")),
    };

    let mut sums = Vec::new();
    for m in [consistent, PairwiseComparisonMatrix::uniform(3), PairwiseComparisonMatrix::new(vec![vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]]).unwrap()] {
        let f = derive_tradeoff(&m).map_err(|e| e.to_string())?;
        sums.push(f.sum());
    }
    let auv = derive_tradeoff(fixtures::auv().comparison().unwrap()).map_err(|e| e.to_string())?;
    sums.push(auv.sum());
    ensure(sums.iter().all(|s| (s - 1.0).abs() <= 1e-9), || format!("weight sums {sums:?}"))?;
    Ok(format!("lambda_max=3, CR={cr:.1e}, weights 4/7 2/7 1/7; cycle rejected with CR={cycle_cr:.3}"))
}

/// Scaling F by alpha keeps the argmin and scales the optimum by alpha.
fn scaling_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let spec = BenchSpec { instances: 1, ..Default::default() };
    let mut checked = 0;
    let mut index = 0u64;
    while checked < 100 {
        let model = generate_model(&BenchSpec { seed: 9000, ..spec.clone() }, index);
        index += 1;
        let f = TradeoffVector::new((0..model.l()).map(|_| rng.gen_range(0.05..1.0)).collect(), rng.gen_range(0.05..1.0))
            .map_err(|e| e.to_string())?;
        let base = match exhaustive_search(&model, &f, &ExhaustiveConfig::default()) {
            Ok(r) => r,
            Err(SearchError::NoFeasibleAllocation { .. }) => continue,
            Err(e) => return Err(e.to_string()),
        };
        for alpha in [0.5, 2.0, 10.0] {
            let scaled = exhaustive_search(&model, &f.scaled(alpha).unwrap(), &ExhaustiveConfig::default()).map_err(|e| e.to_string())?;
            ensure(scaled.best == base.best, || format!("instance {index}, alpha {alpha}: argmin moved"))?;
            let expected = alpha * base.best_result.w;
            ensure((scaled.best_result.w - expected).abs() <= 1e-12 * expected, || {
                format!("instance {index}, alpha {alpha}: {} vs {expected}", scaled.best_result.w)
            })?;
        }
        checked += 1;
    }
    Ok(format!("100 feasible instances (of {index} generated), alpha in {{0.5, 2, 10}}"))
}

/// Identical inputs and seed give byte-identical reports.
fn determinism() -> Outcome {
    let auv = fixtures::auv();
    let f = derive_tradeoff(auv.comparison().unwrap()).map_err(|e| e.to_string())?;
    let generated = generate_model(&BenchSpec { n_range: IntRange::exactly(8), m_range: IntRange::exactly(6), ..Default::default() }, 0);
    let cases = [(auv, f), (generated.clone(), TradeoffVector::uniform(generated.l()))];
    for (model, f) in &cases {
        for seed in [0, 42, 987_654_321] {
            let json = || -> Result<String, String> {
                let rep = ga_search(model, f, &GaConfig::with_seed(seed)).map_err(|e| e.to_string())?;
                serde_json::to_string(&ReportView::new(model, &rep).without_timing()).map_err(|e| e.to_string())
            };
            let (a, b) = (json()?, json()?);
            ensure(a == b, || format!("seed {seed}: reports differ"))?;
        }
        let reruns = |_: ()| -> Result<String, String> {
            let reps = alternatives(model, f, &GaConfig::with_seed(3), 4).map_err(|e| e.to_string())?;
            serde_json::to_string(&ReportView::from_reruns(model, &reps).without_timing()).map_err(|e| e.to_string())
        };
        ensure(reruns(())? == reruns(())?, || "alternative re-runs differ".into())?;
    }
    Ok("GA and re-run reports byte-identical across repeated runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("timing sanity", timing_sanity),
        ("exhaustive oracle", exhaustive_oracle),
        ("evaluator correctness", evaluator_correctness),
        ("feasibility guarantee", feasibility_guarantee),
        ("AHP", ahp_fixtures),
        ("scaling invariance", scaling_invariance),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<22} {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<22} {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
