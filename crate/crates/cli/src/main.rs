use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use scall_core::ahp::{self, AhpError, TradeoffVector};
use scall_core::benchgen::{self, BenchOptions, BenchSpec, IntRange};
use scall_core::model::{self, ArchitectureModel, ParseErrorKind};
use scall_core::report::{AllocationView, ReportView};
use scall_core::search::{self, ExhaustiveConfig, GaConfig, SearchError};
use scall_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "scall", version, about = "Allocate software components to computing units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ga,
    Exhaustive,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model file and list every problem found.
    Validate { file: PathBuf },
    /// Derive the trade-off vector from the model's pairwise comparison.
    Weights { file: PathBuf },
    /// Search for the cheapest feasible allocation.
    Allocate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "ga")]
        method: MethodArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Independent GA runs to combine into a list of distinct allocations.
        #[arg(long)]
        alternatives: Option<usize>,
        /// Best allocations kept by exhaustive search.
        #[arg(long)]
        top_k: Option<usize>,
        /// Weigh every criterion equally instead of using the comparison.
        #[arg(long)]
        uniform_weights: bool,
        #[arg(long)]
        generations: Option<usize>,
        #[arg(long)]
        population: Option<usize>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Compare GA against exhaustive search on generated instances.
    Bench {
        #[arg(long, default_value = "3..7")]
        n: IntRange,
        #[arg(long, default_value = "3..5")]
        m: IntRange,
        #[arg(long, default_value = "2..3")]
        l: IntRange,
        #[arg(long, default_value_t = 30)]
        instances: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 1.5)]
        tightness: f64,
        /// Base seed for the GA; instance i uses a seed derived from it.
        #[arg(long, default_value_t = 0)]
        ga_seed: u64,
        /// Write one row per instance here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of static files served under `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn rejected(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::NoFeasibleAllocation { .. } => Failure::rejected(format!("{}: {e}", e.code())),
            _ => Failure::input(format!("{}: {e}", e.code())),
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ArchitectureModel, Failure> {
    let bytes = read(path)?;
    let doc = model::parse_document(&bytes).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    model::validate_model(&doc).map_err(|r| Failure::input(format!("{} is not a valid model:\n{r}", path.display())))
}

fn validate(path: &Path) -> Result<(), Failure> {
    let bytes = read(path)?;
    let doc = match model::parse_document(&bytes) {
        Ok(doc) => doc,
        Err(e) if e.kind == ParseErrorKind::Schema => {
            return Err(Failure::rejected(format!("SCHEMA: {e}")));
        }
        Err(e) => return Err(Failure::input(format!("{}: {e}", path.display()))),
    };
    match model::validate_model(&doc) {
        Ok(m) => {
            println!(
                "valid: {} components, {} units, {} resources, {} allocations",
                m.n(),
                m.m(),
                m.l(),
                m.space_size()
            );
            Ok(())
        }
        Err(report) => Err(Failure::rejected(report.to_string())),
    }
}

fn missing_comparison() -> Failure {
    Failure::rejected(
        "the model has no \"comparison\" matrix; add one with a row per resource plus one for \
         communication, or pass --uniform-weights",
    )
}

fn ahp_failure(e: AhpError) -> Failure {
    match e {
        AhpError::Inconsistent { cr, threshold } => Failure::rejected(format!(
            "INCONSISTENT: consistency ratio {cr:.4} exceeds {threshold}; revise the judgments that \
             contradict each other (e.g. a > b, b > c but c > a)"
        )),
        other => Failure::rejected(format!("INVALID_COMPARISON: {other}")),
    }
}

fn weights(path: &Path) -> Result<(), Failure> {
    let model = load(path)?;
    let c = model.comparison().ok_or_else(missing_comparison)?;
    let out = ahp::derive_tradeoff_with(c, ahp::DEFAULT_CR_THRESHOLD).map_err(ahp_failure)?;
    for (r, w) in model.resources().iter().zip(out.tradeoff.resource_weights()) {
        println!("{:<16} {w:.6}", r.id);
    }
    println!("{:<16} {:.6}", "communication", out.tradeoff.communication_weight());
    println!("lambda_max = {:.6}", out.lambda_max);
    println!("CR = {:.6}", out.consistency_ratio);
    Ok(())
}

fn tradeoff(model: &ArchitectureModel, uniform: bool) -> Result<TradeoffVector, Failure> {
    if uniform {
        return Ok(TradeoffVector::uniform(model.l()));
    }
    let c = model.comparison().ok_or_else(missing_comparison)?;
    ahp::derive_tradeoff(c).map_err(ahp_failure)
}

fn print_allocation(view: &ReportView, a: &AllocationView) {
    let width = view.components.iter().map(String::len).max().unwrap_or(0).max(9);
    println!("{:<width$}  unit", "component");
    for (c, u) in view.components.iter().zip(&a.allocation) {
        println!("{c:<width$}  {u}");
    }
    println!("w = {}", a.w);
    println!(
        "feasible = {}  (resources {}, bandwidth {})",
        a.feasible,
        if a.rho == 1 { "ok" } else { "exceeded" },
        if a.kappa == 1 { "ok" } else { "exceeded" }
    );
    println!("residual capacity:");
    for (u, row) in view.units.iter().zip(&a.residual) {
        let cells: Vec<String> = view.resources.iter().zip(row).map(|(r, v)| format!("{r}={v:.3}")).collect();
        println!("  {u}: {}", cells.join(" "));
    }
}

fn print_report(view: &ReportView) {
    let method = if view.exact { "exhaustive" } else { "ga" };
    match view.seed {
        Some(seed) => println!("method: {method} (seed {seed})"),
        None => println!("method: {method}"),
    }
    print_allocation(view, &view.best);
    if view.alternatives.len() > 1 {
        println!("alternatives:");
        for (i, a) in view.alternatives.iter().enumerate() {
            println!("  {:>2}. w = {}  [{}]", i + 1, a.w, a.allocation.join(", "));
        }
    }
    println!("evaluated {} allocations in {:.1} ms", view.evaluated, view.elapsed_ms);
}

#[allow(clippy::too_many_arguments)]
fn allocate(
    path: &Path,
    method: MethodArg,
    seed: Option<u64>,
    alternatives: Option<usize>,
    top_k: Option<usize>,
    uniform: bool,
    generations: Option<usize>,
    population: Option<usize>,
    json: bool,
) -> Result<(), Failure> {
    if alternatives == Some(0) || top_k == Some(0) {
        return Err(Failure::input("--alternatives and --top-k must be positive"));
    }
    let model = load(path)?;
    let f = tradeoff(&model, uniform)?;
    let view = match method {
        MethodArg::Exhaustive => {
            let cfg = ExhaustiveConfig {
                top_k: top_k.or(alternatives).unwrap_or(1),
                cap: search::exhaustive_cap_from_env(),
            };
            ReportView::new(&model, &search::exhaustive_search(&model, &f, &cfg)?)
        }
        MethodArg::Ga => {
            let mut cfg = GaConfig::default();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(g) = generations {
                cfg.generations = g;
            }
            if let Some(p) = population {
                cfg.population_size = p;
            }
            match alternatives {
                Some(count) => ReportView::from_reruns(&model, &search::alternatives(&model, &f, &cfg, count)?),
                None => ReportView::new(&model, &search::ga_search(&model, &f, &cfg)?),
            }
        }
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&view).expect("report serializes"));
    } else {
        print_report(&view);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    n: IntRange,
    m: IntRange,
    l: IntRange,
    instances: usize,
    seed: u64,
    density: f64,
    tightness: f64,
    ga_seed: u64,
    csv: Option<&Path>,
) -> Result<(), Failure> {
    let spec = BenchSpec { n_range: n, m_range: m, l_range: l, instances, seed, density, tightness };
    let ga = GaConfig::with_seed(ga_seed);
    let opts = BenchOptions { cap: Some(search::exhaustive_cap_from_env()), comparison: None };
    let stats = benchgen::run_benchmark(&spec, &ga, &opts).map_err(|e| Failure::input(e.to_string()))?;
    if let Some(path) = csv {
        let file = fs::File::create(path).map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))?;
        benchgen::write_csv(&stats, file).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    let summary = serde_json::json!({
        "instances": stats.per_instance.len(),
        "compared": stats.compared,
        "exactHits": stats.exact_hits,
        "meanGap": stats.mean_gap,
        "maxGap": stats.max_gap,
        "meanTGaMs": stats.mean_t_ga_ms,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn serve(host: &str, port: u16, static_dir: Option<PathBuf>) -> Result<(), Failure> {
    let addr: SocketAddr = format!("{host}:{port}").parse().map_err(|e| Failure::input(format!("bad address: {e}")))?;
    let cfg = ServiceConfig { exhaustive_cap: search::exhaustive_cap_from_env(), static_dir, ..Default::default() };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::input(e.to_string()))?;
    eprintln!("listening on http://{addr}");
    rt.block_on(scall_service::serve(addr, cfg)).map_err(|e| Failure::input(format!("server error: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Weights { file } => weights(&file),
        Command::Allocate { file, method, seed, alternatives, top_k, uniform_weights, generations, population, json } => {
            allocate(&file, method, seed, alternatives, top_k, uniform_weights, generations, population, json)
        }
        Command::Bench { n, m, l, instances, seed, density, tightness, ga_seed, csv } => {
            bench(n, m, l, instances, seed, density, tightness, ga_seed, csv.as_deref())
        }
        Command::Serve { port, host, static_dir } => serve(&host, port, static_dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
