//! Allocation of software components onto heterogeneous computing units.
//!
//! A model describes what each component consumes on each unit, what every
//! unit provides, how intensely components talk to each other and what that
//! costs across units. Allocations are scored by a weighted sum of consumed
//! resources and cross-unit communication, with weights derived from the
//! architect's pairwise judgments ([`ahp`]). Infeasible allocations score 0
//! and are never selected.

pub mod ahp;
pub mod benchgen;
pub mod evaluator;
pub mod fixtures;
pub mod model;
pub mod report;
pub mod search;

pub use ahp::{derive_tradeoff, AhpError, PairwiseComparisonMatrix, TradeoffVector};
pub use evaluator::{evaluate, EvaluationResult};
pub use model::{load_model, save_model, validate_model, Allocation, ArchitectureModel, ModelDocument, ValidationReport};
pub use report::ReportView;
pub use search::{alternatives, exhaustive_search, ga_search, ExhaustiveConfig, GaConfig, SearchError, SearchReport};
