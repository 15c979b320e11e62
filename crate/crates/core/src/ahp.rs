//! Analytic Hierarchy Process: priority weights from a pairwise comparison
//! matrix, with Saaty's consistency ratio.
//!
//! The criteria are the model's resources in document order followed by one
//! communication criterion, so the last priority becomes the communication
//! weight `fc` of the trade-off vector.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance for `M[a][b] * M[b][a] == 1`.
pub const RECIPROCAL_TOLERANCE: f64 = 1e-9;

/// Default acceptance threshold for the consistency ratio.
pub const DEFAULT_CR_THRESHOLD: f64 = 0.1;

/// Power iteration stops once the infinity-norm change drops below this.
pub const POWER_ITERATION_TOLERANCE: f64 = 1e-12;

pub const POWER_ITERATION_CAP: usize = 10_000;

/// Saaty random consistency index, indexed by matrix order (entry 0 unused).
const RANDOM_INDEX: [f64; 11] = [0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49];

pub const MAX_ORDER: usize = RANDOM_INDEX.len() - 1;

const SCALE_MIN: f64 = 1.0 / 9.0;
const SCALE_MAX: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    Empty,
    NotSquare,
    NonPositive,
    Diagonal,
    NotReciprocal,
    OutOfScale,
}

/// One broken invariant of a comparison matrix, located at `(row, col)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonViolation {
    pub kind: ViolationKind,
    pub row: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ComparisonViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}][{}]: {}", self.row, self.col, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AhpError {
    #[error("invalid comparison matrix at {0}")]
    InvalidMatrix(ComparisonViolation),
    #[error("comparison matrix of order {0} is not supported (maximum {MAX_ORDER})")]
    UnsupportedOrder(usize),
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("inconsistent judgments: consistency ratio {cr:.4} is not below {threshold}")]
    Inconsistent { cr: f64, threshold: f64 },
}

/// Lists every violated invariant of a candidate comparison matrix.
pub fn comparison_violations(rows: &[Vec<f64>]) -> Vec<ComparisonViolation> {
    let mut out = Vec::new();
    let q = rows.len();
    if q == 0 {
        out.push(ComparisonViolation {
            kind: ViolationKind::Empty,
            row: 0,
            col: 0,
            message: "comparison matrix is empty".into(),
        });
        return out;
    }
    for (a, row) in rows.iter().enumerate() {
        if row.len() != q {
            out.push(ComparisonViolation {
                kind: ViolationKind::NotSquare,
                row: a,
                col: 0,
                message: format!("row has {} entries, expected {q}", row.len()),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for a in 0..q {
        for b in 0..q {
            let v = rows[a][b];
            if !(v.is_finite() && v > 0.0) {
                out.push(ComparisonViolation {
                    kind: ViolationKind::NonPositive,
                    row: a,
                    col: b,
                    message: format!("entry {v} is not a positive finite number"),
                });
                continue;
            }
            if a == b {
                if v != 1.0 {
                    out.push(ComparisonViolation {
                        kind: ViolationKind::Diagonal,
                        row: a,
                        col: b,
                        message: format!("diagonal entry is {v}, expected 1"),
                    });
                }
                continue;
            }
            if v < SCALE_MIN * (1.0 - RECIPROCAL_TOLERANCE) || v > SCALE_MAX * (1.0 + RECIPROCAL_TOLERANCE) {
                out.push(ComparisonViolation {
                    kind: ViolationKind::OutOfScale,
                    row: a,
                    col: b,
                    message: format!("entry {v} is outside the 1/9..9 scale"),
                });
            }
            let mirror = rows[b][a];
            if a < b && mirror.is_finite() && mirror > 0.0 && ((v * mirror) - 1.0).abs() > RECIPROCAL_TOLERANCE {
                out.push(ComparisonViolation {
                    kind: ViolationKind::NotReciprocal,
                    row: a,
                    col: b,
                    message: format!("entry {v} is not the reciprocal of its mirror {mirror}"),
                });
            }
        }
    }
    out
}

/// A validated reciprocal comparison matrix on the Saaty 1/9..9 scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PairwiseComparisonMatrix {
    rows: Vec<Vec<f64>>,
}

impl PairwiseComparisonMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, AhpError> {
        if let Some(v) = comparison_violations(&rows).into_iter().next() {
            return Err(AhpError::InvalidMatrix(v));
        }
        Ok(Self { rows })
    }

    /// Matrix with every judgment equal to 1.
    pub fn uniform(order: usize) -> Self {
        Self { rows: vec![vec![1.0; order]; order] }
    }

    /// Builds the fully consistent matrix `M[a][b] = w[a] / w[b]`.
    ///
    /// Ratios outside the Saaty scale are rejected like any other input.
    pub fn from_priorities(w: &[f64]) -> Result<Self, AhpError> {
        let rows = w
            .iter()
            .enumerate()
            .map(|(a, wa)| w.iter().enumerate().map(|(b, wb)| if a == b { 1.0 } else { wa / wb }).collect())
            .collect();
        Self::new(rows)
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.rows[a][b]
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().zip(w).map(|(m, x)| m * x).sum()).collect()
    }
}

/// Principal eigenpair of a comparison matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigen {
    pub lambda_max: f64,
    /// Normalized so the entries sum to 1.
    pub weights: Vec<f64>,
}

/// Power iteration from the uniform vector.
pub fn principal_eigen(m: &PairwiseComparisonMatrix) -> Result<Eigen, AhpError> {
    let q = m.order();
    let mut w = vec![1.0 / q as f64; q];
    for _ in 0..POWER_ITERATION_CAP {
        let mw = m.apply(&w);
        let total: f64 = mw.iter().sum();
        let next: Vec<f64> = mw.iter().map(|x| x / total).collect();
        let change = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = next;
        if change < POWER_ITERATION_TOLERANCE {
            // with sum(w) = 1, sum(Mw) is the Rayleigh-style eigenvalue estimate
            let lambda_max = m.apply(&w).iter().sum();
            return Ok(Eigen { lambda_max, weights: w });
        }
    }
    Err(AhpError::NoConvergence(POWER_ITERATION_CAP))
}

/// Saaty random index for a matrix of the given order.
pub fn random_index(order: usize) -> Result<f64, AhpError> {
    RANDOM_INDEX.get(order).copied().filter(|_| order >= 1).ok_or(AhpError::UnsupportedOrder(order))
}

fn ratio_from_lambda(lambda_max: f64, q: usize) -> Result<f64, AhpError> {
    let ri = random_index(q)?;
    if q <= 2 {
        return Ok(0.0);
    }
    let ci = (lambda_max - q as f64) / (q as f64 - 1.0);
    Ok((ci / ri).max(0.0))
}

pub fn consistency_ratio(m: &PairwiseComparisonMatrix) -> Result<f64, AhpError> {
    let q = m.order();
    random_index(q)?;
    if q <= 2 {
        return Ok(0.0);
    }
    let eigen = principal_eigen(m)?;
    ratio_from_lambda(eigen.lambda_max, q)
}

/// Per-criterion weights scalarizing the allocation cost: one weight per
/// resource plus the communication weight.
///
/// Weights produced by [`derive_tradeoff`] and [`TradeoffVector::uniform`]
/// sum to 1. [`TradeoffVector::new`] only requires positive finite weights so
/// that scaled vectors can be evaluated as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffVector {
    f: Vec<f64>,
    fc: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("trade-off weights must be positive and finite (got {0:?})")]
pub struct InvalidWeights(pub Vec<f64>);

impl TradeoffVector {
    pub fn new(f: Vec<f64>, fc: f64) -> Result<Self, InvalidWeights> {
        if f.is_empty() || f.iter().chain(std::iter::once(&fc)).any(|w| !(w.is_finite() && *w > 0.0)) {
            let mut all = f;
            all.push(fc);
            return Err(InvalidWeights(all));
        }
        Ok(Self { f, fc })
    }

    /// Equal weight `1 / (resources + 1)` for every criterion.
    pub fn uniform(resources: usize) -> Self {
        let w = 1.0 / (resources + 1) as f64;
        Self { f: vec![w; resources], fc: w }
    }

    pub fn resource_weights(&self) -> &[f64] {
        &self.f
    }

    pub fn communication_weight(&self) -> f64 {
        self.fc
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// All `l + 1` weights, communication last.
    pub fn as_criteria(&self) -> Vec<f64> {
        self.f.iter().copied().chain(std::iter::once(self.fc)).collect()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self, InvalidWeights> {
        Self::new(self.f.iter().map(|w| w * alpha).collect(), self.fc * alpha)
    }

    pub fn sum(&self) -> f64 {
        self.f.iter().sum::<f64>() + self.fc
    }
}

/// Everything the AHP step reports about a set of judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct AhpOutcome {
    pub tradeoff: TradeoffVector,
    pub lambda_max: f64,
    pub consistency_ratio: f64,
}

pub fn derive_tradeoff(m: &PairwiseComparisonMatrix) -> Result<TradeoffVector, AhpError> {
    derive_tradeoff_with(m, DEFAULT_CR_THRESHOLD).map(|o| o.tradeoff)
}

/// Like [`derive_tradeoff`] with an explicit consistency threshold, also
/// returning the eigenvalue and ratio.
pub fn derive_tradeoff_with(m: &PairwiseComparisonMatrix, threshold: f64) -> Result<AhpOutcome, AhpError> {
    let q = m.order();
    random_index(q)?;
    if q < 2 {
        // a lone criterion leaves no room for any resource weight
        return Err(AhpError::UnsupportedOrder(q));
    }
    let eigen = principal_eigen(m)?;
    let cr = ratio_from_lambda(eigen.lambda_max, q)?;
    if cr >= threshold {
        return Err(AhpError::Inconsistent { cr, threshold });
    }
    let mut weights = eigen.weights;
    let fc = weights.pop().expect("order >= 2");
    let tradeoff = TradeoffVector::new(weights, fc).map_err(|_| AhpError::NoConvergence(POWER_ITERATION_CAP))?;
    Ok(AhpOutcome { tradeoff, lambda_max: eigen.lambda_max, consistency_ratio: cr })
}
