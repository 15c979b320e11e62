//! Architecture model: software components, computing units, resources and
//! the five quantification matrices, plus the canonical JSON document.
//!
//! A [`ModelDocument`] is whatever decoded from JSON. [`validate_model`] turns
//! it into an immutable [`ArchitectureModel`] or a [`ValidationReport`] listing
//! every problem found. Internally units, components and resources are dense
//! 0-based indices fixed by their order in the document.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ahp::{comparison_violations, PairwiseComparisonMatrix, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceDef {
    pub id: String,
    #[serde(default)]
    pub name: String,
    /// Measurement unit label such as "MB" or "W".
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComputingUnit {
    pub id: String,
    #[serde(default)]
    pub name: String,
    /// Free-text tag, e.g. CPU, GPU or FPGA.
    #[serde(default)]
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoftwareComponent {
    pub id: String,
    #[serde(default)]
    pub name: String,
    /// Unit ids this component may be deployed to. Empty means any unit.
    #[serde(rename = "allowedUnits", default)]
    pub allowed_units: Vec<String>,
}

/// The model as it appears on the wire. Field order is the canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub resources: Vec<ResourceDef>,
    pub units: Vec<ComputingUnit>,
    pub components: Vec<SoftwareComponent>,
    /// Consumption, indexed `[component][unit][resource]`.
    #[serde(rename = "T")]
    pub consumption: Vec<Vec<Vec<f64>>>,
    /// Availability, indexed `[unit][resource]`.
    #[serde(rename = "R")]
    pub availability: Vec<Vec<f64>>,
    /// Communication intensity, `[component][component]`.
    #[serde(rename = "K")]
    pub intensity: Vec<Vec<f64>>,
    /// Platform communication cost, `[unit][unit]`.
    #[serde(rename = "C")]
    pub comm_cost: Vec<Vec<f64>>,
    /// Bandwidth, `[unit][unit]`; 0 means no physical link.
    #[serde(rename = "B")]
    pub bandwidth: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none", deserialize_with = "deserialize_comparison")]
    pub comparison: Option<Vec<Vec<f64>>>,
}

/// Comparison entries may be numbers or strings such as `"1/3"` or `"5"`.
pub fn deserialize_comparison<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Vec<f64>>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Num(f64),
        Text(String),
    }

    let raw: Option<Vec<Vec<Entry>>> = Option::deserialize(d)?;
    raw.map(|rows| {
        rows.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| match e {
                        Entry::Num(v) => Ok(v),
                        Entry::Text(s) => parse_judgment(&s).ok_or_else(|| de::Error::custom(format!("bad judgment {s:?}"))),
                    })
                    .collect()
            })
            .collect()
    })
    .transpose()
}

/// Parses `"a/b"` or a plain decimal.
pub fn parse_judgment(s: &str) -> Option<f64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            (den != 0.0).then(|| num / den)
        }
        None => s.parse().ok(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IssueCode {
    /// The document decodes as JSON but not as a model.
    Schema,
    EmptyList,
    EmptyId,
    DuplicateId,
    DimensionMismatch,
    NonFinite,
    NegativeEntry,
    NonzeroDiagonal,
    #[serde(rename = "ASYMMETRIC_K")]
    AsymmetricK,
    #[serde(rename = "ASYMMETRIC_C")]
    AsymmetricC,
    #[serde(rename = "ASYMMETRIC_B")]
    AsymmetricB,
    UnknownUnitRef,
    NoAllowedUnit,
    ComparisonDimension,
    ComparisonNonPositive,
    ComparisonDiagonal,
    ComparisonNotReciprocal,
    ComparisonOutOfScale,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    /// Location inside the document, e.g. `K[0][1]` or `components[2]`.
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    fn push(&mut self, code: IssueCode, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { code, path: path.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            let code = serde_json::to_value(issue.code).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            writeln!(f, "{code:<26} {:<18} {}", issue.path, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Not JSON at all, or truncated.
    Syntax,
    /// Valid JSON that does not have the model's shape.
    Schema,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{message} at line {line}, column {column}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl From<serde_json::Error> for ParseError {
    fn from(e: serde_json::Error) -> Self {
        let kind = match e.classify() {
            serde_json::error::Category::Data => ParseErrorKind::Schema,
            _ => ParseErrorKind::Syntax,
        };
        let full = e.to_string();
        let message = full.split(" at line ").next().unwrap_or(&full).to_string();
        ParseError { kind, message, line: e.line(), column: e.column() }
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot parse model: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
}

/// A validated, immutable architecture model.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureModel {
    resources: Vec<ResourceDef>,
    units: Vec<ComputingUnit>,
    components: Vec<SoftwareComponent>,
    consumption: Vec<f64>,
    availability: Vec<f64>,
    intensity: Vec<f64>,
    comm_cost: Vec<f64>,
    bandwidth: Vec<f64>,
    allowed: Vec<Vec<usize>>,
    restricted: Vec<bool>,
    comparison: Option<PairwiseComparisonMatrix>,
}

impl ArchitectureModel {
    /// Number of components.
    pub fn n(&self) -> usize {
        self.components.len()
    }

    /// Number of computing units.
    pub fn m(&self) -> usize {
        self.units.len()
    }

    /// Number of resources.
    pub fn l(&self) -> usize {
        self.resources.len()
    }

    pub fn resources(&self) -> &[ResourceDef] {
        &self.resources
    }

    pub fn units(&self) -> &[ComputingUnit] {
        &self.units
    }

    pub fn components(&self) -> &[SoftwareComponent] {
        &self.components
    }

    #[inline]
    pub fn consumption(&self, component: usize, unit: usize, resource: usize) -> f64 {
        self.consumption[(component * self.m() + unit) * self.l() + resource]
    }

    /// Consumption of every resource by `component` when hosted on `unit`.
    #[inline]
    pub fn consumption_row(&self, component: usize, unit: usize) -> &[f64] {
        let start = (component * self.m() + unit) * self.l();
        &self.consumption[start..start + self.l()]
    }

    #[inline]
    pub fn availability(&self, unit: usize, resource: usize) -> f64 {
        self.availability[unit * self.l() + resource]
    }

    #[inline]
    pub fn intensity(&self, a: usize, b: usize) -> f64 {
        self.intensity[a * self.n() + b]
    }

    #[inline]
    pub fn comm_cost(&self, g: usize, h: usize) -> f64 {
        self.comm_cost[g * self.m() + h]
    }

    #[inline]
    pub fn bandwidth(&self, g: usize, h: usize) -> f64 {
        self.bandwidth[g * self.m() + h]
    }

    /// Sorted unit indices `component` may use (all units when unrestricted).
    pub fn allowed_units(&self, component: usize) -> &[usize] {
        &self.allowed[component]
    }

    pub fn is_allowed(&self, component: usize, unit: usize) -> bool {
        !self.restricted[component] || self.allowed[component].binary_search(&unit).is_ok()
    }

    pub fn comparison(&self) -> Option<&PairwiseComparisonMatrix> {
        self.comparison.as_ref()
    }

    pub fn unit_index(&self, id: &str) -> Option<usize> {
        self.units.iter().position(|u| u.id == id)
    }

    /// `m^n`, saturating.
    pub fn space_size(&self) -> u128 {
        (self.m() as u128).checked_pow(self.n() as u32).unwrap_or(u128::MAX)
    }

    /// Number of allocations that respect every allowed-unit constraint.
    pub fn constrained_space_size(&self) -> u128 {
        self.allowed.iter().try_fold(1u128, |acc, a| acc.checked_mul(a.len() as u128)).unwrap_or(u128::MAX)
    }

    pub fn to_document(&self) -> ModelDocument {
        let (n, m, l) = (self.n(), self.m(), self.l());
        ModelDocument {
            resources: self.resources.clone(),
            units: self.units.clone(),
            components: self.components.clone(),
            consumption: (0..n).map(|i| (0..m).map(|h| self.consumption_row(i, h).to_vec()).collect()).collect(),
            availability: self.availability.chunks(l).map(<[f64]>::to_vec).collect(),
            intensity: self.intensity.chunks(n).map(<[f64]>::to_vec).collect(),
            comm_cost: self.comm_cost.chunks(m).map(<[f64]>::to_vec).collect(),
            bandwidth: self.bandwidth.chunks(m).map(<[f64]>::to_vec).collect(),
            comparison: self.comparison.as_ref().map(|c| c.rows().to_vec()),
        }
    }
}

/// Decodes a model document without validating it.
pub fn parse_document(bytes: &[u8]) -> Result<ModelDocument, ParseError> {
    Ok(serde_json::from_slice(bytes)?)
}

pub fn load_model(bytes: &[u8]) -> Result<ArchitectureModel, LoadError> {
    let doc = parse_document(bytes)?;
    validate_model(&doc).map_err(LoadError::Invalid)
}

/// Canonical pretty-printed JSON of a validated model.
pub fn save_model(model: &ArchitectureModel) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&model.to_document()).expect("model documents always serialize");
    out.push(b'\n');
    out
}

fn check_ids<'a>(report: &mut ValidationReport, list: &str, ids: impl Iterator<Item = &'a str>) {
    let mut seen = HashSet::new();
    let mut count = 0;
    for (idx, id) in ids.enumerate() {
        count += 1;
        if id.trim().is_empty() {
            report.push(IssueCode::EmptyId, format!("{list}[{idx}]"), format!("{list} entry has an empty id"));
        } else if !seen.insert(id) {
            report.push(IssueCode::DuplicateId, format!("{list}[{idx}]"), format!("duplicate id {id:?} in {list}"));
        }
    }
    if count == 0 {
        report.push(IssueCode::EmptyList, list, format!("{list} must contain at least one entry"));
    }
}

fn check_entries(report: &mut ValidationReport, path: &str, value: f64) {
    if !value.is_finite() {
        report.push(IssueCode::NonFinite, path, format!("{value} is not finite"));
    } else if value < 0.0 {
        report.push(IssueCode::NegativeEntry, path, format!("{value} is negative"));
    }
}

/// Checks an `rows x cols` matrix; returns true when its shape matches.
fn check_matrix(report: &mut ValidationReport, name: &str, mat: &[Vec<f64>], rows: usize, cols: usize) -> bool {
    let mut ok = true;
    if mat.len() != rows {
        ok = false;
        report.push(IssueCode::DimensionMismatch, name, format!("{name} has {} rows, expected {rows}", mat.len()));
    }
    for (r, row) in mat.iter().enumerate() {
        if row.len() != cols {
            ok = false;
            report.push(
                IssueCode::DimensionMismatch,
                format!("{name}[{r}]"),
                format!("{name}[{r}] has {} entries, expected {cols}", row.len()),
            );
        }
        for (c, v) in row.iter().enumerate() {
            check_entries(report, &format!("{name}[{r}][{c}]"), *v);
        }
    }
    ok
}

fn check_symmetric(report: &mut ValidationReport, name: &str, mat: &[Vec<f64>], code: IssueCode) {
    for a in 0..mat.len() {
        if mat[a][a] != 0.0 {
            report.push(IssueCode::NonzeroDiagonal, format!("{name}[{a}][{a}]"), format!("{name} diagonal must be 0, found {}", mat[a][a]));
        }
        for b in a + 1..mat.len() {
            // NaN compares unequal and has already been reported as non-finite
            if mat[a][b] != mat[b][a] && !(mat[a][b].is_nan() || mat[b][a].is_nan()) {
                report.push(
                    code,
                    format!("{name}[{a}][{b}]"),
                    format!("{name}[{a}][{b}] = {} but {name}[{b}][{a}] = {}", mat[a][b], mat[b][a]),
                );
            }
        }
    }
}

/// Validates a decoded document, collecting every violation.
pub fn validate_model(doc: &ModelDocument) -> Result<ArchitectureModel, ValidationReport> {
    let mut report = ValidationReport::default();
    let (n, m, l) = (doc.components.len(), doc.units.len(), doc.resources.len());

    check_ids(&mut report, "resources", doc.resources.iter().map(|r| r.id.as_str()));
    check_ids(&mut report, "units", doc.units.iter().map(|u| u.id.as_str()));
    check_ids(&mut report, "components", doc.components.iter().map(|c| c.id.as_str()));

    let unit_index: HashMap<&str, usize> = doc.units.iter().enumerate().map(|(i, u)| (u.id.as_str(), i)).collect();
    let mut allowed = Vec::with_capacity(n);
    let mut restricted = Vec::with_capacity(n);
    for (i, comp) in doc.components.iter().enumerate() {
        if comp.allowed_units.is_empty() {
            allowed.push((0..m).collect::<Vec<_>>());
            restricted.push(false);
            continue;
        }
        let mut set = Vec::new();
        for id in &comp.allowed_units {
            match unit_index.get(id.as_str()) {
                Some(&h) => set.push(h),
                None => report.push(
                    IssueCode::UnknownUnitRef,
                    format!("components[{i}].allowedUnits"),
                    format!("component {:?} references unknown unit {id:?}", comp.id),
                ),
            }
        }
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            report.push(
                IssueCode::NoAllowedUnit,
                format!("components[{i}].allowedUnits"),
                format!("component {:?} cannot be placed on any existing unit", comp.id),
            );
        }
        allowed.push(set);
        restricted.push(true);
    }

    let mut t_ok = doc.consumption.len() == n;
    if !t_ok {
        report.push(IssueCode::DimensionMismatch, "T", format!("T has {} component slices, expected {n}", doc.consumption.len()));
    }
    for (i, slice) in doc.consumption.iter().enumerate() {
        t_ok &= check_matrix(&mut report, &format!("T[{i}]"), slice, m, l);
    }
    let r_ok = check_matrix(&mut report, "R", &doc.availability, m, l);
    let k_ok = check_matrix(&mut report, "K", &doc.intensity, n, n);
    let c_ok = check_matrix(&mut report, "C", &doc.comm_cost, m, m);
    let b_ok = check_matrix(&mut report, "B", &doc.bandwidth, m, m);
    if k_ok {
        check_symmetric(&mut report, "K", &doc.intensity, IssueCode::AsymmetricK);
    }
    if c_ok {
        check_symmetric(&mut report, "C", &doc.comm_cost, IssueCode::AsymmetricC);
    }
    if b_ok {
        check_symmetric(&mut report, "B", &doc.bandwidth, IssueCode::AsymmetricB);
    }

    let mut comparison = None;
    if let Some(rows) = &doc.comparison {
        let q = l + 1;
        if rows.len() != q || rows.iter().any(|r| r.len() != q) {
            report.push(
                IssueCode::ComparisonDimension,
                "comparison",
                format!("comparison must be {q}x{q} (one criterion per resource plus communication)"),
            );
        } else {
            let violations = comparison_violations(rows);
            for v in &violations {
                let code = match v.kind {
                    ViolationKind::Empty | ViolationKind::NotSquare => IssueCode::ComparisonDimension,
                    ViolationKind::NonPositive => IssueCode::ComparisonNonPositive,
                    ViolationKind::Diagonal => IssueCode::ComparisonDiagonal,
                    ViolationKind::NotReciprocal => IssueCode::ComparisonNotReciprocal,
                    ViolationKind::OutOfScale => IssueCode::ComparisonOutOfScale,
                };
                report.push(code, format!("comparison[{}][{}]", v.row, v.col), v.message.clone());
            }
            if violations.is_empty() {
                comparison = PairwiseComparisonMatrix::new(rows.clone()).ok();
            }
        }
    }

    if !report.is_empty() || !(t_ok && r_ok && k_ok && c_ok && b_ok) {
        return Err(report);
    }

    let flat = |mat: &[Vec<f64>]| mat.iter().flatten().copied().collect::<Vec<_>>();
    Ok(ArchitectureModel {
        resources: doc.resources.clone(),
        units: doc.units.clone(),
        components: doc.components.clone(),
        consumption: doc.consumption.iter().flatten().flatten().copied().collect(),
        availability: flat(&doc.availability),
        intensity: flat(&doc.intensity),
        comm_cost: flat(&doc.comm_cost),
        bandwidth: flat(&doc.bandwidth),
        allowed,
        restricted,
        comparison,
    })
}

/// Assignment of every component to one computing unit, by unit index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<usize>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocationError {
    #[error("allocation has {got} entries but the model has {expected} components")]
    Length { expected: usize, got: usize },
    #[error("component {component} is mapped to unknown unit {unit}")]
    UnknownUnit { component: usize, unit: String },
    #[error("component {component} may not be placed on unit {unit}")]
    NotAllowed { component: usize, unit: usize },
}

impl Allocation {
    /// Wraps a raw index vector without checking it against a model.
    pub fn from_indices(p: Vec<usize>) -> Self {
        Self(p)
    }

    /// Checks length, unit range and allowed-unit constraints.
    pub fn new(model: &ArchitectureModel, p: Vec<usize>) -> Result<Self, AllocationError> {
        if p.len() != model.n() {
            return Err(AllocationError::Length { expected: model.n(), got: p.len() });
        }
        for (i, &h) in p.iter().enumerate() {
            if h >= model.m() {
                return Err(AllocationError::UnknownUnit { component: i, unit: h.to_string() });
            }
            if !model.is_allowed(i, h) {
                return Err(AllocationError::NotAllowed { component: i, unit: h });
            }
        }
        Ok(Self(p))
    }

    pub fn from_unit_ids<S: AsRef<str>>(model: &ArchitectureModel, ids: &[S]) -> Result<Self, AllocationError> {
        let p = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                model.unit_index(id.as_ref()).ok_or_else(|| AllocationError::UnknownUnit { component: i, unit: id.as_ref().to_string() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(model, p)
    }

    pub fn unit_ids<'m>(&self, model: &'m ArchitectureModel) -> Vec<&'m str> {
        self.0.iter().map(|&h| model.units()[h].id.as_str()).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.0[i]
    }
}
