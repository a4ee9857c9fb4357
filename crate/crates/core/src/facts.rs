//! The data fact model: a 5-tuple of type, subspace, breakdown, measures
//! and focus, together with its well-formedness rules and derived values.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::{self, StatsError};
use crate::table::{Aggregation, DataTable, FieldKind, FieldMeta, Filter, Group, RowSet, Subspace, TableError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("fact is invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("subspace selects no rows")]
    EmptyScope,
    #[error("insufficient data: need at least {needed} groups, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("focus value '{0}' not present in the subspace")]
    FocusNotFound(String),
    #[error("focus '{0}' is neither the maximum nor the minimum group")]
    FocusNotExtreme(String),
    #[error("degenerate data: {0}")]
    Degenerate(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FactType {
    Value,
    Difference,
    Proportion,
    Trend,
    Categorization,
    Distribution,
    Rank,
    Association,
    Extreme,
    Outlier,
}

impl FactType {
    pub const ALL: [FactType; 10] = [
        FactType::Value,
        FactType::Difference,
        FactType::Proportion,
        FactType::Trend,
        FactType::Categorization,
        FactType::Distribution,
        FactType::Rank,
        FactType::Association,
        FactType::Extreme,
        FactType::Outlier,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            FactType::Value => "value",
            FactType::Difference => "difference",
            FactType::Proportion => "proportion",
            FactType::Trend => "trend",
            FactType::Categorization => "categorization",
            FactType::Distribution => "distribution",
            FactType::Rank => "rank",
            FactType::Association => "association",
            FactType::Extreme => "extreme",
            FactType::Outlier => "outlier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        FactType::ALL.into_iter().find(|t| t.name() == s)
    }

    /// Field shape required by the type.
    pub fn constraint(self) -> Constraint {
        use BreakdownRule as B;
        use FocusRule as F;
        let (breakdown, measures, focus) = match self {
            FactType::Value => (B::None, 1, F::Exactly(0)),
            FactType::Difference => (B::Dimension, 1, F::Exactly(2)),
            FactType::Proportion => (B::Dimension, 1, F::Exactly(1)),
            FactType::Trend => (B::Temporal, 1, F::AtLeast(0)),
            FactType::Categorization => (B::Categorical, 0, F::AtLeast(0)),
            FactType::Distribution => (B::Categorical, 1, F::AtLeast(0)),
            FactType::Rank => (B::Dimension, 1, F::Exactly(3)),
            FactType::Association => (B::Dimension, 2, F::Exactly(0)),
            FactType::Extreme => (B::Dimension, 1, F::Exactly(1)),
            FactType::Outlier => (B::Dimension, 1, F::Exactly(1)),
        };
        Constraint {
            breakdown,
            measures,
            focus,
        }
    }
}

impl fmt::Display for FactType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownRule {
    None,
    /// Categorical or temporal.
    Dimension,
    Temporal,
    Categorical,
}

impl BreakdownRule {
    pub fn accepts(self, kind: FieldKind) -> bool {
        match self {
            BreakdownRule::None => false,
            BreakdownRule::Dimension => kind.is_dimension(),
            BreakdownRule::Temporal => kind == FieldKind::Temporal,
            BreakdownRule::Categorical => kind == FieldKind::Categorical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocusRule {
    Exactly(usize),
    AtLeast(usize),
}

impl FocusRule {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            FocusRule::Exactly(k) => n == k,
            FocusRule::AtLeast(k) => n >= k,
        }
    }
}

/// One row of the type/field constraint matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub breakdown: BreakdownRule,
    pub measures: usize,
    pub focus: FocusRule,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Measure {
    pub field: String,
    #[serde(rename = "aggregate")]
    pub agg: Aggregation,
}

impl Measure {
    pub fn new(field: impl Into<String>, agg: Aggregation) -> Self {
        Measure {
            field: field.into(),
            agg,
        }
    }
}

/// A data fact. Derived values and scores live outside the tuple so that
/// facts can be compared and hashed structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DataFact {
    pub fact_type: FactType,
    pub subspace: Subspace,
    /// At most one field.
    pub breakdown: Vec<String>,
    pub measures: Vec<Measure>,
    /// Values of the breakdown field singled out by the fact.
    pub focus: Vec<Filter>,
}

impl DataFact {
    pub fn new(fact_type: FactType) -> Self {
        DataFact {
            fact_type,
            subspace: Subspace::all(),
            breakdown: Vec::new(),
            measures: Vec::new(),
            focus: Vec::new(),
        }
    }

    pub fn with_subspace(mut self, filters: Vec<Filter>) -> Self {
        self.subspace = Subspace::new(filters);
        self
    }

    pub fn with_breakdown(mut self, field: impl Into<String>) -> Self {
        self.breakdown = vec![field.into()];
        self
    }

    pub fn with_measure(mut self, field: impl Into<String>, agg: Aggregation) -> Self {
        self.measures.push(Measure::new(field, agg));
        self
    }

    pub fn with_focus(mut self, field: impl Into<String>, value: impl Into<String>) -> Self {
        self.focus.push(Filter::new(field, value));
        self
    }

    pub fn breakdown_field(&self) -> Option<&str> {
        self.breakdown.first().map(String::as_str)
    }

    pub fn primary_measure(&self) -> Option<&Measure> {
        self.measures.first()
    }

    /// The (field, aggregation) actually grouped: categorization counts
    /// rows of its breakdown field.
    fn grouping_measure(&self) -> Option<(String, Aggregation)> {
        match self.measures.first() {
            Some(m) => Some((m.field.clone(), m.agg)),
            None => self
                .breakdown_field()
                .map(|b| (b.to_string(), Aggregation::Count)),
        }
    }

    /// Group values of the primary measure over the breakdown, restricted to
    /// the subspace.
    pub fn groups(&self, table: &DataTable) -> Result<Vec<Group>, FactError> {
        let rows = table.select_subspace(&self.subspace)?;
        self.groups_in(table, &rows)
    }

    fn groups_in(&self, table: &DataTable, rows: &RowSet) -> Result<Vec<Group>, FactError> {
        let (field, agg) = self
            .grouping_measure()
            .ok_or_else(|| FactError::Invalid(vec!["fact has neither measure nor breakdown".into()]))?;
        let breakdown: Vec<&str> = self.breakdown.iter().map(String::as_str).collect();
        Ok(table.group_and_aggregate(rows, &breakdown, &field, agg)?)
    }

    /// Per-group values of both measures of an association fact, restricted
    /// to groups where both are defined. Keys are in the first measure's
    /// group order.
    pub fn paired_groups(
        &self,
        table: &DataTable,
    ) -> Result<Vec<(String, f64, f64)>, FactError> {
        let rows = table.select_subspace(&self.subspace)?;
        let breakdown: Vec<&str> = self.breakdown.iter().map(String::as_str).collect();
        let [a, b] = self.measures.as_slice() else {
            return Err(FactError::Invalid(vec!["association needs two measures".into()]));
        };
        let ga = table.group_and_aggregate(&rows, &breakdown, &a.field, a.agg)?;
        let gb = table.group_and_aggregate(&rows, &breakdown, &b.field, b.agg)?;
        Ok(ga
            .into_iter()
            .filter_map(|g| {
                gb.iter()
                    .find(|h| h.key == g.key)
                    .map(|h| (g.label(), g.value, h.value))
            })
            .collect())
    }

    pub fn focus_values(&self) -> Vec<&str> {
        self.focus.iter().map(|f| f.value.as_str()).collect()
    }

    /// Rows in the subspace singled out by the focus; empty when the fact
    /// has no focus.
    pub fn focus_rows(&self, table: &DataTable) -> Result<RowSet, FactError> {
        if self.focus.is_empty() {
            return Ok(RowSet::default());
        }
        let scope = table.select_subspace(&self.subspace)?;
        let mut hit = RowSet::default();
        for f in &self.focus {
            hit = hit.union(&table.filter_rows(f)?);
        }
        Ok(scope.intersect(&hit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendDirection {
    Increasing,
    Decreasing,
}

impl TrendDirection {
    pub fn name(self) -> &'static str {
        match self {
            TrendDirection::Increasing => "increasing",
            TrendDirection::Decreasing => "decreasing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremeKind {
    Max,
    Min,
}

/// The summary a fact states about its data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivedValue {
    Value { value: f64 },
    Difference { value: f64 },
    Proportion { value: f64 },
    Trend { direction: TrendDirection, slope: f64 },
    Categorization { count: usize },
    Association { r: f64 },
    Extreme { which: ExtremeKind, value: f64 },
    Outlier { score: f64 },
    NotApplicable,
}

impl DerivedValue {
    /// The headline number, if the variant has one.
    pub fn number(&self) -> Option<f64> {
        match *self {
            DerivedValue::Value { value }
            | DerivedValue::Difference { value }
            | DerivedValue::Proportion { value }
            | DerivedValue::Extreme { value, .. } => Some(value),
            DerivedValue::Trend { slope, .. } => Some(slope),
            DerivedValue::Categorization { count } => Some(count as f64),
            DerivedValue::Association { r } => Some(r),
            DerivedValue::Outlier { score } => Some(score),
            DerivedValue::NotApplicable => None,
        }
    }
}

/// Check a fact against the constraint matrix and the schema.
pub fn validate(fact: &DataFact, schema: &[FieldMeta]) -> Result<(), Vec<String>> {
    let mut v = Vec::new();
    let kind_of = |name: &str| schema.iter().find(|f| f.name == name).map(|f| f.kind);
    let rule = fact.fact_type.constraint();
    let t = fact.fact_type;

    if fact.subspace.len() > Subspace::MAX_FILTERS {
        v.push(format!(
            "subspace has {} filters, at most {} allowed",
            fact.subspace.len(),
            Subspace::MAX_FILTERS
        ));
    }
    let mut seen = BTreeSet::new();
    for f in &fact.subspace.filters {
        if !seen.insert(f.field.as_str()) {
            v.push(format!("subspace filters field '{}' twice", f.field));
        }
        match kind_of(&f.field) {
            None => v.push(format!("unknown subspace field '{}'", f.field)),
            Some(FieldKind::Numerical) => {
                v.push(format!("subspace field '{}' must be categorical or temporal", f.field))
            }
            Some(_) => {}
        }
    }

    match rule.breakdown {
        BreakdownRule::None => {
            if !fact.breakdown.is_empty() {
                v.push(format!("{t}: breakdown must be empty"));
            }
        }
        r => {
            if fact.breakdown.len() != 1 {
                v.push(format!(
                    "{t}: breakdown must be exactly one field, got {}",
                    fact.breakdown.len()
                ));
            }
            for b in &fact.breakdown {
                match kind_of(b) {
                    None => v.push(format!("unknown breakdown field '{b}'")),
                    Some(k) if !r.accepts(k) => {
                        let want = match r {
                            BreakdownRule::Temporal => "temporal",
                            BreakdownRule::Categorical => "categorical",
                            _ => "categorical or temporal",
                        };
                        v.push(format!("{t}: breakdown '{b}' is {k}, must be {want}"));
                    }
                    Some(_) => {}
                }
            }
        }
    }

    if fact.measures.len() != rule.measures {
        v.push(match rule.measures {
            0 => format!("{t}: measure must be empty"),
            1 => format!("{t}: exactly one measure required, got {}", fact.measures.len()),
            n => format!("{t}: exactly {n} measures required, got {}", fact.measures.len()),
        });
    }
    for m in &fact.measures {
        match kind_of(&m.field) {
            None => v.push(format!("unknown measure field '{}'", m.field)),
            Some(FieldKind::Numerical) => {}
            Some(_) if m.agg == Aggregation::Count => {}
            Some(k) => v.push(format!(
                "measure '{}' is {k}; only count applies to non-numerical fields",
                m.field
            )),
        }
    }
    if t == FactType::Association
        && fact.measures.len() == 2
        && fact.measures[0].field == fact.measures[1].field
    {
        v.push("association: two distinct measures required".into());
    }

    if !rule.focus.accepts(fact.focus.len()) {
        v.push(match rule.focus {
            FocusRule::Exactly(0) => format!("{t}: focus must be empty"),
            FocusRule::Exactly(k) => format!("{t}: focus must have exactly {k} values, got {}", fact.focus.len()),
            FocusRule::AtLeast(k) => format!("{t}: focus must have at least {k} values"),
        });
    }
    let mut focus_seen = BTreeSet::new();
    for f in &fact.focus {
        if fact.breakdown_field() != Some(f.field.as_str()) {
            v.push(format!("focus field '{}' must be the breakdown field", f.field));
        }
        if !focus_seen.insert(f.value.as_str()) {
            v.push(format!("focus value '{}' repeated", f.value));
        }
    }

    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn group_value<'a>(groups: &'a [Group], value: &str) -> Result<&'a Group, FactError> {
    groups
        .iter()
        .find(|g| g.key.len() == 1 && g.key[0] == value)
        .ok_or_else(|| FactError::FocusNotFound(value.to_string()))
}

fn need(groups: usize, needed: usize) -> Result<(), FactError> {
    if groups < needed {
        Err(FactError::InsufficientData {
            needed,
            got: groups,
        })
    } else {
        Ok(())
    }
}

/// Compute the derived value for a valid fact.
pub fn derive_value(fact: &DataFact, table: &DataTable) -> Result<DerivedValue, FactError> {
    let rows = table.select_subspace(&fact.subspace)?;
    if rows.is_empty() {
        return Err(FactError::EmptyScope);
    }
    let focus = fact.focus_values();
    Ok(match fact.fact_type {
        FactType::Value => {
            let groups = fact.groups_in(table, &rows)?;
            let g = groups.first().ok_or(FactError::EmptyScope)?;
            DerivedValue::Value { value: g.value }
        }
        FactType::Difference => {
            let groups = fact.groups_in(table, &rows)?;
            let a = group_value(&groups, focus[0])?.value;
            let b = group_value(&groups, focus[1])?.value;
            DerivedValue::Difference { value: a - b }
        }
        FactType::Proportion => {
            let groups = fact.groups_in(table, &rows)?;
            let part = group_value(&groups, focus[0])?.value;
            let total: f64 = groups.iter().map(|g| g.value).sum();
            let share = part / total;
            if !(total > 0.0) || !(0.0..=1.0 + 1e-12).contains(&share) {
                return Err(FactError::Degenerate(
                    "proportion undefined for non-positive totals or negative parts".into(),
                ));
            }
            DerivedValue::Proportion {
                value: share.min(1.0),
            }
        }
        FactType::Trend => {
            let groups = fact.groups_in(table, &rows)?;
            need(groups.len(), 3)?;
            let y: Vec<f64> = groups.iter().map(|g| g.value).collect();
            let fit = stats::linear_regression(&y)?;
            let direction = if fit.slope < 0.0 {
                TrendDirection::Decreasing
            } else {
                TrendDirection::Increasing
            };
            DerivedValue::Trend {
                direction,
                slope: fit.slope,
            }
        }
        FactType::Categorization => {
            let groups = fact.groups_in(table, &rows)?;
            DerivedValue::Categorization {
                count: groups.len(),
            }
        }
        FactType::Distribution | FactType::Rank => DerivedValue::NotApplicable,
        FactType::Association => {
            let pairs = fact.paired_groups(table)?;
            need(pairs.len(), 3)?;
            let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            let (r, _) = stats::pearson_test(&x, &y)?;
            DerivedValue::Association { r }
        }
        FactType::Extreme => {
            let groups = fact.groups_in(table, &rows)?;
            let v = group_value(&groups, focus[0])?.value;
            let max = groups.iter().map(|g| g.value).fold(f64::NEG_INFINITY, f64::max);
            let min = groups.iter().map(|g| g.value).fold(f64::INFINITY, f64::min);
            let which = if v == max {
                ExtremeKind::Max
            } else if v == min {
                ExtremeKind::Min
            } else {
                return Err(FactError::FocusNotExtreme(focus[0].to_string()));
            };
            DerivedValue::Extreme { which, value: v }
        }
        FactType::Outlier => {
            let groups = fact.groups_in(table, &rows)?;
            need(groups.len(), 3)?;
            let v = group_value(&groups, focus[0])?.value;
            let n = groups.len() as f64;
            let mean = groups.iter().map(|g| g.value).sum::<f64>() / n;
            let var = groups.iter().map(|g| (g.value - mean).powi(2)).sum::<f64>() / (n - 1.0);
            if var <= 0.0 {
                return Err(FactError::Degenerate("all groups share one value".into()));
            }
            DerivedValue::Outlier {
                score: (v - mean).abs() / var.sqrt(),
            }
        }
    })
}

fn iou<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn row_iou(a: &RowSet, b: &RowSet) -> f64 {
    let union = a.union(b).len();
    if union == 0 {
        return 1.0;
    }
    a.intersect(b).len() as f64 / union as f64
}

/// Similarity components in [0, 1]: type, measure, breakdown, subspace,
/// focus.
pub fn similarity_components(
    a: &DataFact,
    b: &DataFact,
    table: &DataTable,
) -> Result<[f64; 5], FactError> {
    let s_type = if a.fact_type == b.fact_type { 1.0 } else { 0.0 };
    let fields = |f: &DataFact| -> BTreeSet<String> {
        f.measures.iter().map(|m| m.field.clone()).collect()
    };
    let s_measure = iou(&fields(a), &fields(b));
    let s_breakdown = iou(
        &a.breakdown.iter().collect(),
        &b.breakdown.iter().collect(),
    );
    let s_subspace = if a.subspace.same_as(&b.subspace) {
        1.0
    } else {
        row_iou(
            &table.select_subspace(&a.subspace)?,
            &table.select_subspace(&b.subspace)?,
        )
    };
    let s_focus = row_iou(&a.focus_rows(table)?, &b.focus_rows(table)?);
    Ok([s_type, s_measure, s_breakdown, s_subspace, s_focus])
}

/// Mean of the five overlap components.
pub fn fact_similarity(a: &DataFact, b: &DataFact, table: &DataTable) -> Result<f64, FactError> {
    Ok(similarity_components(a, b, table)?.iter().sum::<f64>() / 5.0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldRef {
    pub field: String,
}

/// Serialized form of a fact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactRecord {
    #[serde(rename = "type")]
    pub fact_type: String,
    #[serde(default)]
    pub measure: Vec<Measure>,
    #[serde(default)]
    pub subspace: Vec<Filter>,
    #[serde(default)]
    pub breakdown: Vec<FieldRef>,
    #[serde(default)]
    pub focus: Vec<Filter>,
}

pub fn to_fact_record(fact: &DataFact) -> FactRecord {
    FactRecord {
        fact_type: fact.fact_type.name().to_string(),
        measure: fact.measures.clone(),
        subspace: fact.subspace.filters.clone(),
        breakdown: fact
            .breakdown
            .iter()
            .map(|b| FieldRef { field: b.clone() })
            .collect(),
        focus: fact.focus.clone(),
    }
}

/// Rebuild a fact from its record. Every referenced field must exist in the
/// schema; shape constraints are left to [`validate`].
pub fn from_fact_record(record: &FactRecord, schema: &[FieldMeta]) -> Result<DataFact, FactError> {
    let fact_type = FactType::parse(&record.fact_type)
        .ok_or_else(|| FactError::Parse(format!("unknown fact type '{}'", record.fact_type)))?;
    let known = |name: &str| schema.iter().any(|f| f.name == name);
    for f in record.subspace.iter().chain(&record.focus) {
        if f.field.is_empty() || !known(&f.field) {
            return Err(FactError::Parse(format!("malformed filter on '{}'", f.field)));
        }
    }
    for name in record
        .measure
        .iter()
        .map(|m| &m.field)
        .chain(record.breakdown.iter().map(|b| &b.field))
    {
        if !known(name) {
            return Err(FactError::Parse(format!("unknown field '{name}'")));
        }
    }
    Ok(DataFact {
        fact_type,
        subspace: Subspace::new(record.subspace.clone()),
        breakdown: record.breakdown.iter().map(|b| b.field.clone()).collect(),
        measures: record.measure.clone(),
        focus: record.focus.clone(),
    })
}

impl Serialize for DataFact {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_fact_record(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DataFact {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FactRecord::deserialize(d)?;
        let fact_type = FactType::parse(&r.fact_type).ok_or_else(|| {
            serde::de::Error::custom(format!("unknown fact type '{}'", r.fact_type))
        })?;
        Ok(DataFact {
            fact_type,
            subspace: Subspace::new(r.subspace),
            breakdown: r.breakdown.into_iter().map(|b| b.field).collect(),
            measures: r.measure,
            focus: r.focus,
        })
    }
}
