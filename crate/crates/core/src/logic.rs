//! Coherence relations between consecutive facts: their likelihood priors
//! per fact type and the rules that expand one fact into related ones.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::factgen::{self, shape_compatible, FactRng, FocusPlan};
use crate::facts::{self, DataFact, DerivedValue, ExtremeKind, FactType, FocusRule};
use crate::stats;
use crate::table::{DataTable, FieldKind, Filter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Similarity,
    Temporal,
    Contrast,
    CauseEffect,
    Elaboration,
    Generalization,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Similarity,
        Relation::Temporal,
        Relation::Contrast,
        Relation::CauseEffect,
        Relation::Elaboration,
        Relation::Generalization,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Relation::Similarity => "similarity",
            Relation::Temporal => "temporal",
            Relation::Contrast => "contrast",
            Relation::CauseEffect => "cause_effect",
            Relation::Elaboration => "elaboration",
            Relation::Generalization => "generalization",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Relation::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationTableError {
    #[error("row {row}: negative entry")]
    Negative { row: usize },
    #[error("row {row}: all entries are zero")]
    ZeroRow { row: usize },
}

/// Percentages of each relation following each fact type, rows in
/// [`FactType::ALL`] order and columns in [`Relation::ALL`] order.
pub const RELATION_PERCENTAGES: [[f64; 6]; 10] = [
    [45.6, 8.9, 0.0, 4.2, 26.8, 14.5],
    [41.6, 6.7, 0.0, 5.8, 31.1, 14.8],
    [52.1, 7.3, 0.0, 5.2, 22.4, 13.0],
    [34.7, 9.4, 8.2, 7.1, 28.2, 12.4],
    [37.7, 3.4, 0.0, 3.4, 47.5, 7.8],
    [49.0, 12.1, 0.0, 4.4, 22.3, 12.1],
    [43.8, 11.7, 0.0, 6.6, 34.3, 3.6],
    [31.0, 5.6, 15.1, 7.1, 26.2, 15.1],
    [51.8, 5.6, 0.0, 3.7, 25.9, 13.0],
    [20.0, 10.0, 0.0, 10.0, 40.0, 20.0],
];

/// Row-normalized relation likelihoods P(r | type).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationTable {
    rows: [[f64; 6]; 10],
}

impl Default for RelationTable {
    fn default() -> Self {
        Self::from_percentages(&RELATION_PERCENTAGES).expect("built-in table is valid")
    }
}

impl RelationTable {
    /// Normalize each row by its own sum.
    pub fn from_percentages(p: &[[f64; 6]; 10]) -> Result<Self, RelationTableError> {
        let mut rows = [[0.0; 6]; 10];
        for (i, row) in p.iter().enumerate() {
            if row.iter().any(|&v| v < 0.0) {
                return Err(RelationTableError::Negative { row: i });
            }
            let sum: f64 = row.iter().sum();
            if sum <= 0.0 {
                return Err(RelationTableError::ZeroRow { row: i });
            }
            for (j, &v) in row.iter().enumerate() {
                rows[i][j] = v / sum;
            }
        }
        Ok(RelationTable { rows })
    }

    pub fn likelihood(&self, t: FactType, r: Relation) -> f64 {
        self.rows[t.index()][r.index()]
    }

    pub fn row(&self, t: FactType) -> &[f64; 6] {
        &self.rows[t.index()]
    }

    /// Draw a relation in proportion to the row of `t`.
    pub fn sample(&self, t: FactType, rng: &mut FactRng) -> Relation {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for r in Relation::ALL {
            acc += self.likelihood(t, r);
            if u < acc {
                return r;
            }
        }
        *Relation::ALL
            .iter()
            .rev()
            .find(|&&r| self.likelihood(t, r) > 0.0)
            .expect("rows have positive mass")
    }
}

/// Likelihood from the built-in table.
pub fn relation_likelihood(t: FactType, r: Relation) -> f64 {
    RelationTable::default().likelihood(t, r)
}

/// Chooses the measure a given measure most plausibly drives.
pub trait CausalModel: Send + Sync {
    fn successor(&self, measure_field: &str, table: &DataTable) -> Option<String>;
}

/// Picks the numerical field with the largest |Pearson r| over all rows,
/// provided it reaches the threshold. Ties go to the earlier field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationCausality {
    pub threshold: f64,
}

impl Default for CorrelationCausality {
    fn default() -> Self {
        CorrelationCausality { threshold: 0.3 }
    }
}

impl CausalModel for CorrelationCausality {
    fn successor(&self, measure_field: &str, table: &DataTable) -> Option<String> {
        let src = table.field_index(measure_field)?;
        let mut best: Option<(f64, &str)> = None;
        for (j, f) in table.schema().iter().enumerate() {
            if j == src || f.kind != FieldKind::Numerical {
                continue;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = (0..table.row_count())
                .filter_map(|r| Some((table.number(r, src)?, table.number(r, j)?)))
                .unzip();
            let Ok((r, _)) = stats::pearson_test(&x, &y) else {
                continue;
            };
            let r = r.abs();
            if r >= self.threshold && best.is_none_or(|(b, _)| r > b) {
                best = Some((r, &f.name));
            }
        }
        best.map(|(_, n)| n.to_string())
    }
}

pub fn causal_successor(measure_field: &str, table: &DataTable) -> Option<String> {
    CorrelationCausality::default().successor(measure_field, table)
}

fn focus_capacity(t: FactType) -> usize {
    match t.constraint().focus {
        FocusRule::Exactly(k) => k,
        FocusRule::AtLeast(_) => usize::MAX,
    }
}

fn sign_of(fact: &DataFact, table: &DataTable) -> Option<f64> {
    let x = match facts::derive_value(fact, table).ok()? {
        DerivedValue::Trend { slope, .. } => slope,
        DerivedValue::Association { r } => r,
        _ => return None,
    };
    Some(if x > 0.0 { 1.0 } else if x < 0.0 { -1.0 } else { 0.0 })
}

fn signs_flip(src: &DataFact, dst: &DataFact, table: &DataTable) -> bool {
    matches!(
        (sign_of(src, table), sign_of(dst, table)),
        (Some(a), Some(b)) if a != 0.0 && b != 0.0 && a != b
    )
}

fn retype(fact: &DataFact, t: FactType) -> DataFact {
    DataFact {
        fact_type: t,
        ..fact.clone()
    }
}

/// Raw candidates for a relation, before focus resolution.
fn candidates(
    src: &DataFact,
    r: Relation,
    table: &DataTable,
    causal: &dyn CausalModel,
    rng: &mut FactRng,
) -> Vec<(DataFact, FocusPlan)> {
    let dims: Vec<_> = table.dimensions().collect();
    let mut out = Vec::new();
    match r {
        Relation::Similarity => {
            let kind_of = |f: &DataFact| f.breakdown_field().and_then(|b| table.field(b)).map(|m| m.kind);
            let redraw = |f: DataFact, rng: &mut FactRng| {
                let types: Vec<FactType> = FactType::ALL
                    .into_iter()
                    .filter(|&t| shape_compatible(t, kind_of(&f), f.measures.len()))
                    .collect();
                let t = *types.choose(rng).unwrap_or(&f.fact_type);
                retype(&f, t)
            };
            for i in 0..src.measures.len() {
                for m in table.fields_of(FieldKind::Numerical) {
                    if src.measures.iter().any(|x| x.field == m.name) {
                        continue;
                    }
                    let mut f = src.clone();
                    f.measures[i].field = m.name.clone();
                    let f = redraw(f, rng);
                    out.push((f, FocusPlan::Rebuild));
                }
            }
            if let Some(b) = src.breakdown_field() {
                for d in &dims {
                    if d.name == b || src.subspace.contains_field(&d.name) {
                        continue;
                    }
                    let mut f = src.clone();
                    f.breakdown = vec![d.name.clone()];
                    f.focus.clear();
                    let f = redraw(f, rng);
                    out.push((f, FocusPlan::Rebuild));
                }
                if !src.focus.is_empty() {
                    if src.fact_type == FactType::Extreme {
                        out.push((src.clone(), FocusPlan::Extreme(ExtremeKind::Min)));
                        out.push((src.clone(), FocusPlan::Extreme(ExtremeKind::Max)));
                    } else if let Ok(groups) = src.groups(table) {
                        for i in 0..src.focus.len() {
                            for g in &groups {
                                let v = g.label();
                                if src.focus.iter().any(|f| f.value == v) {
                                    continue;
                                }
                                let mut f = src.clone();
                                f.focus[i].value = v;
                                out.push((f, FocusPlan::Fixed));
                            }
                        }
                    }
                }
            }
        }
        Relation::Temporal => {
            let temporal_filter = src.subspace.filters.iter().find(|f| {
                table.field(&f.field).is_some_and(|m| m.kind == FieldKind::Temporal)
            });
            if let Some(tf) = temporal_filter {
                if let Some(next) = table.successor(&tf.field, &tf.value) {
                    let mut f = src.clone();
                    f.subspace = src
                        .subspace
                        .without(&tf.field)
                        .with(Filter::new(tf.field.clone(), next));
                    out.push((f, FocusPlan::Keep));
                }
            } else if let (Some(b), [focus]) = (src.breakdown_field(), src.focus.as_slice()) {
                if table.field(b).is_some_and(|m| m.kind == FieldKind::Temporal) {
                    if let Some(next) = table.successor(b, &focus.value) {
                        let mut f = src.clone();
                        f.focus[0].value = next.to_string();
                        out.push((f, FocusPlan::Fixed));
                    }
                }
            }
        }
        Relation::Contrast => {
            if matches!(src.fact_type, FactType::Trend | FactType::Association) {
                for filter in &src.subspace.filters {
                    let Some(meta) = table.field(&filter.field) else { continue };
                    for v in &meta.distinct_values {
                        if *v == filter.value {
                            continue;
                        }
                        let mut f = src.clone();
                        f.subspace = src
                            .subspace
                            .without(&filter.field)
                            .with(Filter::new(filter.field.clone(), v.clone()));
                        out.push((f, FocusPlan::Keep));
                    }
                }
                if src.subspace.is_empty() {
                    for d in &dims {
                        if Some(d.name.as_str()) == src.breakdown_field() {
                            continue;
                        }
                        for v in &d.distinct_values {
                            let mut f = src.clone();
                            f.subspace = src.subspace.with(Filter::new(d.name.clone(), v.clone()));
                            out.push((f, FocusPlan::Keep));
                        }
                    }
                }
            }
        }
        Relation::CauseEffect => {
            for i in 0..src.measures.len() {
                let Some(next) = causal.successor(&src.measures[i].field, table) else {
                    continue;
                };
                if src.measures.iter().any(|m| m.field == next) {
                    continue;
                }
                let mut f = src.clone();
                f.measures[i].field = next;
                let plan = match src.fact_type {
                    FactType::Rank | FactType::Outlier => FocusPlan::Rebuild,
                    FactType::Extreme => match facts::derive_value(src, table) {
                        Ok(DerivedValue::Extreme { which, .. }) => FocusPlan::Extreme(which),
                        _ => FocusPlan::Rebuild,
                    },
                    _ => FocusPlan::Keep,
                };
                out.push((f, plan));
            }
        }
        Relation::Elaboration => {
            if src.subspace.len() < crate::table::Subspace::MAX_FILTERS {
                for d in &dims {
                    if src.subspace.contains_field(&d.name) || Some(d.name.as_str()) == src.breakdown_field() {
                        continue;
                    }
                    for v in &d.distinct_values {
                        let mut f = src.clone();
                        f.subspace = src.subspace.with(Filter::new(d.name.clone(), v.clone()));
                        let plan = match src.fact_type {
                            FactType::Rank | FactType::Outlier => FocusPlan::Rebuild,
                            _ => FocusPlan::Keep,
                        };
                        out.push((f, plan));
                    }
                }
            }
            if let (Some(b), true) = (src.breakdown_field(), src.focus.is_empty()) {
                let kind = table.field(b).map(|m| m.kind);
                if src.measures.len() == 1 {
                    for k in [ExtremeKind::Max, ExtremeKind::Min] {
                        out.push((retype(src, FactType::Extreme), FocusPlan::Extreme(k)));
                    }
                }
                if let Ok(groups) = src.groups(table) {
                    for g in &groups {
                        let focused = |t: FactType| {
                            let mut f = retype(src, t);
                            f.focus = vec![Filter::new(b, g.label())];
                            f
                        };
                        if src.measures.len() == 1 && shape_compatible(FactType::Proportion, kind, 1) {
                            out.push((focused(FactType::Proportion), FocusPlan::Fixed));
                        }
                        if focus_capacity(src.fact_type) >= 1 {
                            out.push((focused(src.fact_type), FocusPlan::Fixed));
                        }
                    }
                }
            }
        }
        Relation::Generalization => {
            for filter in &src.subspace.filters {
                let mut f = src.clone();
                f.subspace = src.subspace.without(&filter.field);
                let plan = match src.fact_type {
                    FactType::Rank | FactType::Outlier => FocusPlan::Rebuild,
                    _ => FocusPlan::Keep,
                };
                out.push((f, plan));
            }
            if !src.focus.is_empty() {
                let kind = src.breakdown_field().and_then(|b| table.field(b)).map(|m| m.kind);
                let t = match src.fact_type.constraint().focus {
                    FocusRule::AtLeast(0) => Some(src.fact_type),
                    _ if src.measures.len() != 1 => None,
                    _ => match kind {
                        Some(FieldKind::Temporal) => Some(FactType::Trend),
                        Some(FieldKind::Categorical) => Some(FactType::Distribution),
                        _ => None,
                    },
                };
                if let Some(t) = t {
                    let mut f = retype(src, t);
                    f.focus.clear();
                    out.push((f, FocusPlan::Fixed));
                }
            }
        }
    }
    out
}

/// Up to `budget` usable facts related to `fact` by `r`, in seeded random
/// order.
pub fn expand(
    fact: &DataFact,
    r: Relation,
    table: &DataTable,
    rng: &mut FactRng,
    budget: usize,
) -> Vec<DataFact> {
    expand_with(fact, r, table, &CorrelationCausality::default(), rng, budget)
}

pub fn expand_with(
    fact: &DataFact,
    r: Relation,
    table: &DataTable,
    causal: &dyn CausalModel,
    rng: &mut FactRng,
    budget: usize,
) -> Vec<DataFact> {
    let mut cands = candidates(fact, r, table, causal, rng);
    cands.shuffle(rng);
    let mut out: Vec<DataFact> = Vec::new();
    for (cand, plan) in cands {
        if out.len() >= budget {
            break;
        }
        let Some(f) = factgen::materialize(cand, plan, table, rng) else {
            continue;
        };
        if f == *fact || out.contains(&f) {
            continue;
        }
        if r == Relation::Contrast && !signs_flip(fact, &f, table) {
            continue;
        }
        debug_assert!(satisfies_with(r, fact, &f, table, causal), "{r}: {fact:?} -> {f:?}");
        out.push(f);
    }
    out
}

pub fn satisfies(r: Relation, src: &DataFact, dst: &DataFact, table: &DataTable) -> bool {
    satisfies_with(r, src, dst, table, &CorrelationCausality::default())
}

fn one_filter_added(src: &DataFact, dst: &DataFact) -> bool {
    dst.subspace.len() == src.subspace.len() + 1
        && src.subspace.filters.iter().all(|f| dst.subspace.filters.contains(f))
}

fn one_value_replaced(src: &DataFact, dst: &DataFact) -> bool {
    src.subspace.len() == dst.subspace.len()
        && src
            .subspace
            .filters
            .iter()
            .filter(|f| !dst.subspace.filters.contains(f))
            .map(|f| dst.subspace.get(&f.field).is_some())
            .collect::<Vec<_>>()
            == [true]
}

/// Post-hoc check that `dst` follows from `src` by relation `r`.
pub fn satisfies_with(
    r: Relation,
    src: &DataFact,
    dst: &DataFact,
    table: &DataTable,
    causal: &dyn CausalModel,
) -> bool {
    if src == dst || !factgen::usable(dst, table) {
        return false;
    }
    let same_sub = src.subspace.same_as(&dst.subspace);
    let same_b = src.breakdown == dst.breakdown;
    let same_m = src.measures == dst.measures;
    match r {
        Relation::Similarity => {
            let fields = |f: &DataFact| f.measures.iter().map(|m| m.field.clone()).collect::<Vec<_>>();
            let measure_swap = fields(src).len() == fields(dst).len()
                && fields(src).iter().zip(fields(dst)).filter(|(a, b)| *a != b).count() == 1
                && src.measures.iter().zip(&dst.measures).all(|(a, b)| a.agg == b.agg);
            same_sub
                && ((measure_swap && same_b)
                    || (!same_b && same_m)
                    || (same_b && same_m && src.fact_type == dst.fact_type && src.focus != dst.focus))
        }
        Relation::Temporal => {
            if src.fact_type != dst.fact_type || !same_b || !same_m {
                return false;
            }
            let is_temporal = |f: &str| table.field(f).is_some_and(|m| m.kind == FieldKind::Temporal);
            if let Some(tf) = src.subspace.filters.iter().find(|f| is_temporal(&f.field)) {
                let next = table.successor(&tf.field, &tf.value);
                dst.subspace.get(&tf.field).map(|f| f.value.as_str()) == next
                    && dst.subspace.same_as(
                        &src.subspace
                            .without(&tf.field)
                            .with(Filter::new(tf.field.clone(), next.unwrap_or_default())),
                    )
            } else {
                match (src.focus.as_slice(), dst.focus.as_slice(), src.breakdown_field()) {
                    ([a], [b], Some(field)) => {
                        same_sub
                            && is_temporal(field)
                            && table.successor(field, &a.value) == Some(b.value.as_str())
                    }
                    _ => false,
                }
            }
        }
        Relation::Contrast => {
            matches!(src.fact_type, FactType::Trend | FactType::Association)
                && src.fact_type == dst.fact_type
                && same_b
                && same_m
                && (one_value_replaced(src, dst) || (src.subspace.is_empty() && one_filter_added(src, dst)))
                && signs_flip(src, dst, table)
        }
        Relation::CauseEffect => {
            if !same_sub || !same_b || src.fact_type != dst.fact_type || src.measures.len() != dst.measures.len() {
                return false;
            }
            let changed: Vec<_> = src
                .measures
                .iter()
                .zip(&dst.measures)
                .filter(|(a, b)| a != b)
                .collect();
            match changed.as_slice() {
                [(a, b)] => a.agg == b.agg && causal.successor(&a.field, table).as_deref() == Some(b.field.as_str()),
                _ => false,
            }
        }
        Relation::Elaboration => {
            (same_b && same_m && src.fact_type == dst.fact_type && one_filter_added(src, dst))
                || (same_sub && same_b && same_m && src.focus.is_empty() && !dst.focus.is_empty())
        }
        Relation::Generalization => {
            (same_b && same_m && src.fact_type == dst.fact_type && one_filter_added(dst, src))
                || (same_sub && same_b && same_m && !src.focus.is_empty() && dst.focus.is_empty())
        }
    }
}
