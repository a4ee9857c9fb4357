//! Columnar view over an ingested spreadsheet.
//!
//! A [`DataTable`] is built once by [`load_csv`] and is immutable afterwards.
//! Every field is inferred to be numerical, categorical or temporal; the
//! categorical and temporal columns are dictionary encoded so that subspace
//! filters and group-by operations work on small integer codes.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Share of non-empty values that must parse for a numeric/temporal kind.
const INFERENCE_THRESHOLD: f64 = 0.95;

/// Plain 4-digit values are only read as years inside this range.
const YEAR_RANGE: std::ops::RangeInclusive<i32> = 1800..=2100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("csv error at record {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("row {row} has {found} fields, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("table has no data rows")]
    EmptyTable,
    #[error("schema error: {0}")]
    Schema(String),
    #[error("filter error: {0}")]
    Filter(String),
    #[error("type error: {0}")]
    Type(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Numerical,
    Categorical,
    Temporal,
}

impl FieldKind {
    /// Categorical and temporal fields can break down or filter a subspace.
    pub fn is_dimension(self) -> bool {
        !matches!(self, FieldKind::Numerical)
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FieldKind::Numerical => "numerical",
            FieldKind::Categorical => "categorical",
            FieldKind::Temporal => "temporal",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub name: String,
    pub kind: FieldKind,
    /// Distinct values, chronological for temporal fields and lexicographic
    /// for categorical ones. Empty for numerical fields.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distinct_values: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

/// A `field = value` condition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Filter {
    pub field: String,
    pub value: String,
}

impl Filter {
    pub fn new(field: impl Into<String>, value: impl Into<String>) -> Self {
        Filter {
            field: field.into(),
            value: value.into(),
        }
    }
}

/// Conjunction of at most two filters. Empty means the whole table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subspace {
    pub filters: Vec<Filter>,
}

impl Subspace {
    pub const MAX_FILTERS: usize = 2;

    pub fn all() -> Self {
        Subspace::default()
    }

    pub fn new(filters: Vec<Filter>) -> Self {
        Subspace { filters }
    }

    pub fn is_empty(&self) -> bool {
        self.filters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.filters.len()
    }

    pub fn get(&self, field: &str) -> Option<&Filter> {
        self.filters.iter().find(|f| f.field == field)
    }

    pub fn contains_field(&self, field: &str) -> bool {
        self.get(field).is_some()
    }

    pub fn with(&self, filter: Filter) -> Self {
        let mut filters = self.filters.clone();
        filters.push(filter);
        Subspace { filters }
    }

    pub fn without(&self, field: &str) -> Self {
        Subspace {
            filters: self
                .filters
                .iter()
                .filter(|f| f.field != field)
                .cloned()
                .collect(),
        }
    }

    /// Same filters irrespective of order.
    pub fn same_as(&self, other: &Subspace) -> bool {
        self.len() == other.len() && self.filters.iter().all(|f| other.filters.contains(f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Count,
    Sum,
    Avg,
    Max,
    Min,
}

impl Aggregation {
    pub const ALL: [Aggregation; 5] = [
        Aggregation::Count,
        Aggregation::Sum,
        Aggregation::Avg,
        Aggregation::Max,
        Aggregation::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Count => "count",
            Aggregation::Sum => "sum",
            Aggregation::Avg => "avg",
            Aggregation::Max => "max",
            Aggregation::Min => "min",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "count" => Some(Aggregation::Count),
            "sum" => Some(Aggregation::Sum),
            "avg" | "average" | "mean" => Some(Aggregation::Avg),
            "max" => Some(Aggregation::Max),
            "min" => Some(Aggregation::Min),
            _ => None,
        }
    }
}

/// Sortable key for a parsed date; missing components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TemporalKey {
    pub year: i32,
    pub month: u8,
    pub day: u8,
}

/// Parse one of the supported date layouts: `YYYY`, `YYYY-MM`, `YYYY-MM-DD`
/// (ISO-8601, one or two digit month/day accepted) and `YYYY/M/D`.
pub fn parse_temporal(s: &str) -> Option<TemporalKey> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (sep, parts): (Option<char>, Vec<&str>) = if s.contains('-') {
        (Some('-'), s.split('-').collect())
    } else if s.contains('/') {
        (Some('/'), s.split('/').collect())
    } else {
        (None, vec![s])
    };
    let digits = |p: &str, min: usize, max: usize| {
        p.len() >= min && p.len() <= max && p.bytes().all(|b| b.is_ascii_digit())
    };
    if !digits(parts[0], 4, 4) {
        return None;
    }
    let year: i32 = parts[0].parse().ok()?;
    match (sep, parts.len()) {
        (None, 1) => YEAR_RANGE.contains(&year).then_some(TemporalKey {
            year,
            month: 0,
            day: 0,
        }),
        (Some('-'), 2) => {
            if !digits(parts[1], 1, 2) {
                return None;
            }
            let month: u8 = parts[1].parse().ok()?;
            (1..=12).contains(&month).then_some(TemporalKey {
                year,
                month,
                day: 0,
            })
        }
        (Some(_), 3) => {
            if !digits(parts[1], 1, 2) || !digits(parts[2], 1, 2) {
                return None;
            }
            let month: u8 = parts[1].parse().ok()?;
            let day: u8 = parts[2].parse().ok()?;
            ((1..=12).contains(&month) && (1..=days_in_month(year, month)).contains(&day))
                .then_some(TemporalKey { year, month, day })
        }
        _ => None,
    }
}

fn days_in_month(year: i32, month: u8) -> u8 {
    match month {
        4 | 6 | 9 | 11 => 30,
        2 if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        2 => 28,
        _ => 31,
    }
}

/// Dot-decimal number, optionally with `,` thousands separators.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let body = s.strip_prefix(['-', '+']).unwrap_or(s);
    let first = body.chars().next()?;
    if !(first.is_ascii_digit() || first == '.') {
        return None;
    }
    if body.contains(',') {
        let int_part = body.split(['.', 'e', 'E']).next().unwrap_or("");
        let mut groups = int_part.split(',');
        let head = groups.next().unwrap_or("");
        if head.is_empty() || head.len() > 3 || groups.any(|g| g.len() != 3) {
            return None;
        }
        s.replace(',', "").parse().ok()
    } else {
        s.parse().ok().filter(|v: &f64| v.is_finite())
    }
}

/// Infer the kind of a column from its raw cell text.
pub fn infer_field_type<S: AsRef<str>>(values: &[S]) -> Result<FieldKind, TableError> {
    let non_empty: Vec<&str> = values
        .iter()
        .map(|v| v.as_ref().trim())
        .filter(|v| !v.is_empty())
        .collect();
    if non_empty.is_empty() {
        return Err(TableError::Schema("column has no non-empty values".into()));
    }
    let total = non_empty.len() as f64;
    let share = |pred: &dyn Fn(&str) -> bool| {
        non_empty.iter().filter(|v| pred(v)).count() as f64 / total
    };
    // Years are also valid numbers, so the temporal test runs first.
    if share(&|v| parse_temporal(v).is_some()) >= INFERENCE_THRESHOLD {
        return Ok(FieldKind::Temporal);
    }
    if share(&|v| parse_number(v).is_some()) >= INFERENCE_THRESHOLD {
        return Ok(FieldKind::Numerical);
    }
    Ok(FieldKind::Categorical)
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub delimiter: u8,
    /// Force a kind for named columns instead of inferring it.
    pub kind_overrides: HashMap<String, FieldKind>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            delimiter: b',',
            kind_overrides: HashMap::new(),
        }
    }
}

#[derive(Debug, Clone)]
enum Column {
    Numerical(Vec<Option<f64>>),
    /// Codes index into the field's `distinct_values`.
    Coded(Vec<Option<u32>>),
}

/// A cell value as seen through [`DataTable::value`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value<'a> {
    Number(f64),
    Text(&'a str),
    Missing,
}

#[derive(Debug, Clone)]
pub struct DataTable {
    schema: Vec<FieldMeta>,
    columns: Vec<Column>,
    row_count: usize,
}

/// Sorted, duplicate-free list of row indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RowSet(Vec<usize>);

impl RowSet {
    pub fn all(n: usize) -> Self {
        RowSet((0..n).collect())
    }

    pub fn from_sorted(rows: Vec<usize>) -> Self {
        debug_assert!(rows.windows(2).all(|w| w[0] < w[1]));
        RowSet(rows)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn intersect(&self, other: &RowSet) -> RowSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        RowSet(out)
    }

    pub fn union(&self, other: &RowSet) -> RowSet {
        let mut out: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        out.sort_unstable();
        out.dedup();
        RowSet(out)
    }
}

/// One output row of [`DataTable::group_and_aggregate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    /// One value per breakdown field; empty for the degenerate grouping.
    pub key: Vec<String>,
    pub value: f64,
    pub rows: usize,
}

impl Group {
    pub fn label(&self) -> String {
        self.key.join(" / ")
    }
}

/// Parse a delimited file with a header row into a [`DataTable`].
pub fn load_csv(bytes: &[u8], options: &CsvOptions) -> Result<DataTable, TableError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .from_reader(bytes);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| TableError::Csv {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(TableError::Schema("missing header row".into()));
    }
    for (i, h) in headers.iter().enumerate() {
        if h.is_empty() {
            return Err(TableError::Schema(format!("header {} is empty", i + 1)));
        }
        if headers[..i].contains(h) {
            return Err(TableError::Schema(format!("duplicate header name '{h}'")));
        }
    }

    let width = headers.len();
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); width];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| TableError::Csv {
            row,
            message: e.to_string(),
        })?;
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != width {
            return Err(TableError::Ragged {
                row,
                expected: width,
                found: record.len(),
            });
        }
        for (col, cell) in raw.iter_mut().zip(record.iter()) {
            col.push(cell.trim().to_string());
        }
    }
    let row_count = raw[0].len();
    if row_count == 0 {
        return Err(TableError::EmptyTable);
    }

    let mut schema = Vec::with_capacity(width);
    let mut columns = Vec::with_capacity(width);
    for (name, cells) in headers.into_iter().zip(raw) {
        let kind = match options.kind_overrides.get(&name) {
            Some(k) => *k,
            None => infer_field_type(&cells)
                .map_err(|_| TableError::Schema(format!("column '{name}' is entirely empty")))?,
        };
        let (meta, column) = build_column(name, kind, cells);
        schema.push(meta);
        columns.push(column);
    }
    Ok(DataTable {
        schema,
        columns,
        row_count,
    })
}

fn build_column(name: String, kind: FieldKind, cells: Vec<String>) -> (FieldMeta, Column) {
    match kind {
        FieldKind::Numerical => {
            let values: Vec<Option<f64>> = cells.iter().map(|c| parse_number(c)).collect();
            let present = values.iter().flatten();
            let min = present.clone().copied().reduce(f64::min);
            let max = present.copied().reduce(f64::max);
            let meta = FieldMeta {
                name,
                kind,
                distinct_values: Vec::new(),
                min,
                max,
            };
            (meta, Column::Numerical(values))
        }
        FieldKind::Categorical | FieldKind::Temporal => {
            let mut distinct: Vec<String> = cells.iter().filter(|c| !c.is_empty()).cloned().collect();
            distinct.sort();
            distinct.dedup();
            if kind == FieldKind::Temporal {
                // Unparseable stragglers sort after every real date.
                distinct.sort_by(|a, b| {
                    let ka = parse_temporal(a);
                    let kb = parse_temporal(b);
                    match (ka, kb) {
                        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
                        (Some(_), None) => std::cmp::Ordering::Less,
                        (None, Some(_)) => std::cmp::Ordering::Greater,
                        (None, None) => a.cmp(b),
                    }
                });
            }
            let index: HashMap<&str, u32> = distinct
                .iter()
                .enumerate()
                .map(|(i, v)| (v.as_str(), i as u32))
                .collect();
            let codes = cells
                .iter()
                .map(|c| index.get(c.as_str()).copied())
                .collect();
            let meta = FieldMeta {
                name,
                kind,
                distinct_values: distinct.clone(),
                min: None,
                max: None,
            };
            (meta, Column::Coded(codes))
        }
    }
}

impl DataTable {
    pub fn schema(&self) -> &[FieldMeta] {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn field_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|f| f.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldMeta> {
        self.schema.iter().find(|f| f.name == name)
    }

    pub fn fields_of(&self, kind: FieldKind) -> impl Iterator<Item = &FieldMeta> {
        self.schema.iter().filter(move |f| f.kind == kind)
    }

    pub fn count_of(&self, kind: FieldKind) -> usize {
        self.fields_of(kind).count()
    }

    /// Categorical and temporal fields.
    pub fn dimensions(&self) -> impl Iterator<Item = &FieldMeta> {
        self.schema.iter().filter(|f| f.kind.is_dimension())
    }

    pub fn value(&self, row: usize, field: usize) -> Value<'_> {
        match &self.columns[field] {
            Column::Numerical(v) => v[row].map_or(Value::Missing, Value::Number),
            Column::Coded(v) => v[row].map_or(Value::Missing, |c| {
                Value::Text(&self.schema[field].distinct_values[c as usize])
            }),
        }
    }

    /// Numeric cell, `None` when missing or not a numerical column.
    pub fn number(&self, row: usize, field: usize) -> Option<f64> {
        match &self.columns[field] {
            Column::Numerical(v) => v[row],
            Column::Coded(_) => None,
        }
    }

    fn code(&self, row: usize, field: usize) -> Option<u32> {
        match &self.columns[field] {
            Column::Coded(v) => v[row],
            Column::Numerical(_) => None,
        }
    }

    fn dimension_index(&self, name: &str) -> Result<usize, TableError> {
        let idx = self
            .field_index(name)
            .ok_or_else(|| TableError::Filter(format!("unknown field '{name}'")))?;
        if !self.schema[idx].kind.is_dimension() {
            return Err(TableError::Filter(format!(
                "field '{name}' is numerical and cannot be filtered or grouped"
            )));
        }
        Ok(idx)
    }

    /// Rows matching a single filter. Values absent from the column give
    /// an empty set.
    pub fn filter_rows(&self, filter: &Filter) -> Result<RowSet, TableError> {
        let idx = self.dimension_index(&filter.field)?;
        let Some(code) = self.schema[idx]
            .distinct_values
            .iter()
            .position(|v| *v == filter.value)
        else {
            return Ok(RowSet::default());
        };
        let code = code as u32;
        Ok(RowSet(
            (0..self.row_count)
                .filter(|&r| self.code(r, idx) == Some(code))
                .collect(),
        ))
    }

    /// Rows satisfying every filter of the subspace.
    pub fn select_subspace(&self, subspace: &Subspace) -> Result<RowSet, TableError> {
        let mut targets = Vec::with_capacity(subspace.len());
        for f in &subspace.filters {
            let idx = self.dimension_index(&f.field)?;
            let code = self.schema[idx]
                .distinct_values
                .iter()
                .position(|v| *v == f.value)
                .map(|c| c as u32);
            match code {
                Some(c) => targets.push((idx, c)),
                None => return Ok(RowSet::default()),
            }
        }
        Ok(RowSet(
            (0..self.row_count)
                .filter(|&r| targets.iter().all(|&(i, c)| self.code(r, i) == Some(c)))
                .collect(),
        ))
    }

    /// Group `rows` by the breakdown fields and aggregate `measure_field`.
    ///
    /// Groups over temporal fields come back in chronological order; any
    /// other grouping is sorted by descending aggregate, ties by key.
    pub fn group_and_aggregate(
        &self,
        rows: &RowSet,
        breakdown: &[&str],
        measure_field: &str,
        agg: Aggregation,
    ) -> Result<Vec<Group>, TableError> {
        let m = self
            .field_index(measure_field)
            .ok_or_else(|| TableError::Type(format!("unknown measure field '{measure_field}'")))?;
        if agg != Aggregation::Count && self.schema[m].kind != FieldKind::Numerical {
            return Err(TableError::Type(format!(
                "{} of non-numerical field '{measure_field}'",
                agg.name()
            )));
        }
        let dims: Vec<usize> = breakdown
            .iter()
            .map(|b| self.dimension_index(b))
            .collect::<Result<_, _>>()?;

        struct Acc {
            rows: usize,
            n: usize,
            sum: f64,
            min: f64,
            max: f64,
        }
        let mut groups: HashMap<Vec<u32>, Acc> = HashMap::new();
        for r in rows.iter() {
            let mut key = Vec::with_capacity(dims.len());
            for &d in &dims {
                match self.code(r, d) {
                    Some(c) => key.push(c),
                    None => break,
                }
            }
            if key.len() != dims.len() {
                continue;
            }
            let acc = groups.entry(key).or_insert(Acc {
                rows: 0,
                n: 0,
                sum: 0.0,
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            });
            acc.rows += 1;
            if let Some(v) = self.number(r, m) {
                acc.n += 1;
                acc.sum += v;
                acc.min = acc.min.min(v);
                acc.max = acc.max.max(v);
            }
        }

        let mut out: Vec<(Vec<u32>, Group)> = groups
            .into_iter()
            .filter_map(|(codes, acc)| {
                let value = match agg {
                    Aggregation::Count => acc.rows as f64,
                    _ if acc.n == 0 => return None,
                    Aggregation::Sum => acc.sum,
                    Aggregation::Avg => acc.sum / acc.n as f64,
                    Aggregation::Max => acc.max,
                    Aggregation::Min => acc.min,
                };
                let key = codes
                    .iter()
                    .zip(&dims)
                    .map(|(&c, &d)| self.schema[d].distinct_values[c as usize].clone())
                    .collect();
                Some((
                    codes,
                    Group {
                        key,
                        value,
                        rows: acc.rows,
                    },
                ))
            })
            .collect();

        let chronological =
            !dims.is_empty() && dims.iter().all(|&d| self.schema[d].kind == FieldKind::Temporal);
        if chronological {
            out.sort_by(|a, b| a.0.cmp(&b.0));
        } else {
            out.sort_by(|a, b| {
                b.1.value
                    .total_cmp(&a.1.value)
                    .then_with(|| a.1.key.cmp(&b.1.key))
            });
        }
        Ok(out.into_iter().map(|(_, g)| g).collect())
    }

    /// Next value of a temporal field in chronological order.
    pub fn successor(&self, field: &str, value: &str) -> Option<&str> {
        let meta = self.field(field)?;
        let pos = meta.distinct_values.iter().position(|v| v == value)?;
        meta.distinct_values.get(pos + 1).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DataTable {
        let csv = "Year,Brand,Category,Sales\n\
                   2007,Ford,SUV,10\n\
                   2007,Ford,Compact,5\n\
                   2008,Ford,SUV,7\n\
                   2008,Toyota,SUV,3\n\
                   2009,Toyota,Compact,8\n\
                   2009,Ford,Compact,2\n\
                   2007,Toyota,SUV,4\n\
                   2008,Honda,Compact,6\n\
                   2009,Ford,SUV,1\n\
                   2009,Honda,SUV,9\n";
        load_csv(csv.as_bytes(), &CsvOptions::default()).unwrap()
    }

    #[test]
    fn infers_kinds() {
        assert_eq!(
            infer_field_type(&["2007", "2008", "2009"]).unwrap(),
            FieldKind::Temporal
        );
        assert_eq!(
            infer_field_type(&["12.5", "-3", "0"]).unwrap(),
            FieldKind::Numerical
        );
        assert_eq!(
            infer_field_type(&["SUV", "Compact", "SUV"]).unwrap(),
            FieldKind::Categorical
        );
        // 2 of 3 numeric is below the 95% bar, and neither is a year.
        assert_eq!(
            infer_field_type(&["1", "2", "x"]).unwrap(),
            FieldKind::Categorical
        );
        assert!(matches!(
            infer_field_type(&["", " "]),
            Err(TableError::Schema(_))
        ));
    }

    #[test]
    fn temporal_formats() {
        assert!(parse_temporal("2020-03-02").is_some());
        assert!(parse_temporal("2020-3").is_some());
        assert!(parse_temporal("2020/3/2").is_some());
        assert!(parse_temporal("2020").is_some());
        assert!(parse_temporal("2020-13").is_none());
        assert!(parse_temporal("2021-02-29").is_none());
        assert!(parse_temporal("03/02/2020").is_none());
        assert!(parse_temporal("1234").is_none());
        assert!(parse_temporal("2020/3/2") < parse_temporal("2020/3/10"));
    }

    #[test]
    fn numbers_with_thousands_separators() {
        assert_eq!(parse_number("21,921,768"), Some(21_921_768.0));
        assert_eq!(parse_number("-1,234.5"), Some(-1234.5));
        assert_eq!(parse_number("1,23"), None);
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("NaN"), None);
        assert_eq!(parse_number(".5"), Some(0.5));
    }

    #[test]
    fn loads_schema_and_rows() {
        let t = sample();
        assert_eq!(t.row_count(), 10);
        let kinds: Vec<_> = t.schema().iter().map(|f| f.kind).collect();
        assert_eq!(
            kinds,
            vec![
                FieldKind::Temporal,
                FieldKind::Categorical,
                FieldKind::Categorical,
                FieldKind::Numerical
            ]
        );
        assert_eq!(t.field("Year").unwrap().distinct_values, ["2007", "2008", "2009"]);
        assert_eq!(t.field("Sales").unwrap().max, Some(10.0));
        assert_eq!(t.value(0, 1), Value::Text("Ford"));
        assert_eq!(t.value(0, 3), Value::Number(10.0));
    }

    #[test]
    fn load_errors() {
        let opts = CsvOptions::default();
        assert_eq!(
            load_csv(b"a,b\n", &opts).unwrap_err(),
            TableError::EmptyTable
        );
        assert!(matches!(
            load_csv(b"a,a\n1,2\n", &opts),
            Err(TableError::Schema(_))
        ));
        assert_eq!(
            load_csv(b"a,b\n1,2\n3\n", &opts).unwrap_err(),
            TableError::Ragged {
                row: 2,
                expected: 2,
                found: 1
            }
        );
    }

    #[test]
    fn semicolon_delimiter_and_overrides() {
        let mut opts = CsvOptions {
            delimiter: b';',
            ..Default::default()
        };
        opts.kind_overrides
            .insert("Code".into(), FieldKind::Categorical);
        let t = load_csv(b"Code;Value\n1;2\n3;4\n", &opts).unwrap();
        assert_eq!(t.schema()[0].kind, FieldKind::Categorical);
        assert_eq!(t.schema()[1].kind, FieldKind::Numerical);
    }

    #[test]
    fn subspace_selection() {
        let t = sample();
        assert_eq!(t.select_subspace(&Subspace::all()).unwrap().len(), 10);
        let ford = Subspace::new(vec![Filter::new("Brand", "Ford")]);
        let rows = t.select_subspace(&ford).unwrap();
        let oracle: Vec<usize> = (0..10)
            .filter(|&r| t.value(r, 1) == Value::Text("Ford"))
            .collect();
        assert_eq!(rows.as_slice(), oracle.as_slice());
        assert_eq!(rows.len(), 5);

        let both = ford.with(Filter::new("Year", "2009"));
        let year = t.filter_rows(&Filter::new("Year", "2009")).unwrap();
        assert_eq!(t.select_subspace(&both).unwrap(), rows.intersect(&year));

        // Absent value is an empty result, unknown field is an error.
        let absent = Subspace::new(vec![Filter::new("Brand", "Tesla")]);
        assert!(t.select_subspace(&absent).unwrap().is_empty());
        let unknown = Subspace::new(vec![Filter::new("Color", "red")]);
        assert!(matches!(
            t.select_subspace(&unknown),
            Err(TableError::Filter(_))
        ));
    }

    #[test]
    fn grouping() {
        let t = sample();
        let ford = t
            .select_subspace(&Subspace::new(vec![Filter::new("Brand", "Ford")]))
            .unwrap();
        let g = t
            .group_and_aggregate(&ford, &["Category"], "Sales", Aggregation::Sum)
            .unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].key, ["SUV"]);
        assert_eq!(g[0].value, 18.0);
        assert_eq!(g[1].value, 7.0);

        let by_year = t
            .group_and_aggregate(&RowSet::all(10), &["Year"], "Sales", Aggregation::Avg)
            .unwrap();
        let keys: Vec<_> = by_year.iter().map(|g| g.key[0].as_str()).collect();
        assert_eq!(keys, ["2007", "2008", "2009"]);

        let total = t
            .group_and_aggregate(&RowSet::all(10), &[], "Sales", Aggregation::Sum)
            .unwrap();
        assert_eq!(total.len(), 1);
        assert_eq!(total[0].value, 55.0);

        let empty = t
            .group_and_aggregate(&RowSet::default(), &["Year"], "Sales", Aggregation::Sum)
            .unwrap();
        assert!(empty.is_empty());

        assert!(matches!(
            t.group_and_aggregate(&RowSet::all(10), &[], "Brand", Aggregation::Sum),
            Err(TableError::Type(_))
        ));
        let counts = t
            .group_and_aggregate(&RowSet::all(10), &["Brand"], "Brand", Aggregation::Count)
            .unwrap();
        assert_eq!(counts.iter().map(|g| g.value).sum::<f64>(), 10.0);
    }

    #[test]
    fn temporal_successor() {
        let t = sample();
        assert_eq!(t.successor("Year", "2007"), Some("2008"));
        assert_eq!(t.successor("Year", "2009"), None);
    }
}
