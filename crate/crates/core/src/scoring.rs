//! Fact importance: pattern significance weighted by self-information.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::facts::{self, DataFact, DerivedValue, ExtremeKind, FactError, FactType};
use crate::stats::{self, Distribution, StatsError};
use crate::table::{DataTable, FieldKind, FieldMeta, Subspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Fact(#[from] FactError),
}

impl From<StatsError> for ScoringError {
    fn from(e: StatsError) -> Self {
        ScoringError::Fact(FactError::Stats(e))
    }
}

impl From<crate::table::TableError> for ScoringError {
    fn from(e: crate::table::TableError) -> Self {
        ScoringError::Fact(FactError::Table(e))
    }
}

type Result<T> = std::result::Result<T, ScoringError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    /// Scale of the logistic slope model for trends, on the normalized
    /// slope scale.
    pub trend_logistic_scale: f64,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            trend_logistic_scale: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactScore {
    pub significance: f64,
    pub self_information_bits: f64,
    pub probability: f64,
    pub importance: f64,
    /// Set when some filter selects no rows; such facts score 0.
    #[serde(default)]
    pub zero_support: bool,
}

impl FactScore {
    pub fn zero_support() -> Self {
        FactScore {
            significance: 0.0,
            self_information_bits: 0.0,
            probability: 0.0,
            importance: 0.0,
            zero_support: true,
        }
    }
}

fn dimension_count(schema: &[FieldMeta]) -> usize {
    schema.iter().filter(|f| f.kind.is_dimension()).count()
}

/// 1/2^m times the product of per-filter row fractions, m being the
/// number of categorical and temporal fields.
pub fn subspace_probability(s: &Subspace, table: &DataTable) -> Result<f64> {
    let m = dimension_count(table.schema()) as i32;
    let n = table.row_count() as f64;
    let mut p = 0.5f64.powi(m);
    for f in &s.filters {
        p *= table.filter_rows(f)?.len() as f64 / n;
    }
    Ok(p)
}

/// Share of the subspace rows singled out by the focus; 1 without focus.
pub fn focus_probability(fact: &DataFact, table: &DataTable) -> Result<f64> {
    if fact.focus.is_empty() {
        return Ok(1.0);
    }
    let scope = table.select_subspace(&fact.subspace)?;
    if scope.is_empty() {
        return Err(ScoringError::Degenerate(
            "focus set on a subspace with no rows".into(),
        ));
    }
    Ok(fact.focus_rows(table)?.len() as f64 / scope.len() as f64)
}

/// (P(m|t), P(b|t)) from the field counts of the schema.
pub fn field_probability(fact: &DataFact, schema: &[FieldMeta]) -> Result<(f64, f64)> {
    let count = |k: FieldKind| schema.iter().filter(|f| f.kind == k).count();
    let (n, c, t) = (
        count(FieldKind::Numerical),
        count(FieldKind::Categorical),
        count(FieldKind::Temporal),
    );
    let inv = |k: usize, what: &str| {
        if k == 0 {
            Err(ScoringError::Schema(format!(
                "{} facts need at least one {what} field",
                fact.fact_type
            )))
        } else {
            Ok(1.0 / k as f64)
        }
    };
    let pm = match fact.measures.len() {
        0 => 1.0,
        1 => inv(n, "numerical")?,
        _ => {
            if n < 2 {
                return Err(ScoringError::Schema(
                    "association facts need two numerical fields".into(),
                ));
            }
            2.0 / (n * (n - 1)) as f64
        }
    };
    use crate::facts::BreakdownRule as B;
    let pb = match fact.fact_type.constraint().breakdown {
        B::None => 1.0,
        B::Dimension => inv(c + t, "categorical or temporal")?,
        B::Temporal => inv(t, "temporal")?,
        B::Categorical => inv(c, "categorical")?,
    };
    Ok((pm, pb))
}

/// P(f) = P(m|t)·P(b|t)·P(s)·P(x|s).
pub fn probability(fact: &DataFact, table: &DataTable) -> Result<f64> {
    let (pm, pb) = field_probability(fact, table.schema())?;
    let ps = subspace_probability(&fact.subspace, table)?;
    if ps == 0.0 {
        return Ok(0.0);
    }
    Ok(pm * pb * ps * focus_probability(fact, table)?)
}

pub fn significance(fact: &DataFact, table: &DataTable) -> Result<f64> {
    significance_with(fact, table, &ScoringConfig::default())
}

fn one_minus(p: f64) -> f64 {
    (1.0 - p).clamp(0.0, 1.0)
}

fn shift_non_negative(mut v: Vec<f64>) -> Vec<f64> {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        v.iter_mut().for_each(|x| *x -= min);
    }
    v
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Pattern significance in [0, 1] by the per-type procedure.
pub fn significance_with(fact: &DataFact, table: &DataTable, cfg: &ScoringConfig) -> Result<f64> {
    facts::validate(fact, table.schema()).map_err(FactError::Invalid)?;
    let values = |f: &DataFact| -> Result<Vec<f64>> {
        Ok(f.groups(table)?.into_iter().map(|g| g.value).collect())
    };
    let s = match fact.fact_type {
        FactType::Value => probability(fact, table)?,
        FactType::Difference => {
            let v = match facts::derive_value(fact, table)? {
                DerivedValue::Difference { value } => value,
                other => unreachable!("difference derived {other:?}"),
            };
            let g = values(fact)?;
            let max = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = g.iter().copied().fold(f64::INFINITY, f64::min);
            if max > min {
                v.abs() / (max - min)
            } else {
                0.0
            }
        }
        FactType::Proportion => match facts::derive_value(fact, table)? {
            DerivedValue::Proportion { value } if value >= 0.5 => 1.0,
            DerivedValue::Proportion { value } => value,
            other => unreachable!("proportion derived {other:?}"),
        },
        FactType::Trend => {
            let y = values(fact)?;
            if y.len() < 3 {
                return Err(FactError::InsufficientData {
                    needed: 3,
                    got: y.len(),
                }
                .into());
            }
            let scale = y.iter().map(|v| v.abs()).sum::<f64>() / y.len() as f64;
            if scale == 0.0 {
                0.0
            } else {
                let y: Vec<f64> = y.iter().map(|v| v / scale).collect();
                let fit = stats::linear_regression(&y)?;
                let p = Distribution::Logistic {
                    location: 0.0,
                    scale: cfg.trend_logistic_scale,
                }
                .sf(fit.slope.abs())?;
                fit.r_squared * one_minus(p)
            }
        }
        FactType::Categorization => one_minus(stats::chi_square_uniform(&values(fact)?)?.p_value),
        FactType::Distribution => one_minus(stats::shapiro_wilk(&values(fact)?)?.p_value),
        FactType::Rank => {
            let v = sorted_desc(shift_non_negative(values(fact)?));
            one_minus(stats::power_law_residual_test(&v)?.p_value)
        }
        FactType::Association => {
            let pairs = fact.paired_groups(table)?;
            let x: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.2).collect();
            one_minus(stats::pearson_test(&x, &y)?.1.p_value)
        }
        FactType::Extreme => {
            let which = match facts::derive_value(fact, table)? {
                DerivedValue::Extreme { which, .. } => which,
                other => unreachable!("extreme derived {other:?}"),
            };
            let v = values(fact)?;
            let v = match which {
                ExtremeKind::Max => shift_non_negative(v),
                ExtremeKind::Min => {
                    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    v.iter().map(|x| max - x).collect()
                }
            };
            one_minus(stats::power_law_residual_test(&sorted_desc(v))?.p_value)
        }
        FactType::Outlier => {
            let groups = fact.groups(table)?;
            let v: Vec<f64> = groups.iter().map(|g| g.value).collect();
            let out = stats::grubbs_test(&v)?;
            match out.outlier {
                Some(i) if fact.focus_values() == [groups[i].label().as_str()] => {
                    one_minus(out.result.p_value)
                }
                _ => 0.0,
            }
        }
    };
    Ok(s.clamp(0.0, 1.0))
}

pub fn importance(fact: &DataFact, table: &DataTable) -> Result<FactScore> {
    importance_with(fact, table, &ScoringConfig::default())
}

/// Full score of a fact. Significance failures (too few groups, zero
/// variance, ...) score as 0 rather than erroring.
pub fn importance_with(fact: &DataFact, table: &DataTable, cfg: &ScoringConfig) -> Result<FactScore> {
    facts::validate(fact, table.schema()).map_err(FactError::Invalid)?;
    let probability = probability(fact, table)?;
    if probability <= 0.0 {
        return Ok(FactScore::zero_support());
    }
    let significance = significance_with(fact, table, cfg).unwrap_or(0.0);
    let self_information_bits = -probability.log2();
    Ok(FactScore {
        significance,
        self_information_bits,
        probability,
        importance: significance * self_information_bits,
        zero_support: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::{load_csv, Aggregation, CsvOptions, Filter};

    fn table(csv: &str) -> DataTable {
        load_csv(csv.as_bytes(), &CsvOptions::default()).unwrap()
    }

    fn brand_table() -> DataTable {
        table(
            "Brand,Region,Sales\n\
             Ford,N,1\nFord,N,2\nFord,S,3\nFord,S,4\nFord,S,5\n\
             BMW,N,6\nBMW,N,7\nKia,S,8\nKia,N,9\nKia,N,10\n",
        )
    }

    #[test]
    fn subspace_probability_examples() {
        let one = table("Brand,Sales\nA,1\nB,2\n");
        assert_eq!(subspace_probability(&Subspace::all(), &one).unwrap(), 0.5);

        let t = brand_table();
        let ford = Subspace::new(vec![Filter::new("Brand", "Ford")]);
        assert_eq!(subspace_probability(&ford, &t).unwrap(), 0.125);
        let north = ford.with(Filter::new("Region", "N"));
        assert_eq!(subspace_probability(&north, &t).unwrap(), 0.25 * 0.5 * 0.6);
        let ghost = Subspace::new(vec![Filter::new("Brand", "Tesla")]);
        assert_eq!(subspace_probability(&ghost, &t).unwrap(), 0.0);
    }

    #[test]
    fn three_bit_value_fact() {
        let t = brand_table();
        let f = DataFact::new(FactType::Value)
            .with_subspace(vec![Filter::new("Brand", "Ford")])
            .with_measure("Sales", Aggregation::Sum);
        let s = importance(&f, &t).unwrap();
        assert_eq!(s.probability, 0.125);
        assert_eq!(s.self_information_bits, 3.0);
        assert_eq!(s.significance, 0.125);
        assert_eq!(s.importance, 0.375);
    }

    #[test]
    fn focus_probability_counts_rows() {
        let t = brand_table();
        let f = DataFact::new(FactType::Proportion)
            .with_breakdown("Brand")
            .with_measure("Sales", Aggregation::Sum)
            .with_focus("Brand", "BMW");
        assert_eq!(focus_probability(&f, &t).unwrap(), 0.2);
        let mut no_focus = f.clone();
        no_focus.focus.clear();
        assert_eq!(focus_probability(&no_focus, &t).unwrap(), 1.0);
        let ghost = f.with_subspace(vec![Filter::new("Brand", "Tesla")]);
        assert!(matches!(
            focus_probability(&ghost, &t),
            Err(ScoringError::Degenerate(_))
        ));
    }

    #[test]
    fn field_probability_examples() {
        let t = table("Date,Brand,Region,Sales,Price,Units\n2020-01-01,A,N,1,2,3\n");
        let diff = DataFact::new(FactType::Difference)
            .with_breakdown("Brand")
            .with_measure("Sales", Aggregation::Sum);
        assert_eq!(field_probability(&diff, t.schema()).unwrap(), (1.0 / 3.0, 1.0 / 3.0));
        let assoc = DataFact::new(FactType::Association)
            .with_breakdown("Brand")
            .with_measure("Sales", Aggregation::Sum)
            .with_measure("Price", Aggregation::Sum);
        assert_eq!(field_probability(&assoc, t.schema()).unwrap().0, 1.0 / 3.0);
        let cat = DataFact::new(FactType::Categorization).with_breakdown("Brand");
        assert_eq!(field_probability(&cat, t.schema()).unwrap(), (1.0, 0.5));

        let no_time = table("Brand,Sales\nA,1\n");
        let trend = DataFact::new(FactType::Trend)
            .with_breakdown("Brand")
            .with_measure("Sales", Aggregation::Sum);
        assert!(matches!(
            field_probability(&trend, no_time.schema()),
            Err(ScoringError::Schema(_))
        ));
        let value = DataFact::new(FactType::Value).with_measure("Sales", Aggregation::Sum);
        assert_eq!(field_probability(&value, no_time.schema()).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn proportion_significance() {
        let t = table("Brand,Sales\nA,62\nB,30\nC,8\n");
        let f = |b: &str| {
            DataFact::new(FactType::Proportion)
                .with_breakdown("Brand")
                .with_measure("Sales", Aggregation::Sum)
                .with_focus("Brand", b)
        };
        assert_eq!(significance(&f("A"), &t).unwrap(), 1.0);
        assert_eq!(significance(&f("B"), &t).unwrap(), 0.30);
    }

    #[test]
    fn outlier_significance() {
        let flat = table("K,V\na,10\nb,11\nc,9\nd,10\ne,10.5\n");
        let f = DataFact::new(FactType::Outlier)
            .with_breakdown("K")
            .with_measure("V", Aggregation::Sum)
            .with_focus("K", "b");
        assert_eq!(significance(&f, &flat).unwrap(), 0.0);

        let spiked = table("K,V\na,8\nb,9\nc,10\nd,9\ne,50\nf,9\ng,10\n");
        let hit = DataFact::new(FactType::Outlier)
            .with_breakdown("K")
            .with_measure("V", Aggregation::Sum)
            .with_focus("K", "e");
        let s = significance(&hit, &spiked).unwrap();
        assert!(s > 0.95, "{s}");
        let miss = DataFact {
            focus: vec![Filter::new("K", "a")],
            ..hit
        };
        assert_eq!(significance(&miss, &spiked).unwrap(), 0.0);
    }

    #[test]
    fn association_perfect_correlation() {
        let t = table("K,X,Y\na,1,2\nb,2,4\nc,3,6\nd,4,8\n");
        let f = DataFact::new(FactType::Association)
            .with_breakdown("K")
            .with_measure("X", Aggregation::Sum)
            .with_measure("Y", Aggregation::Sum);
        assert_eq!(significance(&f, &t).unwrap(), 1.0);
    }

    #[test]
    fn difference_of_extremes_is_one() {
        let t = table("K,V\na,1\nb,5\nc,3\n");
        let f = DataFact::new(FactType::Difference)
            .with_breakdown("K")
            .with_measure("V", Aggregation::Sum)
            .with_focus("K", "a")
            .with_focus("K", "b");
        assert_eq!(significance(&f, &t).unwrap(), 1.0);
    }

    #[test]
    fn zero_support_scores_zero() {
        let t = brand_table();
        let f = DataFact::new(FactType::Value)
            .with_subspace(vec![Filter::new("Brand", "Tesla")])
            .with_measure("Sales", Aggregation::Sum);
        let s = importance(&f, &t).unwrap();
        assert!(s.zero_support);
        assert_eq!(s.importance, 0.0);
    }

    #[test]
    fn trend_line_beats_noise() {
        let t = table(
            "Date,V\n2020-01-01,1\n2020-01-02,2\n2020-01-03,3\n2020-01-04,4\n2020-01-05,5\n",
        );
        let f = DataFact::new(FactType::Trend)
            .with_breakdown("Date")
            .with_measure("V", Aggregation::Sum);
        let s = significance(&f, &t).unwrap();
        // r² = 1, normalized slope 4/3, p = 1/(1 + e^(8/3)).
        let expected = 1.0 - 1.0 / (1.0 + (8.0f64 / 3.0).exp());
        assert!((s - expected).abs() < 1e-12, "{s} vs {expected}");
    }
}
