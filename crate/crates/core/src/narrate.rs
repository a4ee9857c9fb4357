//! Caption templates, one per fact type.

use thiserror::Error;

use crate::facts::{self, DataFact, DerivedValue, ExtremeKind, FactError, FactType};
use crate::reward;
use crate::table::{Aggregation, DataTable, Subspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NarrationError {
    #[error("cannot narrate fact: {0}")]
    Derive(#[from] FactError),
}

pub fn agg_phrase(agg: Aggregation) -> &'static str {
    match agg {
        Aggregation::Count => "total number of",
        Aggregation::Sum => "total",
        Aggregation::Avg => "average",
        Aggregation::Max => "maximum",
        Aggregation::Min => "minimum",
    }
}

fn group_thousands(digits: &str) -> String {
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Integers with thousands separators, other values with two decimals.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let integral = (v - v.round()).abs() < 1e-9;
    let s = if integral {
        format!("{:.0}", v.round().abs())
    } else {
        format!("{:.2}", v.abs())
    };
    let (int, frac) = s.split_once('.').map_or((s.as_str(), None), |(a, b)| (a, Some(b)));
    let sign = if v < 0.0 && s.chars().any(|c| c != '0' && c != '.') { "-" } else { "" };
    match frac {
        Some(f) => format!("{sign}{}.{f}", group_thousands(int)),
        None => format!("{sign}{}", group_thousands(int)),
    }
}

/// A share in [0, 1] as a percentage with one decimal.
pub fn format_percent(share: f64) -> String {
    format!("{:.1}%", share * 100.0)
}

/// "Brand is Ford and Year is 2009"; empty for the whole table.
pub fn subspace_phrase(s: &Subspace) -> String {
    s.filters
        .iter()
        .map(|f| format!("{} is {}", f.field, f.value))
        .collect::<Vec<_>>()
        .join(" and ")
}

fn when(clauses: &[String]) -> String {
    let parts: Vec<&str> = clauses.iter().map(String::as_str).filter(|c| !c.is_empty()).collect();
    if parts.is_empty() {
        String::new()
    } else {
        format!(" when {}", parts.join(" and "))
    }
}

fn list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [a] => a.clone(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}

pub const MAX_LISTED_CATEGORIES: usize = 6;

fn measure_phrase(fact: &DataFact, i: usize) -> String {
    let m = &fact.measures[i];
    format!("{} {}", agg_phrase(m.agg), m.field)
}

/// Caption of a fact.
pub fn caption(fact: &DataFact, table: &DataTable) -> Result<String, NarrationError> {
    let derived = facts::derive_value(fact, table)?;
    let sub = subspace_phrase(&fact.subspace);
    let focus = fact.focus_values().iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let b = fact.breakdown_field().unwrap_or_default();
    let focus_is = || {
        fact.focus
            .iter()
            .map(|f| format!("{} is {}", f.field, f.value))
            .collect::<Vec<_>>()
            .join(" and ")
    };
    let num = derived.number().unwrap_or_default();
    let text = match fact.fact_type {
        FactType::Value => format!("The {} is {}{}.", measure_phrase(fact, 0), format_number(num), when(&[sub])),
        FactType::Difference => format!(
            "The difference between {} and {} regarding to their {} is {}{}.",
            focus[0],
            focus[1],
            measure_phrase(fact, 0),
            format_number(num),
            when(&[sub])
        ),
        FactType::Proportion => format!(
            "The {} accounts for {} of the {}{}.",
            focus[0],
            format_percent(num),
            measure_phrase(fact, 0),
            when(&[sub])
        ),
        FactType::Trend => {
            let dir = match derived {
                DerivedValue::Trend { direction, .. } => direction.name(),
                _ => unreachable!(),
            };
            let attention = if focus.is_empty() {
                String::new()
            } else {
                format!(" and the values of {} needs to pay attention", list(&focus))
            };
            format!(
                "The {dir} trend of {} over {b}(s){}{attention}.",
                measure_phrase(fact, 0),
                when(&[sub])
            )
        }
        FactType::Categorization => {
            let groups = fact.groups(table)?;
            let mut names: Vec<String> = groups.iter().take(MAX_LISTED_CATEGORIES).map(|g| g.label()).collect();
            if groups.len() > MAX_LISTED_CATEGORIES {
                names.push(format!("{} more", groups.len() - MAX_LISTED_CATEGORIES));
            }
            let attention = if focus.is_empty() {
                String::new()
            } else {
                format!(", among which {} needs to pay attention", list(&focus))
            };
            format!(
                "There are {} {b}(s) which are {}{}{attention}.",
                groups.len(),
                list(&names),
                when(&[sub])
            )
        }
        FactType::Distribution => {
            let attention = if focus.is_empty() { "" } else { " needs to pay attention" };
            format!(
                "The distribution of the {} over {b}(s){}{attention}.",
                measure_phrase(fact, 0),
                when(&[sub, focus_is()])
            )
        }
        FactType::Rank => {
            let clause = if sub.is_empty() { String::new() } else { format!(", when {sub}") };
            format!(
                "In the {} ranking of different {b}(s), the top three {b}(s) are {}{clause}.",
                measure_phrase(fact, 0),
                focus.join(", ")
            )
        }
        FactType::Association => format!(
            "The Pearson correlation between the {} and the {} is {:.2}{}.",
            measure_phrase(fact, 0),
            measure_phrase(fact, 1),
            num,
            when(&[sub])
        ),
        FactType::Extreme => {
            let which = match derived {
                DerivedValue::Extreme { which: ExtremeKind::Max, .. } => "maximum",
                _ => "minimum",
            };
            format!(
                "The {which} value of the {} is {}{}.",
                measure_phrase(fact, 0),
                format_number(num),
                when(&[sub, focus_is()])
            )
        }
        FactType::Outlier => format!(
            "The {} of {} is an outlier when compare with that of other {b}(s){}.",
            measure_phrase(fact, 0),
            focus[0],
            when(&[sub])
        ),
    };
    Ok(text)
}

/// One-paragraph briefing: fact count, coverage and the captions in order.
pub fn story_summary(facts: &[DataFact], table: &DataTable) -> Result<String, NarrationError> {
    let coverage = reward::integrity(facts, table);
    let mut text = format!(
        "This story contains {} facts and covers {} of the data.",
        facts.len(),
        format_percent(coverage)
    );
    for f in facts {
        text.push(' ');
        text.push_str(&caption(f, table)?);
    }
    Ok(text)
}
