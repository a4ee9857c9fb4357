#![allow(dead_code)]

//! Fixture tables and one fact per type for the caption goldens.

use std::path::PathBuf;

use factweaver::table::{load_csv, CsvOptions};
use factweaver::{Aggregation, DataFact, DataTable, FactType, Filter};

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/goldens")
}

fn table(name: &str) -> DataTable {
    let bytes = std::fs::read(golden_dir().join(name)).unwrap();
    load_csv(&bytes, &CsvOptions::default()).unwrap()
}

pub fn cars() -> DataTable {
    table("cars.csv")
}

pub fn covid() -> DataTable {
    table("covid.csv")
}

/// (name, fact, uses the covid table) in template order.
pub fn golden_facts() -> Vec<(&'static str, DataFact, bool)> {
    use FactType::*;
    let sales = |t| DataFact::new(t).with_measure("Sales", Aggregation::Sum);
    let infections = |t| DataFact::new(t).with_measure("Infections", Aggregation::Sum);
    vec![
        ("value", sales(Value), false),
        (
            "difference",
            sales(Difference)
                .with_breakdown("Brand")
                .with_focus("Brand", "Ford")
                .with_focus("Brand", "Toyota"),
            false,
        ),
        ("proportion", sales(Proportion).with_breakdown("Brand").with_focus("Brand", "Ford"), false),
        ("trend", sales(Trend).with_breakdown("Year"), false),
        ("categorization", DataFact::new(Categorization).with_breakdown("Category"), false),
        (
            "distribution",
            infections(Distribution)
                .with_subspace(vec![Filter::new("Country", "China")])
                .with_breakdown("Province")
                .with_focus("Province", "Hubei"),
            true,
        ),
        (
            "rank",
            sales(Rank)
                .with_breakdown("Brand")
                .with_focus("Brand", "Ford")
                .with_focus("Brand", "Toyota")
                .with_focus("Brand", "Honda"),
            false,
        ),
        (
            "association",
            sales(Association).with_measure("Price", Aggregation::Sum).with_breakdown("Brand"),
            false,
        ),
        (
            "extreme",
            DataFact::new(Extreme)
                .with_measure("Deaths", Aggregation::Sum)
                .with_breakdown("Date")
                .with_focus("Date", "2020/3/2"),
            true,
        ),
        (
            "outlier",
            infections(Outlier)
                .with_subspace(vec![Filter::new("Country", "China")])
                .with_breakdown("Province")
                .with_focus("Province", "Hubei"),
            true,
        ),
    ]
}

/// The stored golden captions keyed by fact name.
pub fn golden_captions() -> Vec<(String, String)> {
    std::fs::read_to_string(golden_dir().join("captions.txt"))
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (k, v) = l.split_once('\t').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}
