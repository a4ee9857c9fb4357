//! Automatic generation of fact sheets from tabular data.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod factgen;
pub mod compose;
pub mod document;
pub mod facts;
pub mod logic;
pub mod narrate;
pub mod reward;
pub mod scalar;
pub mod scoring;
pub mod search;
pub mod stats;
pub mod table;
pub mod visualize;

pub use facts::{DataFact, DerivedValue, FactError, FactRecord, FactType, Measure};
pub use table::{Aggregation, DataTable, FieldKind, FieldMeta, Filter, Subspace, TableError};

pub type TestResultF64 = stats::TestResult<f64>;
pub type TestResultF32 = stats::TestResult<f32>;
pub type RegressionFitF64 = stats::RegressionFit<f64>;
pub type RegressionFitF32 = stats::RegressionFit<f32>;
