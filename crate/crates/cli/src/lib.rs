//! Batch front end: model files in, result tables out.

pub mod compare;
pub mod results;
pub mod run;

pub use compare::{compare_report, ComparePoint, CompareReport};
pub use results::{Format, Metadata, ResultTable, Row};
pub use run::{parse_observable, run, simulate, Mode, RunConfig};
