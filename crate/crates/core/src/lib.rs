//! Agile process conformance lint: metrics over commits, user stories,
//! sprints, pull requests and build statistics.

pub mod catalog;
pub mod config;
pub mod engine;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod report;
pub mod scoring;
pub mod time;

pub use config::MetricConfig;
pub use engine::{evaluate, run_all, MetricRegistry};
pub use model::{build_history, ProjectHistory, RawRecords};
pub use report::{lint, LintOptions, RunReport};
