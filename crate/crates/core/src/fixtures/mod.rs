//! Seeded synthetic histories with a known violation set.
//!
//! [`generate`] builds a history on which every detector is clean at the
//! default config (see [`Certificate`]); [`inject`] then plants violations
//! and returns a [`Ledger`] of exactly the artifacts each detector must
//! report.

mod example;
mod generate;
mod inject;
mod rng;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::engine::MetricRegistry;
use crate::ingest::{self, IngestError};
use crate::model::{window, ArtifactRef, HistoryError, ProjectHistory, SprintId, TeamId};

pub use example::{unfinished_example, UNFINISHED_EXAMPLE_SPRINT};
pub use generate::{generate, Certificate, CertificateEntry, Fixture};
pub use inject::inject;
pub use rng::{FixtureRng, RNG_NAME};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FixtureError {
    #[error("invalid fixture spec: {0}")]
    InvalidSpec(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("generated history is not clean: {metric} reported {violations} violation(s)")]
    GuaranteeBroken { metric: String, violations: usize },
    #[error(transparent)]
    History(#[from] HistoryError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Shape of a generated history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixtureSpec {
    pub seed: u64,
    pub teams: u32,
    pub developers_per_team: u32,
    pub sprints: u32,
    pub sprint_length_days: f64,
    pub stories_per_sprint: u32,
    pub commits_per_dev_per_sprint: u32,
    pub pulls_per_sprint: u32,
}

impl Default for FixtureSpec {
    /// One-day sprints with as many stories as developers, which puts the
    /// daily story quota exactly at its optimum.
    fn default() -> Self {
        FixtureSpec {
            seed: 1,
            teams: 2,
            developers_per_team: 6,
            sprints: 4,
            sprint_length_days: 1.0,
            stories_per_sprint: 6,
            commits_per_dev_per_sprint: 12,
            pulls_per_sprint: 4,
        }
    }
}

impl FixtureSpec {
    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        let spec: FixtureSpec = serde_json::from_str(text).map_err(|e| FixtureError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        if !(self.sprint_length_days.is_finite() && self.sprint_length_days > 0.0) {
            return Err(FixtureError::InvalidSpec(format!(
                "sprint_length_days must be positive, got {}",
                self.sprint_length_days
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HotFiles {
    pub count: u32,
    pub edits: u32,
    pub authors: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HugeStories {
    pub count: u32,
    pub length_multiplier: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NeverendingStories {
    pub count: u32,
    pub sprints_each: u32,
}

/// Violations to plant, one directive per metric. Absent directives
/// plant nothing.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InjectionSpec {
    pub hot_files: Option<HotFiles>,
    pub tdd_regressions: u32,
    pub huge_stories: Option<HugeStories>,
    pub neverending_stories: Option<NeverendingStories>,
    pub duplicate_stories: u32,
    pub last_minute_commits: u32,
    pub idle_developers: u32,
    pub overloaded_sprints: u32,
    pub silent_fast_pulls: u32,
}

impl InjectionSpec {
    pub fn from_json(text: &str) -> Result<Self, FixtureError> {
        serde_json::from_str(text).map_err(|e| FixtureError::InvalidSpec(e.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.hot_files.is_none_or(|h| h.count == 0)
            && self.tdd_regressions == 0
            && self.huge_stories.is_none_or(|h| h.count == 0)
            && self.neverending_stories.is_none_or(|n| n.count == 0)
            && self.duplicate_stories == 0
            && self.last_minute_commits == 0
            && self.idle_developers == 0
            && self.overloaded_sprints == 0
            && self.silent_fast_pulls == 0
    }
}

/// One expected violation artifact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub team: TeamId,
    pub sprint: SprintId,
    pub artifact: ArtifactRef,
}

/// Expected violation artifacts per metric name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ledger(pub BTreeMap<String, BTreeSet<LedgerEntry>>);

impl Ledger {
    pub fn for_metric(&self, metric: &str) -> BTreeSet<LedgerEntry> {
        self.0.get(metric).cloned().unwrap_or_default()
    }

    pub fn record(&mut self, metric: &str, team: &TeamId, sprint: &SprintId, artifact: ArtifactRef) {
        self.0.entry(metric.to_string()).or_default().insert(LedgerEntry {
            team: team.clone(),
            sprint: sprint.clone(),
            artifact,
        });
    }

    pub fn is_empty(&self) -> bool {
        self.0.values().all(|s| s.is_empty())
    }
}

/// Every violation artifact one metric reports over all team-sprints.
pub fn detected(history: &ProjectHistory, metric: &str, config: &MetricConfig) -> BTreeSet<LedgerEntry> {
    let Some(entry) = MetricRegistry::standard().get(metric) else { return BTreeSet::new() };
    let mut out = BTreeSet::new();
    for sprint in history.sprints() {
        let slice = window(history, &sprint.team, &sprint.id).expect("sprint from history");
        let result = (entry.detector)(&slice, config);
        for artifact in result.artifacts() {
            out.insert(LedgerEntry { team: sprint.team.clone(), sprint: sprint.id.clone(), artifact: artifact.clone() });
        }
    }
    out
}

/// Header stored next to generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureHeader {
    pub generator: String,
    pub rng: String,
    pub spec: FixtureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection: Option<InjectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injection_seed: Option<u64>,
    pub certificate: Certificate,
}

impl FixtureHeader {
    pub fn new(spec: &FixtureSpec, certificate: &Certificate) -> Self {
        FixtureHeader {
            generator: format!("sprintlint {}", env!("CARGO_PKG_VERSION")),
            rng: RNG_NAME.to_string(),
            spec: spec.clone(),
            injection: None,
            injection_seed: None,
            certificate: certificate.clone(),
        }
    }
}

/// Writes the ingest-format files plus `fixture.json` and, when given,
/// `ledger.json`.
pub fn write_fixture(
    dir: impl AsRef<Path>,
    history: &ProjectHistory,
    header: &FixtureHeader,
    ledger: Option<&Ledger>,
) -> Result<(), FixtureError> {
    let dir = dir.as_ref();
    ingest::write_dir(dir, history.records())?;
    write_json(&dir.join("fixture.json"), header)?;
    if let Some(ledger) = ledger {
        write_json(&dir.join("ledger.json"), ledger)?;
    }
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FixtureError> {
    let value = serde_json::to_value(value).expect("fixture metadata serializes");
    let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| IngestError::Io { path: path.to_path_buf(), message: e.to_string() }.into())
}
