use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{SprintId, TeamId};

pub type NumericDetail = BTreeMap<String, f64>;

/// A score in `[0, 100]`; 100 means no violations were found.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Score(f64);

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("score {0} is outside [0, 100]")]
pub struct ScoreRangeError(pub f64);

impl Score {
    pub const PERFECT: Score = Score(100.0);
    pub const ZERO: Score = Score(0.0);

    pub fn new(value: f64) -> Result<Score, ScoreRangeError> {
        if (0.0..=100.0).contains(&value) {
            Ok(Score(value))
        } else {
            Err(ScoreRangeError(value))
        }
    }

    /// Clamps into range; NaN maps to 0.
    pub fn clamped(value: f64) -> Score {
        if value.is_nan() {
            Score(0.0)
        } else {
            Score(value.clamp(0.0, 100.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Value rounded to one decimal, for reporting.
    pub fn rounded(self) -> f64 {
        round1(self.0)
    }
}

pub(crate) fn round1(value: f64) -> f64 {
    (value * 10.0).round() / 10.0
}

impl TryFrom<f64> for Score {
    type Error = ScoreRangeError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Score::new(value)
    }
}

impl From<Score> for f64 {
    fn from(s: Score) -> f64 {
        s.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.0)
    }
}

/// Reference to an offending development artifact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum ArtifactRef {
    Commit(String),
    Story(u64),
    Pull(u64),
    File(String),
    Developer(String),
    Sprint(String),
}

impl fmt::Display for ArtifactRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactRef::Commit(id) => write!(f, "commit {}", short_sha(id)),
            ArtifactRef::Story(n) => write!(f, "story #{n}"),
            ArtifactRef::Pull(n) => write!(f, "pull request #{n}"),
            ArtifactRef::File(p) => write!(f, "file {p}"),
            ArtifactRef::Developer(d) => write!(f, "developer {d}"),
            ArtifactRef::Sprint(s) => write!(f, "sprint {s}"),
        }
    }
}

fn short_sha(id: &str) -> &str {
    id.get(..12).unwrap_or(id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub metric: String,
    pub team: TeamId,
    pub sprint: SprintId,
    pub artifacts: Vec<ArtifactRef>,
    pub detail: String,
    #[serde(default)]
    pub numeric_detail: NumericDetail,
}

impl Violation {
    /// Panics when `artifacts` is empty: a violation always points somewhere.
    pub fn new(
        metric: &str,
        team: &TeamId,
        sprint: &SprintId,
        artifacts: Vec<ArtifactRef>,
        detail: impl Into<String>,
    ) -> Self {
        assert!(!artifacts.is_empty(), "violation of {metric} without artifacts");
        Violation {
            metric: metric.to_string(),
            team: team.clone(),
            sprint: sprint.clone(),
            artifacts,
            detail: detail.into(),
            numeric_detail: NumericDetail::new(),
        }
    }

    pub fn with_number(mut self, name: &str, value: f64) -> Self {
        self.numeric_detail.insert(name.to_string(), value);
        self
    }
}

/// Outcome of one metric for one team in one sprint.
///
/// `score` is `None` when the metric is not applicable, e.g. its ratio has
/// no denominator; `diagnostic` then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: String,
    pub team: TeamId,
    pub sprint: SprintId,
    pub violations: Vec<Violation>,
    pub score: Option<Score>,
    pub inputs_echo: NumericDetail,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl MetricResult {
    pub fn is_applicable(&self) -> bool {
        self.score.is_some()
    }

    /// Every artifact across all violations, in report order.
    pub fn artifacts(&self) -> impl Iterator<Item = &ArtifactRef> {
        self.violations.iter().flat_map(|v| v.artifacts.iter())
    }
}
