use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// How important violations of a metric are for the team's process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Informational,
    VeryLow,
    Low,
    Normal,
    High,
}

impl Severity {
    pub const ALL: [Severity; 5] = [
        Severity::Informational,
        Severity::VeryLow,
        Severity::Low,
        Severity::Normal,
        Severity::High,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Informational => "informational",
            Severity::VeryLow => "very_low",
            Severity::Low => "low",
            Severity::Normal => "normal",
            Severity::High => "high",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cost of collecting violations and computing the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Effort {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    VersionControl,
    StoryTracker,
    PullRequests,
    CoverageStats,
}

/// Static description of a conformance metric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MetricDescriptor {
    pub name: &'static str,
    pub synopsis: &'static str,
    pub description: &'static str,
    pub data_sources: BTreeSet<DataSource>,
    pub categories: BTreeSet<&'static str>,
    pub effort: Effort,
    pub severity: Severity,
    /// What the metric does not measure.
    pub pitfalls: &'static str,
}
