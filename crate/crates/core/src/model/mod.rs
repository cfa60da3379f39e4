//! Development data model: commits, stories, sprints, pull requests and
//! per-commit build statistics, plus the metric result types.

mod descriptor;
pub(crate) mod history;
mod results;
mod window;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::time::{Timestamp, SECONDS_PER_DAY};

pub use descriptor::{DataSource, Effort, MetricDescriptor, Severity};
pub use history::{build_history, HistoryError, ProjectHistory, RawRecords, ShallowParent};
pub use results::{ArtifactRef, MetricResult, NumericDetail, Score, ScoreRangeError, Violation};
pub use window::{window, SprintSlice, WindowError};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(
    /// Team identifier.
    TeamId
);
string_id!(
    /// Opaque sprint (milestone) identifier, unique across the history.
    SprintId
);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    #[serde(rename = "added")]
    pub lines_added: u64,
    #[serde(rename = "deleted")]
    pub lines_deleted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commit {
    pub id: String,
    /// Lowercase e-mail of the author.
    pub author: String,
    pub authored_at: Timestamp,
    #[serde(default)]
    pub parents: Vec<String>,
    #[serde(default)]
    pub message: String,
    #[serde(default)]
    pub files: Vec<FileChange>,
    pub team: TeamId,
}

impl Commit {
    pub fn is_merge(&self) -> bool {
        self.parents.len() > 1
    }
}

/// Per-commit output of external coverage and complexity tooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub commit_id: String,
    pub coverage_percent: f64,
    pub complexity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoryState {
    Open,
    Closed,
}

/// One assignment of a story to a sprint backlog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SprintMembership {
    pub sprint_id: SprintId,
    pub assigned_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserStory {
    pub number: u64,
    pub title: String,
    #[serde(default)]
    pub body: String,
    pub state: StoryState,
    #[serde(default)]
    pub labels: BTreeSet<String>,
    /// Full membership history, in assignment order.
    #[serde(rename = "milestone_history", default)]
    pub sprint_memberships: Vec<SprintMembership>,
    #[serde(default)]
    pub assignees: BTreeSet<String>,
    pub created_at: Timestamp,
    #[serde(default)]
    pub closed_at: Option<Timestamp>,
    pub team: TeamId,
}

impl UserStory {
    pub fn is_member_of(&self, sprint: &SprintId) -> bool {
        self.sprint_memberships.iter().any(|m| &m.sprint_id == sprint)
    }

    /// Character count of title and body joined by a space, with every
    /// whitespace run collapsed to one space and the ends trimmed.
    pub fn length(&self) -> usize {
        let mut count = 0usize;
        let mut pending_space = false;
        for c in self.title.chars().chain(std::iter::once(' ')).chain(self.body.chars()) {
            if c.is_whitespace() {
                pending_space = count > 0;
            } else {
                if pending_space {
                    count += 1;
                    pending_space = false;
                }
                count += 1;
            }
        }
        count
    }

    pub fn checkboxes(&self) -> usize {
        crate::ingest::count_checkboxes(&self.body)
    }

    pub fn has_label_ignore_case(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l.eq_ignore_ascii_case(label))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sprint {
    pub id: SprintId,
    pub title: String,
    pub starts_at: Timestamp,
    pub due_on: Timestamp,
    pub team: TeamId,
}

impl Sprint {
    pub fn length_days(&self) -> f64 {
        self.due_on.seconds_since(self.starts_at) as f64 / SECONDS_PER_DAY as f64
    }

    /// Closed-interval membership test.
    pub fn contains(&self, t: Timestamp) -> bool {
        self.starts_at <= t && t <= self.due_on
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequest {
    pub number: u64,
    pub opened_at: Timestamp,
    #[serde(default)]
    pub closed_at: Option<Timestamp>,
    pub merged: bool,
    #[serde(rename = "comments")]
    pub comment_count: u64,
    pub team: TeamId,
}

impl PullRequest {
    pub fn open_seconds(&self) -> Option<i64> {
        self.closed_at.map(|c| c.seconds_since(self.opened_at))
    }
}
