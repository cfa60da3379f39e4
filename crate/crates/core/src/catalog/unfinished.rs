use serde::{Deserialize, Serialize};

use crate::model::{ProjectHistory, SprintId, StoryState, WindowError};
use crate::time::Timestamp;

/// Stories still open in a sprint backlog whose deadline has passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnfinishedStories {
    pub sprint_title: String,
    pub amount: usize,
    pub issues: Vec<u64>,
    pub total: usize,
    /// `amount / total`, unrounded; `None` for an empty backlog.
    pub percent: Option<f64>,
}

/// Returns `None` while the sprint is not yet past due at `now`.
pub fn unfinished_stories(
    history: &ProjectHistory,
    sprint: &SprintId,
    now: Timestamp,
) -> Result<Option<UnfinishedStories>, WindowError> {
    let s = history.sprint(sprint).ok_or_else(|| WindowError::UnknownSprint(sprint.clone()))?;
    if s.due_on >= now {
        return Ok(None);
    }
    let backlog: Vec<_> = history.backlog_of(sprint).collect();
    let mut issues: Vec<u64> = backlog
        .iter()
        .filter(|story| story.state == StoryState::Open)
        .map(|story| story.number)
        .collect();
    issues.sort_unstable();
    let total = backlog.len();
    let amount = issues.len();
    let percent = (total > 0).then(|| amount as f64 / total as f64);
    Ok(Some(UnfinishedStories { sprint_title: s.title.clone(), amount, issues, total, percent }))
}
