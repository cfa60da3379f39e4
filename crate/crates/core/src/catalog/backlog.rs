use super::names::{DUPLICATES, ONE_STORY_MULTIPLE_BACKLOGS};
use super::{blank, echo, finish, not_applicable};
use crate::config::MetricConfig;
use crate::engine::rating::ratio_linear;
use crate::model::{ArtifactRef, MetricResult, SprintSlice, UserStory, Violation};

/// Sprint backlogs the story had joined by the end of the slice's sprint.
///
/// Memberships in sprints due later are ignored so early sprints are not
/// penalized for later carry-overs.
fn memberships_so_far(story: &UserStory, slice: &SprintSlice<'_>) -> usize {
    story
        .sprint_memberships
        .iter()
        .filter(|m| {
            slice
                .history
                .sprint(&m.sprint_id)
                .is_some_and(|s| s.due_on <= slice.sprint.due_on)
        })
        .count()
}

pub fn detect_multi_backlog(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.one_story_multiple_backlogs;
    let mut result = blank(ONE_STORY_MULTIPLE_BACKLOGS, slice);
    let total = slice.stories.len();

    let mut violations = Vec::new();
    let mut membership_sum = 0usize;
    for story in &slice.stories {
        let count = memberships_so_far(story, slice);
        if count > cfg.threshold_amount as usize {
            membership_sum += count;
            violations.push(
                Violation::new(
                    ONE_STORY_MULTIPLE_BACKLOGS,
                    slice.team,
                    &slice.sprint.id,
                    vec![ArtifactRef::Story(story.number)],
                    format!("story #{} has been in {} sprint backlogs", story.number, count),
                )
                .with_number("sprint_memberships", count as f64),
            );
        }
    }
    let avg_in_sprints = if violations.is_empty() {
        1.0
    } else {
        membership_sum as f64 / violations.len() as f64
    };
    echo(
        &mut result,
        &[
            ("violations", violations.len() as f64),
            ("total_stories", total as f64),
            ("avg_in_sprints", avg_in_sprints),
            ("threshold_amount", cfg.threshold_amount as f64),
            ("weight", cfg.weight),
        ],
    );
    match ratio_linear(violations.len() as f64, total as f64, cfg.weight, avg_in_sprints) {
        Ok(score) => finish(result, violations, score),
        Err(_) => not_applicable(result, "sprint backlog is empty"),
    }
}

pub fn detect_duplicates(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.duplicates;
    let mut result = blank(DUPLICATES, slice);
    let violations: Vec<Violation> = slice
        .stories
        .iter()
        .filter(|s| s.has_label_ignore_case(&cfg.duplicate_label))
        .map(|s| {
            Violation::new(
                DUPLICATES,
                slice.team,
                &slice.sprint.id,
                vec![ArtifactRef::Story(s.number)],
                format!("story #{} is labelled '{}'", s.number, cfg.duplicate_label),
            )
        })
        .collect();
    let total = slice.stories.len();
    echo(
        &mut result,
        &[("duplicates", violations.len() as f64), ("total_stories", total as f64), ("weight", cfg.weight)],
    );
    match ratio_linear(violations.len() as f64, total as f64, cfg.weight, 1.0) {
        Ok(score) => finish(result, violations, score),
        Err(_) => not_applicable(result, "sprint backlog is empty"),
    }
}
