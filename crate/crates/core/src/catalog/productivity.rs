use std::collections::BTreeSet;

use super::names::{AT_THE_LAST_MINUTE, DAILY_USER_STORY_AMOUNT, FAST_PULL_REQUESTS, NO_COMMITTING};
use super::{blank, echo, finish, not_applicable};
use crate::config::MetricConfig;
use crate::engine::rating::{capped_linear, cutoff_parabola, ratio_linear};
use crate::model::{ArtifactRef, MetricResult, Score, SprintSlice, Violation};

pub fn detect_last_minute(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.at_the_last_minute;
    let mut result = blank(AT_THE_LAST_MINUTE, slice);
    let due = slice.sprint.due_on;
    let window_seconds = cfg.window_minutes * 60.0;

    let violations: Vec<Violation> = slice
        .commits
        .iter()
        .filter(|c| {
            let before_due = due.seconds_since(c.authored_at);
            before_due >= 0 && before_due as f64 <= window_seconds
        })
        .map(|c| {
            let minutes = due.seconds_since(c.authored_at) as f64 / 60.0;
            Violation::new(
                AT_THE_LAST_MINUTE,
                slice.team,
                &slice.sprint.id,
                vec![ArtifactRef::Commit(c.id.clone())],
                format!("committed by {} {minutes:.0} minutes before the deadline", c.author),
            )
            .with_number("minutes_before_due", minutes)
        })
        .collect();
    let total = slice.commits.len();
    echo(
        &mut result,
        &[
            ("violations", violations.len() as f64),
            ("total_commits", total as f64),
            ("window_minutes", cfg.window_minutes),
            ("weight", cfg.weight),
        ],
    );
    match ratio_linear(violations.len() as f64, total as f64, cfg.weight, 1.0) {
        Ok(score) => finish(result, violations, score),
        Err(_) => not_applicable(result, "no commits in the sprint"),
    }
}

/// Scored by the average commits per developer; developers without any
/// commit in the sprint are reported as a single informational violation.
pub fn detect_no_committing(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let weight = config.no_committing.weight;
    let mut result = blank(NO_COMMITTING, slice);
    let developers = slice.history.developers(slice.team);
    let commits = slice.commits.len();
    echo(
        &mut result,
        &[("commits", commits as f64), ("developers", developers.len() as f64), ("weight", weight)],
    );
    if developers.is_empty() {
        return not_applicable(result, "team has no known developers");
    }
    let average = commits as f64 / developers.len() as f64;
    result.inputs_echo.insert("commits_per_developer".into(), average);

    let active: BTreeSet<&str> = slice.commits.iter().map(|c| c.author.as_str()).collect();
    let idle: Vec<ArtifactRef> = developers
        .iter()
        .filter(|d| !active.contains(d.as_str()))
        .map(|d| ArtifactRef::Developer(d.clone()))
        .collect();
    let mut violations = Vec::new();
    if !idle.is_empty() {
        let n = idle.len();
        violations.push(
            Violation::new(
                NO_COMMITTING,
                slice.team,
                &slice.sprint.id,
                idle,
                format!("{n} developer(s) without a commit this sprint"),
            )
            .with_number("idle_developers", n as f64),
        );
    }
    finish(result, violations, capped_linear(average, weight))
}

/// Scores the developers / backlog / sprint-days quota on the cut-off
/// parabola. The sprint itself is reported when the score is below 100.
pub fn detect_daily_story_quota(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.daily_user_story_amount;
    let mut result = blank(DAILY_USER_STORY_AMOUNT, slice);
    let developers = slice.history.developers(slice.team).len() as f64;
    let backlog = slice.stories.len() as f64;
    let days = slice.sprint.length_days();
    echo(
        &mut result,
        &[
            ("developers", developers),
            ("sprint_backlog", backlog),
            ("sprint_length_days", days),
            ("weight_a", cfg.weight_a),
            ("weight_b", cfg.weight_b),
        ],
    );
    if backlog == 0.0 {
        return not_applicable(result, "sprint backlog is empty");
    }
    let quota = developers / backlog / days;
    result.inputs_echo.insert("quota".into(), quota);
    let score = cutoff_parabola(quota, cfg.weight_a, cfg.weight_b);

    let mut violations = Vec::new();
    if score < Score::PERFECT {
        let mut v = Violation::new(
            DAILY_USER_STORY_AMOUNT,
            slice.team,
            &slice.sprint.id,
            vec![ArtifactRef::Sprint(slice.sprint.id.0.clone())],
            format!(
                "quota {quota:.4} ({developers} developers / {backlog} stories / {days:.2} days) is outside the optimal range"
            ),
        )
        .with_number("quota", quota);
        if cfg.weight_b > 0.0 {
            v = v.with_number("optimal_quota", cfg.weight_a / (2.0 * cfg.weight_b));
        }
        violations.push(v);
    }
    finish(result, violations, score)
}

pub fn detect_fast_pulls(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.fast_pull_requests;
    let mut result = blank(FAST_PULL_REQUESTS, slice);
    let window_seconds = cfg.window_minutes * 60.0;
    let mut total = 0usize;
    let mut violations = Vec::new();
    for pr in &slice.pulls {
        let Some(open_for) = pr.open_seconds() else { continue };
        total += 1;
        if (open_for as f64) < window_seconds && pr.comment_count == 0 {
            violations.push(
                Violation::new(
                    FAST_PULL_REQUESTS,
                    slice.team,
                    &slice.sprint.id,
                    vec![ArtifactRef::Pull(pr.number)],
                    format!("pull request #{} closed after {} minutes without comments", pr.number, open_for / 60),
                )
                .with_number("open_minutes", open_for as f64 / 60.0),
            );
        }
    }
    echo(
        &mut result,
        &[
            ("violations", violations.len() as f64),
            ("total_pull_requests", total as f64),
            ("window_minutes", cfg.window_minutes),
        ],
    );
    match ratio_linear(violations.len() as f64, total as f64, 1.0, 1.0) {
        Ok(score) => finish(result, violations, score),
        Err(_) => not_applicable(result, "no closed pull requests opened in the sprint"),
    }
}
