//! The nine built-in conformance metrics and the unfinished-stories query.

mod backlog;
mod productivity;
mod unfinished;
mod xp;

use std::collections::BTreeSet;

use crate::engine::MetricRegistry;
use crate::model::{DataSource, Effort, MetricDescriptor, MetricResult, NumericDetail, Score, Severity, SprintSlice, Violation};

pub use backlog::{detect_duplicates, detect_multi_backlog};
pub use productivity::{detect_daily_story_quota, detect_fast_pulls, detect_last_minute, detect_no_committing};
pub use unfinished::{unfinished_stories, UnfinishedStories};
pub use xp::{detect_collective_ownership, detect_huge_stories, detect_test_later, file_edit_profiles, FileEditProfile};

pub mod names {
    pub const COLLECTIVE_CODE_OWNERSHIP: &str = "collective-code-ownership";
    pub const TEST_LATER_DEVELOPMENT: &str = "test-later-development";
    pub const HUGE_USER_STORIES: &str = "huge-user-stories";
    pub const ONE_STORY_MULTIPLE_BACKLOGS: &str = "one-story-multiple-backlogs";
    pub const DUPLICATES: &str = "duplicates";
    pub const AT_THE_LAST_MINUTE: &str = "at-the-last-minute";
    pub const NO_COMMITTING: &str = "no-committing";
    pub const DAILY_USER_STORY_AMOUNT: &str = "daily-user-story-amount";
    pub const FAST_PULL_REQUESTS: &str = "fast-pull-requests";

    /// Registration order.
    pub const ALL: [&str; 9] = [
        COLLECTIVE_CODE_OWNERSHIP,
        TEST_LATER_DEVELOPMENT,
        HUGE_USER_STORIES,
        ONE_STORY_MULTIPLE_BACKLOGS,
        DUPLICATES,
        AT_THE_LAST_MINUTE,
        NO_COMMITTING,
        DAILY_USER_STORY_AMOUNT,
        FAST_PULL_REQUESTS,
    ];

    /// Metrics whose score is 100 exactly when nothing was found.
    pub const MAX_FORM: [&str; 7] = [
        COLLECTIVE_CODE_OWNERSHIP,
        TEST_LATER_DEVELOPMENT,
        HUGE_USER_STORIES,
        ONE_STORY_MULTIPLE_BACKLOGS,
        DUPLICATES,
        AT_THE_LAST_MINUTE,
        FAST_PULL_REQUESTS,
    ];
}

const XP: &str = "XP practices";
const BACKLOG: &str = "Backlog maintenance";
const PRODUCTIVITY: &str = "Developer productivity";

#[allow(clippy::too_many_arguments)]
fn descriptor(
    name: &'static str,
    synopsis: &'static str,
    description: &'static str,
    sources: &[DataSource],
    category: &'static str,
    severity: Severity,
    effort: Effort,
    pitfalls: &'static str,
) -> MetricDescriptor {
    MetricDescriptor {
        name,
        synopsis,
        description,
        data_sources: sources.iter().copied().collect(),
        categories: BTreeSet::from([category]),
        effort,
        severity,
        pitfalls,
    }
}

pub(crate) fn standard_registry() -> MetricRegistry {
    use DataSource::*;
    use names::*;

    let entries: Vec<(MetricDescriptor, crate::engine::Detector)> = vec![
        (
            descriptor(
                COLLECTIVE_CODE_OWNERSHIP,
                "Code edited heavily by few developers.",
                "Any developer should be able to change any part of the code. A file that \
                 received many edits in a sprint from only a handful of authors concentrates \
                 knowledge in those people. Violation: a file with at least threshold_e edits \
                 by at most threshold_a distinct authors.",
                &[VersionControl],
                XP,
                Severity::Normal,
                Effort::Low,
                "Counts edits, not their size. Pair programming shows up as a single author. \
                 Generated or vendored files can dominate the count.",
            ),
            detect_collective_ownership,
        ),
        (
            descriptor(
                TEST_LATER_DEVELOPMENT,
                "Complexity rises while coverage falls.",
                "Test-first work keeps new code covered as it is written. A commit that adds \
                 complexity relative to its parent while coverage drops suggests tests were \
                 left for later. Merge commits and commits without stats are not judged.",
                &[VersionControl, CoverageStats],
                XP,
                Severity::Normal,
                Effort::Medium,
                "Only as good as the external coverage and complexity tooling. Refactorings \
                 that delete tested code can lower coverage legitimately.",
            ),
            detect_test_later,
        ),
        (
            descriptor(
                HUGE_USER_STORIES,
                "User stories that are unusually large.",
                "Stories should be small enough to estimate and finish within a sprint. A story \
                 whose text is far longer than the sprint average, or that carries many times \
                 the average number of task checkboxes, probably needs splitting.",
                &[StoryTracker],
                XP,
                Severity::Low,
                Effort::Low,
                "Text length is a proxy for size. Pasted logs or code blocks inflate it; a \
                 terse story can still hide a lot of work.",
            ),
            detect_huge_stories,
        ),
        (
            descriptor(
                ONE_STORY_MULTIPLE_BACKLOGS,
                "User stories carried across several sprint backlogs.",
                "A sprint backlog should hold what the team can finish in that sprint. Stories \
                 that keep getting carried over block planning and dependent teams. The score \
                 drops with the share of such stories and how many backlogs they were in.",
                &[StoryTracker],
                BACKLOG,
                Severity::High,
                Effort::Low,
                "Re-planning a story on purpose after a priority change also counts.",
            ),
            detect_multi_backlog,
        ),
        (
            descriptor(
                DUPLICATES,
                "User stories suspected to be duplicates.",
                "Stories should not describe overlapping functionality, or the same feature \
                 may be built twice. Counts stories carrying the configured duplicate label.",
                &[StoryTracker],
                BACKLOG,
                Severity::VeryLow,
                Effort::Low,
                "Depends entirely on people applying the label; unlabelled duplicates are \
                 invisible to it.",
            ),
            detect_duplicates,
        ),
        (
            descriptor(
                AT_THE_LAST_MINUTE,
                "Commits shortly before the sprint deadline.",
                "Work should proceed at a sustainable pace. Commits piling up right before the \
                 deadline leave no room for review or integration and make stand-ups less \
                 useful. Violation: a commit within the configured window before due_on.",
                &[VersionControl],
                PRODUCTIVITY,
                Severity::Normal,
                Effort::Low,
                "Author time can be rewritten by rebases. Commits pushed after the deadline \
                 fall outside the sprint and are not counted.",
            ),
            detect_last_minute,
        ),
        (
            descriptor(
                NO_COMMITTING,
                "Average number of commits per developer.",
                "Checking in early and often keeps changes small and lets teammates build on \
                 them. The score grows with the average commits per developer, capped at 100. \
                 Developers without a single commit in the sprint are listed for follow-up.",
                &[VersionControl],
                PRODUCTIVITY,
                Severity::Normal,
                Effort::Low,
                "More commits is not automatically better; tiny or broken commits also raise \
                 the average.",
            ),
            detect_no_committing,
        ),
        (
            descriptor(
                DAILY_USER_STORY_AMOUNT,
                "Developer-to-backlog load per sprint day.",
                "Relates the number of developers, the size of the sprint backlog and the \
                 sprint length. Loads away from the configured optimum score lower; the sprint \
                 is reported when the score drops below 100.",
                &[StoryTracker],
                PRODUCTIVITY,
                Severity::Low,
                Effort::Low,
                "Treats all stories as equally large. The optimum depends on team and \
                 technology and has to be tuned.",
            ),
            detect_daily_story_quota,
        ),
        (
            descriptor(
                FAST_PULL_REQUESTS,
                "Pull requests closed quickly without comments.",
                "Pull requests give teammates a chance to review and CI a chance to run. A \
                 request closed within the window without a single comment suggests neither \
                 happened.",
                &[PullRequests],
                PRODUCTIVITY,
                Severity::High,
                Effort::Low,
                "Reviews held in person or approvals without comments look identical to no \
                 review at all.",
            ),
            detect_fast_pulls,
        ),
    ];

    let mut registry = MetricRegistry::new();
    for (d, detector) in entries {
        registry.register(d, detector).expect("built-in names are unique");
    }
    registry
}

/// Starting point for a detector's result.
pub(crate) fn blank(metric: &str, slice: &SprintSlice<'_>) -> MetricResult {
    MetricResult {
        metric: metric.to_string(),
        team: slice.team.clone(),
        sprint: slice.sprint.id.clone(),
        violations: Vec::new(),
        score: None,
        inputs_echo: NumericDetail::new(),
        diagnostic: None,
    }
}

pub(crate) fn not_applicable(mut result: MetricResult, reason: &str) -> MetricResult {
    result.score = None;
    result.diagnostic = Some(format!("not applicable: {reason}"));
    result
}

pub(crate) fn finish(mut result: MetricResult, violations: Vec<Violation>, score: Score) -> MetricResult {
    result.violations = violations;
    result.score = Some(score);
    result
}

pub(crate) fn echo(result: &mut MetricResult, pairs: &[(&str, f64)]) {
    for (k, v) in pairs {
        result.inputs_echo.insert((*k).to_string(), *v);
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_holds_nine_unique_metrics_in_order() {
        let r = MetricRegistry::standard();
        let got: Vec<_> = r.iter().map(|m| m.descriptor.name).collect();
        assert_eq!(got, names::ALL.to_vec());
    }

    #[test]
    fn severities_and_effort() {
        let r = MetricRegistry::standard();
        let sev = |n| r.get(n).unwrap().descriptor.severity;
        assert_eq!(sev(names::COLLECTIVE_CODE_OWNERSHIP), Severity::Normal);
        assert_eq!(sev(names::HUGE_USER_STORIES), Severity::Low);
        assert_eq!(sev(names::ONE_STORY_MULTIPLE_BACKLOGS), Severity::High);
        assert_eq!(sev(names::DUPLICATES), Severity::VeryLow);
        assert_eq!(sev(names::DAILY_USER_STORY_AMOUNT), Severity::Low);
        assert_eq!(sev(names::FAST_PULL_REQUESTS), Severity::High);
        assert_eq!(r.get(names::TEST_LATER_DEVELOPMENT).unwrap().descriptor.effort, Effort::Medium);
    }

    #[test]
    fn duplicate_registration_rejected() {
        let mut r = standard_registry();
        let d = r.get(names::DUPLICATES).unwrap().clone();
        assert!(r.register(d.descriptor, d.detector).is_err());
    }
}
