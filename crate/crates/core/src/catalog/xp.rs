use std::collections::{BTreeMap, BTreeSet};

use super::names::{COLLECTIVE_CODE_OWNERSHIP, HUGE_USER_STORIES, TEST_LATER_DEVELOPMENT};
use super::{blank, echo, finish, not_applicable};
use crate::config::MetricConfig;
use crate::engine::rating::{ratio_linear, threshold_linear};
use crate::model::{ArtifactRef, MetricResult, SprintSlice, Violation};

/// Edit activity on one file within a slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileEditProfile {
    pub path: String,
    /// Commits touching the file.
    pub edits: usize,
    pub authors: BTreeSet<String>,
}

/// Per-file edit counts and author sets, ordered by path.
pub fn file_edit_profiles(slice: &SprintSlice<'_>) -> Vec<FileEditProfile> {
    let mut by_path: BTreeMap<&str, FileEditProfile> = BTreeMap::new();
    for commit in &slice.commits {
        let touched: BTreeSet<&str> = commit.files.iter().map(|f| f.path.as_str()).collect();
        for path in touched {
            let p = by_path.entry(path).or_insert_with(|| FileEditProfile {
                path: path.to_string(),
                edits: 0,
                authors: BTreeSet::new(),
            });
            p.edits += 1;
            p.authors.insert(commit.author.clone());
        }
    }
    by_path.into_values().collect()
}

pub fn detect_collective_ownership(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.collective_code_ownership;
    let mut result = blank(COLLECTIVE_CODE_OWNERSHIP, slice);
    let profiles = file_edit_profiles(slice);
    let violations: Vec<Violation> = profiles
        .iter()
        .filter(|p| p.edits >= cfg.threshold_e as usize && p.authors.len() <= cfg.threshold_a as usize)
        .map(|p| {
            let who: Vec<&str> = p.authors.iter().map(|a| a.as_str()).collect();
            Violation::new(
                COLLECTIVE_CODE_OWNERSHIP,
                slice.team,
                &slice.sprint.id,
                vec![ArtifactRef::File(p.path.clone())],
                format!("{} edited {} times by only {}", p.path, p.edits, who.join(", ")),
            )
            .with_number("edits", p.edits as f64)
            .with_number("authors", p.authors.len() as f64)
        })
        .collect();
    let score = threshold_linear(violations.len() as f64, cfg.weight);
    echo(
        &mut result,
        &[
            ("violations", violations.len() as f64),
            ("files", profiles.len() as f64),
            ("threshold_e", cfg.threshold_e as f64),
            ("threshold_a", cfg.threshold_a as f64),
            ("weight", cfg.weight),
        ],
    );
    finish(result, violations, score)
}

pub fn detect_test_later(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let weight = config.test_later_development.weight;
    let history = slice.history;
    let mut result = blank(TEST_LATER_DEVELOPMENT, slice);

    let mut with_stats = 0usize;
    let mut violations = Vec::new();
    for commit in &slice.commits {
        let Some(own) = history.stats_for(&commit.id) else { continue };
        with_stats += 1;
        let [parent] = commit.parents.as_slice() else { continue };
        let Some(before) = history.stats_for(parent) else { continue };
        if own.complexity > before.complexity && own.coverage_percent < before.coverage_percent {
            violations.push(
                Violation::new(
                    TEST_LATER_DEVELOPMENT,
                    slice.team,
                    &slice.sprint.id,
                    vec![ArtifactRef::Commit(commit.id.clone())],
                    format!(
                        "complexity {} -> {}, coverage {}% -> {}%",
                        before.complexity, own.complexity, before.coverage_percent, own.coverage_percent
                    ),
                )
                .with_number("complexity_delta", own.complexity - before.complexity)
                .with_number("coverage_delta", own.coverage_percent - before.coverage_percent),
            );
        }
    }
    echo(
        &mut result,
        &[("violations", violations.len() as f64), ("commits_with_stats", with_stats as f64), ("weight", weight)],
    );
    match ratio_linear(violations.len() as f64, with_stats as f64, weight, 1.0) {
        Ok(score) => finish(result, violations, score),
        Err(_) => not_applicable(result, "no commit in the sprint has build stats"),
    }
}

pub fn detect_huge_stories(slice: &SprintSlice<'_>, config: &MetricConfig) -> MetricResult {
    let cfg = &config.huge_user_stories;
    let mut result = blank(HUGE_USER_STORIES, slice);
    if slice.stories.is_empty() {
        return not_applicable(result, "sprint backlog is empty");
    }
    let measured: Vec<(u64, f64, f64)> = slice
        .stories
        .iter()
        .map(|s| (s.number, s.length() as f64, s.checkboxes() as f64))
        .collect();
    let n = measured.len() as f64;
    let avg_length = measured.iter().map(|m| m.1).sum::<f64>() / n;
    let avg_checkboxes = measured.iter().map(|m| m.2).sum::<f64>() / n;
    let length_limit = cfg.threshold_length * avg_length;
    let checkbox_limit = cfg.threshold_check * avg_checkboxes;

    let violations: Vec<Violation> = measured
        .iter()
        .filter(|(_, len, checks)| *len > length_limit || (avg_checkboxes > 0.0 && *checks > checkbox_limit))
        .map(|&(number, len, checks)| {
            Violation::new(
                HUGE_USER_STORIES,
                slice.team,
                &slice.sprint.id,
                vec![ArtifactRef::Story(number)],
                format!(
                    "story #{number}: {len} characters (limit {length_limit:.1}), {checks} checkboxes (limit {checkbox_limit:.1})"
                ),
            )
            .with_number("length", len)
            .with_number("checkboxes", checks)
        })
        .collect();
    let score = threshold_linear(violations.len() as f64, cfg.weight);
    echo(
        &mut result,
        &[
            ("violations", violations.len() as f64),
            ("stories", n),
            ("avg_length", avg_length),
            ("avg_checkboxes", avg_checkboxes),
            ("threshold_length", cfg.threshold_length),
            ("threshold_check", cfg.threshold_check),
            ("weight", cfg.weight),
        ],
    );
    finish(result, violations, score)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::testutil::*;
    use crate::model::{BuildStats, RawRecords};

    fn ownership_history(authors: &[&str], edits: usize) -> crate::model::ProjectHistory {
        let commits = (0..edits)
            .map(|i| commit(&format!("c{i}"), authors[i % authors.len()], 100 + i as i64, &["src/core.rs"]))
            .collect();
        history(RawRecords { sprints: vec![sprint("s1", 0, DAY)], commits, ..Default::default() })
    }

    fn ownership_config() -> MetricConfig {
        let mut c = MetricConfig::default();
        c.collective_code_ownership.threshold_e = 10;
        c.collective_code_ownership.threshold_a = 2;
        c.collective_code_ownership.weight = 20.0;
        c
    }

    #[test]
    fn ownership_no_commits_is_perfect() {
        let h = history(RawRecords { sprints: vec![sprint("s1", 0, DAY)], ..Default::default() });
        let r = detect_collective_ownership(&slice(&h, "s1"), &MetricConfig::default());
        assert_eq!(r.score.unwrap().value(), 100.0);
    }

    #[test]
    fn ownership_single_author_hot_file() {
        let h = ownership_history(&["ann@x"], 12);
        let r = detect_collective_ownership(&slice(&h, "s1"), &ownership_config());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].artifacts, vec![ArtifactRef::File("src/core.rs".into())]);
        assert_eq!(r.score.unwrap().value(), 80.0);
    }

    #[test]
    fn ownership_three_authors_is_fine() {
        let h = ownership_history(&["ann@x", "bob@x", "cy@x"], 12);
        let r = detect_collective_ownership(&slice(&h, "s1"), &ownership_config());
        assert!(r.violations.is_empty());
        assert_eq!(r.score.unwrap().value(), 100.0);
    }

    #[test]
    fn ownership_counts_a_commit_once_per_file() {
        let mut c = commit("c0", "ann@x", 10, &["a.rs", "a.rs"]);
        c.files[1].lines_added = 7;
        let h = history(RawRecords { sprints: vec![sprint("s1", 0, DAY)], commits: vec![c], ..Default::default() });
        let profiles = file_edit_profiles(&slice(&h, "s1"));
        assert_eq!(profiles[0].edits, 1);
    }

    fn stats(id: &str, coverage: f64, complexity: f64) -> BuildStats {
        BuildStats { commit_id: id.into(), coverage_percent: coverage, complexity }
    }

    /// Chain of 8 commits; `worse` lists indices that raise complexity and drop coverage.
    fn chain(worse: &[usize]) -> crate::model::ProjectHistory {
        let mut commits = Vec::new();
        let mut build_stats = Vec::new();
        let (mut cov, mut cx) = (80.0, 10.0);
        for i in 0..8 {
            let mut c = commit(&format!("c{i}"), "ann@x", 100 + i as i64, &["a.rs"]);
            if i > 0 {
                c.parents = vec![format!("c{}", i - 1)];
            }
            if worse.contains(&i) {
                cov -= 5.0;
                cx += 3.0;
            } else {
                cov += 1.0;
            }
            commits.push(c);
            build_stats.push(stats(&format!("c{i}"), cov, cx));
        }
        history(RawRecords { sprints: vec![sprint("s1", 0, DAY)], commits, build_stats, ..Default::default() })
    }

    #[test]
    fn test_later_two_of_eight() {
        let h = chain(&[3, 6]);
        let mut cfg = MetricConfig::default();
        cfg.test_later_development.weight = 2.0;
        let r = detect_test_later(&slice(&h, "s1"), &cfg);
        let ids: Vec<_> = r.artifacts().cloned().collect();
        assert_eq!(ids, vec![ArtifactRef::Commit("c3".into()), ArtifactRef::Commit("c6".into())]);
        assert_eq!(r.score.unwrap().value(), 50.0);
        assert_eq!(r.inputs_echo["commits_with_stats"], 8.0);
    }

    #[test]
    fn test_later_equal_complexity_is_not_a_violation() {
        let mut a = commit("a", "ann@x", 10, &["x"]);
        let mut b = commit("b", "ann@x", 20, &["x"]);
        a.parents = vec![];
        b.parents = vec!["a".into()];
        let h = history(RawRecords {
            sprints: vec![sprint("s1", 0, DAY)],
            commits: vec![a, b],
            build_stats: vec![stats("a", 90.0, 5.0), stats("b", 70.0, 5.0)],
            ..Default::default()
        });
        let r = detect_test_later(&slice(&h, "s1"), &MetricConfig::default());
        assert!(r.violations.is_empty());
    }

    #[test]
    fn test_later_skips_merges() {
        let a = commit("a", "ann@x", 10, &["x"]);
        let b = commit("b", "bob@x", 11, &["y"]);
        let mut m = commit("m", "ann@x", 20, &["x"]);
        m.parents = vec!["a".into(), "b".into()];
        let h = history(RawRecords {
            sprints: vec![sprint("s1", 0, DAY)],
            commits: vec![a, b, m],
            build_stats: vec![stats("a", 90.0, 5.0), stats("b", 90.0, 5.0), stats("m", 10.0, 50.0)],
            ..Default::default()
        });
        let r = detect_test_later(&slice(&h, "s1"), &MetricConfig::default());
        assert!(r.violations.is_empty());
        assert_eq!(r.score.unwrap().value(), 100.0);
    }

    #[test]
    fn test_later_without_stats_is_not_applicable() {
        let h = history(RawRecords {
            sprints: vec![sprint("s1", 0, DAY)],
            commits: vec![commit("a", "ann@x", 10, &["x"])],
            ..Default::default()
        });
        let r = detect_test_later(&slice(&h, "s1"), &MetricConfig::default());
        assert!(r.score.is_none());
        assert!(r.diagnostic.unwrap().contains("not applicable"));
    }

    fn stories_history(lengths: &[usize]) -> crate::model::ProjectHistory {
        let stories = lengths.iter().enumerate().map(|(i, &l)| story(i as u64 + 1, l, &["s1"])).collect();
        history(RawRecords { sprints: vec![sprint("s1", 0, DAY)], stories, ..Default::default() })
    }

    #[test]
    fn huge_uniform_lengths_give_no_violation() {
        let h = stories_history(&[120, 120, 120, 120]);
        let r = detect_huge_stories(&slice(&h, "s1"), &MetricConfig::default());
        assert!(r.violations.is_empty());
        assert_eq!(r.score.unwrap().value(), 100.0);
    }

    #[test]
    fn huge_self_inclusion_keeps_700_below_limit() {
        let h = stories_history(&[100, 100, 100, 700]);
        let r = detect_huge_stories(&slice(&h, "s1"), &MetricConfig::default());
        assert_eq!(r.inputs_echo["avg_length"], 250.0);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn huge_1300_exceeds_three_times_average() {
        let h = stories_history(&[100, 100, 100, 1300]);
        let r = detect_huge_stories(&slice(&h, "s1"), &MetricConfig::default());
        assert_eq!(r.inputs_echo["avg_length"], 400.0);
        assert_eq!(r.artifacts().cloned().collect::<Vec<_>>(), vec![ArtifactRef::Story(4)]);
        assert_eq!(r.score.unwrap().value(), 75.0);
    }

    #[test]
    fn huge_by_checkboxes() {
        let mut stories: Vec<_> = (1..=6).map(|n| story(n, 0, &["s1"])).collect();
        for s in stories.iter_mut() {
            s.body = "- [ ] one\n".to_string();
        }
        stories[5].body = "- [ ] t\n".repeat(20);
        let h = history(RawRecords { sprints: vec![sprint("s1", 0, DAY)], stories, ..Default::default() });
        let mut cfg = MetricConfig::default();
        // length branch out of the way
        cfg.huge_user_stories.threshold_length = 100.0;
        let r = detect_huge_stories(&slice(&h, "s1"), &cfg);
        assert_eq!(r.artifacts().cloned().collect::<Vec<_>>(), vec![ArtifactRef::Story(6)]);
    }

    #[test]
    fn huge_empty_backlog_not_applicable() {
        let h = stories_history(&[]);
        assert!(detect_huge_stories(&slice(&h, "s1"), &MetricConfig::default()).score.is_none());
    }
}
