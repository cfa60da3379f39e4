//! Run reports: every result of a lint run plus scores, in canonical JSON
//! or as Markdown for people.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::catalog::{unfinished_stories, UnfinishedStories};
use crate::config::MetricConfig;
use crate::engine::{run_all, MetricRegistry};
use crate::model::{MetricResult, NumericDetail, ProjectHistory, Severity, SprintId, TeamId, Violation};
use crate::scoring::{score_all, Contribution, ScoringError, SkippedMetric};
use crate::time::Timestamp;

pub const TOOL_NAME: &str = "sprintlint";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReportError {
    #[error("no sprint titled '{0}'")]
    UnknownSprint(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Which sprints to report and the reference time for deadline checks.
#[derive(Debug, Clone, Default)]
pub struct LintOptions {
    /// Sprint title; `None` reports every sprint.
    pub sprint_title: Option<String>,
    /// Defaults to the latest timestamp in the history.
    pub now: Option<Timestamp>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedResult {
    pub metric: String,
    /// Rounded to one decimal; `None` when not applicable.
    pub score: Option<f64>,
    pub violations: Vec<Violation>,
    pub inputs_echo: NumericDetail,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl From<MetricResult> for ReportedResult {
    fn from(r: MetricResult) -> Self {
        ReportedResult {
            metric: r.metric,
            score: r.score.map(|s| s.rounded()),
            violations: r.violations,
            inputs_echo: r.inputs_echo,
            diagnostic: r.diagnostic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SprintReport {
    pub team: TeamId,
    pub sprint: SprintId,
    pub title: String,
    pub starts_at: Timestamp,
    pub due_on: Timestamp,
    /// Rounded to one decimal; `None` when no weighted metric applies.
    pub overall: Option<f64>,
    pub contributions: Vec<Contribution>,
    pub skipped: Vec<SkippedMetric>,
    pub results: Vec<ReportedResult>,
    /// Present once the sprint is past due.
    pub unfinished_stories: Option<UnfinishedStories>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub config_digest: String,
    pub config: MetricConfig,
    pub now: Option<Timestamp>,
    pub sprints: Vec<SprintReport>,
    pub diagnostics: Vec<String>,
}

/// Runs every enabled metric and builds the report.
pub fn lint(history: &ProjectHistory, config: &MetricConfig, options: &LintOptions) -> Result<RunReport, ReportError> {
    let selected: Vec<_> = history
        .sprints()
        .iter()
        .filter(|s| options.sprint_title.as_ref().is_none_or(|t| &s.title == t))
        .collect();
    if let Some(title) = &options.sprint_title {
        if selected.is_empty() {
            return Err(ReportError::UnknownSprint(title.clone()));
        }
    }
    let now = options.now.or_else(|| history.latest_timestamp());
    let results = run_all(history, config);
    let scores = score_all(history, &results, config)?;

    let mut sprints = Vec::with_capacity(selected.len());
    for sprint in selected {
        let score = scores
            .iter()
            .find(|s| s.team == sprint.team && s.sprint == sprint.id)
            .expect("one score per sprint")
            .clone();
        let sprint_results: Vec<ReportedResult> = results
            .iter()
            .filter(|r| r.team == sprint.team && r.sprint == sprint.id)
            .cloned()
            .map(ReportedResult::from)
            .collect();
        let unfinished = match now {
            Some(now) => unfinished_stories(history, &sprint.id, now).expect("sprint from history"),
            None => None,
        };
        sprints.push(SprintReport {
            team: sprint.team.clone(),
            sprint: sprint.id.clone(),
            title: sprint.title.clone(),
            starts_at: sprint.starts_at,
            due_on: sprint.due_on,
            overall: score.overall.map(|s| s.rounded()),
            contributions: score.contributions,
            skipped: score.skipped,
            results: sprint_results,
            unfinished_stories: unfinished,
        });
    }

    let mut diagnostics: Vec<String> = history
        .shallow_parents()
        .iter()
        .map(|p| format!("commit {} references parent {} outside the export", p.commit, p.missing_parent))
        .collect();
    if history.sprints().is_empty() {
        diagnostics.push("history has no sprints; nothing to evaluate".into());
    }

    Ok(RunReport {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_digest: config.digest(),
        config: config.clone(),
        now,
        sprints,
        diagnostics,
    })
}

impl RunReport {
    /// Pretty JSON with object keys sorted at every level.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    /// Lowest overall score over the reported sprints.
    pub fn min_overall(&self) -> Option<f64> {
        self.sprints.iter().filter_map(|s| s.overall).reduce(f64::min)
    }

    pub fn to_markdown(&self) -> String {
        let registry = MetricRegistry::standard();
        let mut out = String::new();
        let _ = writeln!(out, "# Sprint conformance report\n");
        let _ = writeln!(out, "- tool: {} {}", self.tool, self.version);
        let _ = writeln!(out, "- config: `{}`", self.config_digest);
        if let Some(now) = self.now {
            let _ = writeln!(out, "- evaluated at: {now}");
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "- note: {d}");
        }

        for s in &self.sprints {
            let _ = writeln!(out, "\n## {} / {} (`{}`, due {})\n", s.team, s.title, s.sprint, s.due_on);
            let _ = writeln!(out, "Overall score: {}\n", fmt_score(s.overall));
            let _ = writeln!(out, "| Metric | Severity | Score | Violations |");
            let _ = writeln!(out, "|---|---|---|---|");
            for r in &s.results {
                let severity = s
                    .contributions
                    .iter()
                    .find(|c| c.metric == r.metric)
                    .map(|c| c.severity)
                    .or_else(|| registry.get(&r.metric).map(|m| m.descriptor.severity))
                    .unwrap_or(Severity::Informational);
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} |",
                    r.metric,
                    severity.as_str(),
                    fmt_score(r.score),
                    r.violations.len()
                );
            }
            for r in s.results.iter().filter(|r| !r.violations.is_empty()) {
                let _ = writeln!(out, "\n### {}\n", r.metric);
                for v in &r.violations {
                    let refs: Vec<String> = v.artifacts.iter().map(|a| a.to_string()).collect();
                    let _ = writeln!(out, "- {}: {}", refs.join(", "), v.detail);
                }
                if let Some(m) = registry.get(&r.metric) {
                    let _ = writeln!(out, "\n*Does not measure:* {}", m.descriptor.pitfalls);
                }
            }
            for r in s.results.iter().filter(|r| r.score.is_none()) {
                if let Some(d) = &r.diagnostic {
                    let _ = writeln!(out, "\n- {}: {d}", r.metric);
                }
            }
            if let Some(u) = &s.unfinished_stories {
                let percent = u.percent.map_or("n/a".to_string(), |p| format!("{:.1}%", p * 100.0));
                let issues: Vec<String> = u.issues.iter().map(|n| format!("#{n}")).collect();
                let _ = writeln!(
                    out,
                    "\n### Unfinished stories\n\n{} of {} stories still open ({percent}){}{}",
                    u.amount,
                    u.total,
                    if issues.is_empty() { "" } else { ": " },
                    issues.join(", ")
                );
            }
        }
        out
    }
}

fn fmt_score(score: Option<f64>) -> String {
    score.map_or("n/a".to_string(), |s| format!("{s:.1}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{generate, inject, unfinished_example, FixtureSpec, InjectionSpec};
    use crate::model::build_history;

    #[test]
    fn clean_fixture_scores_100() {
        let h = generate(&FixtureSpec::default()).unwrap().history;
        let report = lint(&h, &MetricConfig::default(), &LintOptions::default()).unwrap();
        assert_eq!(report.sprints.len(), 8);
        assert!(report.sprints.iter().all(|s| s.overall == Some(100.0)));
        assert_eq!(report.min_overall(), Some(100.0));
    }

    #[test]
    fn json_is_canonical_and_stable() {
        let h = generate(&FixtureSpec::default()).unwrap().history;
        let a = lint(&h, &MetricConfig::default(), &LintOptions::default()).unwrap().to_json();
        let b = lint(&h, &MetricConfig::default(), &LintOptions::default()).unwrap().to_json();
        assert_eq!(a, b);
        let value: serde_json::Value = serde_json::from_str(&a).unwrap();
        let keys: Vec<&String> = value.as_object().unwrap().keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(value["config_digest"].as_str().unwrap().starts_with("sha256:"));
    }

    #[test]
    fn sprint_filter() {
        let h = generate(&FixtureSpec::default()).unwrap().history;
        let opts = LintOptions { sprint_title: Some("Sprint 2".into()), now: None };
        let report = lint(&h, &MetricConfig::default(), &opts).unwrap();
        assert_eq!(report.sprints.len(), 2);
        let missing = LintOptions { sprint_title: Some("Sprint 99".into()), now: None };
        assert_eq!(lint(&h, &MetricConfig::default(), &missing), Err(ReportError::UnknownSprint("Sprint 99".into())));
    }

    #[test]
    fn unfinished_block() {
        let h = build_history(unfinished_example()).unwrap();
        let report = lint(&h, &MetricConfig::default(), &LintOptions::default()).unwrap();
        let s12 = report.sprints.iter().find(|s| s.title == "Sprint 12").unwrap();
        assert_eq!(s12.unfinished_stories.as_ref().unwrap().percent, Some(0.2));
        let json = report.to_json();
        assert!(json.contains("\"percent\": 0.2"));
        assert!(report.to_markdown().contains("2 of 10 stories still open (20.0%): #129, #135"));
    }

    #[test]
    fn markdown_lists_violations_and_pitfalls() {
        let h = generate(&FixtureSpec::default()).unwrap().history;
        let (h, ledger) = inject(&h, &InjectionSpec { silent_fast_pulls: 1, ..Default::default() }, 2).unwrap();
        let report = lint(&h, &MetricConfig::default(), &LintOptions::default()).unwrap();
        assert!(report.min_overall().unwrap() < 100.0);
        let md = report.to_markdown();
        let entry = ledger.for_metric("fast-pull-requests").into_iter().next().unwrap();
        assert!(md.contains(&entry.artifact.to_string()));
        assert!(md.contains("*Does not measure:*"));
    }
}
