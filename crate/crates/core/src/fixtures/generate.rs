use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::rng::{FixtureRng, RNG_NAME};
use super::{FixtureError, FixtureSpec};
use crate::catalog::names;
use crate::config::MetricConfig;
use crate::engine::run_all;
use crate::model::{
    build_history, BuildStats, Commit, FileChange, ProjectHistory, PullRequest, RawRecords, Sprint, SprintMembership,
    StoryState, TeamId, UserStory,
};
use crate::time::{Timestamp, SECONDS_PER_DAY};

pub(crate) const FIRST_SPRINT_START: &str = "2015-01-05T09:00:00Z";
pub(crate) const FIRST_PULL_NUMBER: u64 = 1000;
const MAX_FILES_PER_COMMIT: u64 = 3;
const CHECKBOXES_PER_STORY: usize = 3;

const MODULES: [&str; 6] = ["api", "core", "ui", "storage", "auth", "report"];
const VERBS: [&str; 8] = ["Add", "Fix", "Refactor", "Update", "Extend", "Clean up", "Rework", "Document"];
const NOUNS: [&str; 10] = [
    "login form", "search index", "export job", "settings page", "user list", "audit log", "cache layer",
    "payment flow", "notification mail", "dashboard chart",
];
const WORDS: [&str; 24] = [
    "as", "a", "user", "I", "want", "to", "see", "the", "current", "state", "of", "my", "orders", "so", "that",
    "can", "plan", "next", "steps", "without", "asking", "support", "team", "again",
];
const LABELS: [&str; 4] = ["feature", "backend", "frontend", "chore"];

/// A generated history together with its self-lint summary.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub history: ProjectHistory,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub evaluated: usize,
    pub not_applicable: usize,
    pub violations: usize,
    pub min_score: Option<f64>,
}

/// Self-lint of a generated history at the default config.
///
/// Every metric except the daily story quota is guaranteed clean. The quota
/// is clean only when developers / stories / sprint days hits the parabola's
/// vertex, which depends on the spec.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub rng: String,
    pub metrics: BTreeMap<String, CertificateEntry>,
}

impl Certificate {
    pub fn of(history: &ProjectHistory, config: &MetricConfig) -> Self {
        let mut metrics: BTreeMap<String, CertificateEntry> = BTreeMap::new();
        for r in run_all(history, config) {
            let e = metrics.entry(r.metric.clone()).or_default();
            e.evaluated += 1;
            e.violations += r.violations.len();
            match r.score {
                Some(s) => e.min_score = Some(e.min_score.map_or(s.value(), |m: f64| m.min(s.value()))),
                None => e.not_applicable += 1,
            }
        }
        Certificate { rng: RNG_NAME.to_string(), metrics }
    }

    pub fn violations(&self, metric: &str) -> usize {
        self.metrics.get(metric).map_or(0, |e| e.violations)
    }
}

pub(crate) fn first_sprint_start() -> Timestamp {
    Timestamp::parse(FIRST_SPRINT_START).expect("constant timestamp")
}

pub(crate) fn last_minute_seconds(config: &MetricConfig) -> i64 {
    (config.at_the_last_minute.window_minutes * 60.0).ceil() as i64
}

/// Interior of a sprint where generated activity goes: a minute after the
/// start up to a minute before the last-minute window opens.
pub(crate) fn interior(sprint: &Sprint, config: &MetricConfig) -> (i64, i64) {
    let lo = sprint.starts_at.unix() + 60;
    let hi = sprint.due_on.unix() - last_minute_seconds(config) - 60;
    (lo, hi)
}

pub(crate) fn sentence(rng: &mut FixtureRng, min_chars: usize) -> String {
    let mut out = String::new();
    while out.len() < min_chars {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(rng.pick(&WORDS));
    }
    out
}

/// A closed story of roughly 240 characters with three task-list items,
/// assigned to `sprint` at its start.
pub(crate) fn make_story(rng: &mut FixtureRng, number: u64, sprint: &Sprint, assignee: Option<&str>) -> UserStory {
    let title = format!("{} {}", rng.pick(&VERBS), rng.pick(&NOUNS));
    let prose_len = 150 + rng.below(30) as usize;
    let mut body = sentence(rng, prose_len);
    body.push_str("\n\n");
    for i in 0..CHECKBOXES_PER_STORY {
        let mark = if rng.below(2) == 0 { ' ' } else { 'x' };
        body.push_str(&format!("- [{mark}] step {}\n", i + 1));
    }
    let start = sprint.starts_at.unix();
    let due = sprint.due_on.unix();
    let closed = rng.between(start + (due - start) / 2, due - 1);
    UserStory {
        number,
        title,
        body,
        state: StoryState::Closed,
        labels: [rng.pick(&LABELS).to_string()].into_iter().collect(),
        sprint_memberships: vec![SprintMembership { sprint_id: sprint.id.clone(), assigned_at: sprint.starts_at }],
        assignees: assignee.map(|a| a.to_string()).into_iter().collect(),
        created_at: Timestamp::from_unix(start - SECONDS_PER_DAY),
        closed_at: Some(Timestamp::from_unix(closed)),
        team: sprint.team.clone(),
    }
}

pub(crate) fn fresh_id(rng: &mut FixtureRng, taken: &mut HashSet<String>) -> String {
    loop {
        let id = rng.hex_id();
        if taken.insert(id.clone()) {
            return id;
        }
    }
}

fn check_feasible(spec: &FixtureSpec, config: &MetricConfig, length_secs: i64) -> Result<(), FixtureError> {
    let ownership = &config.collective_code_ownership;
    if spec.teams == 0 || spec.sprints == 0 {
        return Ok(());
    }
    if spec.developers_per_team <= ownership.threshold_a {
        return Err(FixtureError::Infeasible(format!(
            "shared file ownership needs more than {} developers per team, spec has {}",
            ownership.threshold_a, spec.developers_per_team
        )));
    }
    if spec.commits_per_dev_per_sprint == 0 {
        return Err(FixtureError::Infeasible(
            "every developer needs at least one commit per sprint (commits_per_dev_per_sprint = 0)".into(),
        ));
    }
    if ownership.threshold_e < 2 {
        return Err(FixtureError::Infeasible("threshold_e below 2 makes every edited file a hot file".into()));
    }
    let needed = last_minute_seconds(config) + 3 * 60;
    if length_secs < needed {
        return Err(FixtureError::Infeasible(format!(
            "sprints of {length_secs} s leave no room before the {} minute last-minute window",
            config.at_the_last_minute.window_minutes
        )));
    }
    Ok(())
}

/// Builds a history that is clean at the default config, deterministically
/// from `spec.seed`.
pub fn generate(spec: &FixtureSpec) -> Result<Fixture, FixtureError> {
    spec.validate()?;
    let config = MetricConfig::default();
    let length_secs = (spec.sprint_length_days * SECONDS_PER_DAY as f64).round() as i64;
    check_feasible(spec, &config, length_secs)?;

    let mut rng = FixtureRng::new(spec.seed);
    let mut raw = RawRecords::default();
    let mut ids = HashSet::new();
    let epoch = first_sprint_start();
    let edit_cap = config.collective_code_ownership.threshold_e as usize - 1;
    let commits_per_sprint = (spec.developers_per_team * spec.commits_per_dev_per_sprint) as usize;
    let pool_size = (commits_per_sprint * MAX_FILES_PER_COMMIT as usize).div_ceil(edit_cap.max(1)) + MAX_FILES_PER_COMMIT as usize;
    let fast_pr = (config.fast_pull_requests.window_minutes * 60.0).ceil() as i64;

    for t in 1..=spec.teams {
        let team = TeamId(format!("team-{t}"));
        let devs: Vec<String> = (1..=spec.developers_per_team).map(|d| format!("dev{d}.t{t}@example.org")).collect();
        let files: Vec<String> = (0..pool_size).map(|i| format!("src/{}/unit_{i:03}.rs", MODULES[i % MODULES.len()])).collect();
        let mut coverage_tenths = 400 + rng.below(200);
        let mut complexity = 50 + rng.below(50);
        let mut parent: Option<String> = None;
        let mut story_number = 0u64;
        let mut pull_number = FIRST_PULL_NUMBER - 1;

        for s in 0..spec.sprints {
            let start = epoch.unix() + s as i64 * length_secs;
            let sprint = Sprint {
                id: format!("t{t}-s{:02}", s + 1).into(),
                title: format!("Sprint {}", s + 1),
                starts_at: Timestamp::from_unix(start),
                due_on: Timestamp::from_unix(start + length_secs),
                team: team.clone(),
            };
            let (lo, hi) = interior(&sprint, &config);

            let mut authors: Vec<&String> = devs
                .iter()
                .flat_map(|d| std::iter::repeat_n(d, spec.commits_per_dev_per_sprint as usize))
                .collect();
            rng.shuffle(&mut authors);
            let mut times: Vec<i64> = (0..authors.len()).map(|_| rng.between(lo, hi)).collect();
            times.sort_unstable();
            let mut edits = vec![0usize; files.len()];
            for (author, at) in authors.into_iter().zip(times) {
                let wanted = 1 + rng.below(MAX_FILES_PER_COMMIT) as usize;
                let mut chosen: Vec<usize> = Vec::with_capacity(wanted);
                for _ in 0..wanted {
                    let mut i = rng.index(files.len());
                    while edits[i] >= edit_cap || chosen.contains(&i) {
                        i = (i + 1) % files.len();
                    }
                    edits[i] += 1;
                    chosen.push(i);
                }
                chosen.sort_unstable();
                let id = fresh_id(&mut rng, &mut ids);
                raw.commits.push(Commit {
                    id: id.clone(),
                    author: author.clone(),
                    authored_at: Timestamp::from_unix(at),
                    parents: parent.take().into_iter().collect(),
                    message: format!("{} {}", rng.pick(&VERBS), rng.pick(&NOUNS)),
                    files: chosen
                        .iter()
                        .map(|&i| FileChange {
                            path: files[i].clone(),
                            lines_added: 1 + rng.below(40),
                            lines_deleted: rng.below(20),
                        })
                        .collect(),
                    team: team.clone(),
                });
                // Coverage and complexity never move in opposite directions.
                coverage_tenths = (coverage_tenths + rng.below(3)).min(1000);
                complexity += rng.below(4);
                raw.build_stats.push(BuildStats {
                    commit_id: id.clone(),
                    coverage_percent: coverage_tenths as f64 / 10.0,
                    complexity: complexity as f64,
                });
                parent = Some(id);
            }

            for _ in 0..spec.stories_per_sprint {
                story_number += 1;
                let assignee = (!devs.is_empty()).then(|| devs[(story_number as usize - 1) % devs.len()].as_str());
                raw.stories.push(make_story(&mut rng, story_number, &sprint, assignee));
            }

            for _ in 0..spec.pulls_per_sprint {
                pull_number += 1;
                let opened = rng.between(lo, hi);
                let open_for = (2 * 3600).max(fast_pr + 3600) + rng.below(6 * 3600) as i64;
                raw.pulls.push(PullRequest {
                    number: pull_number,
                    opened_at: Timestamp::from_unix(opened),
                    closed_at: Some(Timestamp::from_unix(opened + open_for)),
                    merged: true,
                    comment_count: 1 + rng.below(6),
                    team: team.clone(),
                });
            }
            raw.sprints.push(sprint);
        }
    }

    let history = build_history(raw)?;
    let certificate = Certificate::of(&history, &config);
    for (metric, entry) in &certificate.metrics {
        if metric != names::DAILY_USER_STORY_AMOUNT && entry.violations > 0 {
            return Err(FixtureError::GuaranteeBroken { metric: metric.clone(), violations: entry.violations });
        }
    }
    Ok(Fixture { history, certificate })
}

/// Developers of `team` with commits in the given window.
pub(crate) fn active_authors(raw: &RawRecords, team: &TeamId, sprint: &Sprint) -> BTreeSet<String> {
    raw.commits
        .iter()
        .filter(|c| &c.team == team && sprint.contains(c.authored_at))
        .map(|c| c.author.clone())
        .collect()
}
