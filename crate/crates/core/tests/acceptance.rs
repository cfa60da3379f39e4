//! Acceptance gate. Runs every criterion and prints one PASS/FAIL line each;
//! exits non-zero when any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sprintlint::catalog::names::{self, ALL};
use sprintlint::catalog::unfinished_stories;
use sprintlint::engine::rating::{capped_linear, cutoff_parabola, ratio_linear, threshold_linear};
use sprintlint::fixtures::{
    detected, generate, inject, unfinished_example, write_fixture, FixtureHeader, FixtureRng, FixtureSpec, HotFiles,
    HugeStories, InjectionSpec, NeverendingStories, UNFINISHED_EXAMPLE_SPRINT,
};
use sprintlint::ingest::IngestManifest;
use sprintlint::model::{
    window, BuildStats, Commit, FileChange, MetricResult, PullRequest, RawRecords, Score, Severity, Sprint,
    SprintMembership, StoryState, UserStory,
};
use sprintlint::report::{lint, LintOptions};
use sprintlint::scoring::{aggregate, score_all};
use sprintlint::time::Timestamp;
use sprintlint::{build_history, MetricConfig, MetricRegistry, ProjectHistory};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 unfinished-stories reproduction", unfinished_reproduction),
        ("2 score range", score_range),
        ("3 monotonicity", monotonicity),
        ("4 injection oracle", injection_oracle),
        ("5 rating spot values", rating_spot_values),
        ("6 aggregation", aggregation),
        ("7 end-to-end determinism and scale", end_to_end),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(note) => println!("PASS criterion {name}: {note}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn unfinished_reproduction() -> Outcome {
    let started = Instant::now();
    let history = build_history(unfinished_example()).map_err(|e| e.to_string())?;
    let now = history.latest_timestamp().ok_or("empty example")?;
    let row = unfinished_stories(&history, &UNFINISHED_EXAMPLE_SPRINT.into(), now)
        .map_err(|e| e.to_string())?
        .ok_or("sprint not past due")?;
    let elapsed = started.elapsed();
    ensure!(row.sprint_title == "Sprint 12", "title {}", row.sprint_title);
    ensure!(row.amount == 2, "amount {}", row.amount);
    ensure!(row.issues == [129, 135], "issues {:?}", row.issues);
    ensure!(row.total == 10, "total {}", row.total);
    ensure!(row.percent == Some(0.2), "percent {:?}", row.percent);
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("Amount 2, Issues [129, 135], Total 10, Percent 0.2 in {elapsed:?}"))
}

// Random histories: one team, three contiguous two-week sprints.

const DAY: i64 = 86_400;
const SPRINT: i64 = 14 * DAY;
const DEVS: [&str; 5] = ["ann@x.org", "bob@x.org", "cem@x.org", "dia@x.org", "eli@x.org"];
const PATHS: [&str; 6] = ["src/a.rs", "src/b.rs", "src/c.rs", "README.md", "tests/t.rs", "src/d.rs"];
const LABELS: [&str; 4] = ["feature", "bug", "Duplicate", "duplicate"];

fn ts(t: i64) -> Timestamp {
    Timestamp::from_unix(t)
}

fn random_story(rng: &mut FixtureRng, number: u64, sprints: &[Sprint]) -> UserStory {
    let words = rng.between(0, 60) as usize;
    let mut body: Vec<String> = (0..words).map(|i| format!("w{}", i * 7 % 13)).collect();
    for _ in 0..rng.between(0, 5) {
        body.push(if rng.below(2) == 0 { "\n- [ ] task".into() } else { "\n- [x] done".into() });
    }
    let mut labels = BTreeSet::new();
    for _ in 0..rng.between(0, 2) {
        labels.insert(rng.pick(&LABELS).to_string());
    }
    let mut memberships: Vec<SprintMembership> = sprints
        .iter()
        .filter(|_| rng.below(2) == 0)
        .map(|s| SprintMembership { sprint_id: s.id.clone(), assigned_at: s.starts_at })
        .collect();
    if memberships.is_empty() {
        let s = rng.pick(sprints);
        memberships.push(SprintMembership { sprint_id: s.id.clone(), assigned_at: s.starts_at });
    }
    let closed = rng.below(2) == 0;
    UserStory {
        number,
        title: format!("Story {number}"),
        body: body.join(" "),
        state: if closed { StoryState::Closed } else { StoryState::Open },
        labels,
        sprint_memberships: memberships,
        assignees: [rng.pick(&DEVS).to_string()].into_iter().collect(),
        created_at: ts(-SPRINT),
        closed_at: closed.then(|| ts(rng.between(0, 3 * SPRINT))),
        team: "A".into(),
    }
}

fn random_records(rng: &mut FixtureRng) -> RawRecords {
    let sprints: Vec<Sprint> = (0..3)
        .map(|i| Sprint {
            id: format!("s{i}").into(),
            title: format!("Sprint {i}"),
            starts_at: ts(i * SPRINT),
            due_on: ts((i + 1) * SPRINT),
            team: "A".into(),
        })
        .collect();
    let mut commits = Vec::new();
    let mut build_stats = Vec::new();
    for i in 0..rng.between(0, 40) {
        let id = format!("c{i:03}");
        let parents = match (i, rng.below(6)) {
            (0, _) | (_, 0) => vec![],
            (_, 1) if i > 1 => vec![format!("c{:03}", i - 1), format!("c{:03}", rng.between(0, i - 2))],
            _ => vec![format!("c{:03}", rng.between(0, i - 1))],
        };
        // Bias towards the deadline so the last-minute window gets hits.
        let t = if rng.below(4) == 0 {
            (rng.between(0, 2) + 1) * SPRINT - rng.between(0, 4 * 3600)
        } else {
            rng.between(-DAY, 3 * SPRINT + DAY)
        };
        let files = (0..rng.between(0, 3))
            .map(|_| FileChange { path: rng.pick(&PATHS).to_string(), lines_added: 1, lines_deleted: 0 })
            .collect();
        if rng.below(10) < 7 {
            build_stats.push(BuildStats {
                commit_id: id.clone(),
                coverage_percent: rng.between(0, 1000) as f64 / 10.0,
                complexity: rng.between(0, 30) as f64,
            });
        }
        commits.push(Commit {
            id,
            author: rng.pick(&DEVS).to_string(),
            authored_at: ts(t),
            parents,
            message: String::new(),
            files,
            team: "A".into(),
        });
    }
    let stories = (1..=rng.between(0, 14) as u64).map(|n| random_story(rng, n, &sprints)).collect();
    let pulls = (1..=rng.between(0, 10) as u64)
        .map(|number| {
            let opened = rng.between(0, 3 * SPRINT);
            let closed = (rng.below(5) != 0).then(|| opened + rng.between(0, 3 * 3600));
            PullRequest {
                number,
                opened_at: ts(opened),
                closed_at: closed.map(ts),
                merged: closed.is_some() && rng.below(2) == 0,
                comment_count: rng.between(0, 2) as u64,
                team: "A".into(),
            }
        })
        .collect();
    RawRecords { commits, stories, sprints, pulls, build_stats, roster: None }
}

fn random_config(rng: &mut FixtureRng) -> MetricConfig {
    let mut c = MetricConfig::default();
    let w = |rng: &mut FixtureRng, hi: i64| rng.between(0, hi * 10) as f64 / 10.0;
    c.collective_code_ownership.weight = w(rng, 60);
    c.collective_code_ownership.threshold_e = rng.between(1, 6) as u32;
    c.collective_code_ownership.threshold_a = rng.between(1, 3) as u32;
    c.test_later_development.weight = w(rng, 5);
    c.huge_user_stories.weight = w(rng, 60);
    c.huge_user_stories.threshold_length = rng.between(5, 40) as f64 / 10.0;
    c.huge_user_stories.threshold_check = rng.between(5, 40) as f64 / 10.0;
    c.one_story_multiple_backlogs.weight = w(rng, 5);
    c.one_story_multiple_backlogs.threshold_amount = rng.between(1, 2) as u32;
    c.duplicates.weight = w(rng, 5);
    c.at_the_last_minute.weight = w(rng, 5);
    c.at_the_last_minute.window_minutes = rng.between(1, 600) as f64;
    c.no_committing.weight = w(rng, 30);
    c.daily_user_story_amount.weight_a = w(rng, 400);
    c.daily_user_story_amount.weight_b = w(rng, 200);
    c.fast_pull_requests.window_minutes = rng.between(1, 240) as f64;
    c.validate().expect("random config is valid");
    c
}

/// Metrics whose empty violation list implies a perfect score.
const PERFECT_WHEN_CLEAN: [&str; 7] = [
    names::COLLECTIVE_CODE_OWNERSHIP,
    names::TEST_LATER_DEVELOPMENT,
    names::HUGE_USER_STORIES,
    names::ONE_STORY_MULTIPLE_BACKLOGS,
    names::DUPLICATES,
    names::AT_THE_LAST_MINUTE,
    names::FAST_PULL_REQUESTS,
];

fn run(history: &ProjectHistory, metric: &str, sprint: &str, config: &MetricConfig) -> MetricResult {
    let entry = MetricRegistry::standard().get(metric).expect("registered metric");
    let slice = window(history, &"A".into(), &sprint.into()).expect("known sprint");
    (entry.detector)(&slice, config)
}

fn score_range() -> Outcome {
    const INPUTS: u64 = 10_000;
    let mut rng = FixtureRng::new(0x5c0e);
    let mut evaluated: BTreeMap<&str, usize> = BTreeMap::new();
    let mut clean_perfect = 0usize;
    for case in 0..INPUTS {
        let history = build_history(random_records(&mut rng)).map_err(|e| format!("case {case}: {e}"))?;
        let config = random_config(&mut rng);
        let sprint = format!("s{}", rng.between(0, 2));
        for metric in ALL {
            let r = run(&history, metric, &sprint, &config);
            let Some(score) = r.score.map(Score::value) else { continue };
            *evaluated.entry(metric).or_default() += 1;
            ensure!((0.0..=100.0).contains(&score), "case {case}: {metric} scored {score}");
            if r.violations.is_empty() && PERFECT_WHEN_CLEAN.contains(&metric) {
                ensure!(score == 100.0, "case {case}: {metric} clean but scored {score}");
                clean_perfect += 1;
            }
        }
    }
    for metric in ALL {
        ensure!(evaluated.get(metric).copied().unwrap_or(0) > 1000, "{metric} rarely applicable: {evaluated:?}");
    }
    Ok(format!(
        "{INPUTS} inputs per metric, {} applicable scores in [0, 100], {clean_perfect} clean results at 100",
        evaluated.values().sum::<usize>()
    ))
}

/// Turns one clean artifact of the middle sprint into a violation while the
/// metric's denominator stays put. Returns `None` when no artifact fits.
fn add_violation(raw: &RawRecords, metric: &str, config: &MetricConfig, rng: &mut FixtureRng) -> Option<RawRecords> {
    let mut out = raw.clone();
    let (start, due) = (SPRINT, 2 * SPRINT);
    let in_sprint = |t: Timestamp| (start..=due).contains(&t.unix());
    let in_s1 = |s: &UserStory| s.sprint_memberships.iter().any(|m| m.sprint_id.0 == "s1");
    match metric {
        names::COLLECTIVE_CODE_OWNERSHIP => {
            let author = rng.pick(&DEVS).to_string();
            for i in 0..config.collective_code_ownership.threshold_e {
                out.commits.push(Commit {
                    id: format!("hot{i}"),
                    author: author.clone(),
                    authored_at: ts(start + DAY + i as i64),
                    parents: vec![],
                    message: String::new(),
                    files: vec![FileChange { path: "src/hot.rs".into(), lines_added: 1, lines_deleted: 0 }],
                    team: "A".into(),
                });
            }
        }
        names::TEST_LATER_DEVELOPMENT => {
            let stats: BTreeMap<&str, &BuildStats> = raw.build_stats.iter().map(|s| (s.commit_id.as_str(), s)).collect();
            // Commits another measured commit builds on would change two verdicts.
            let measured_parents: BTreeSet<&str> = raw
                .commits
                .iter()
                .filter(|c| stats.contains_key(c.id.as_str()))
                .filter_map(|c| match c.parents.as_slice() {
                    [p] => Some(p.as_str()),
                    _ => None,
                })
                .collect();
            let candidates: Vec<(String, BuildStats)> = raw
                .commits
                .iter()
                .filter(|c| in_sprint(c.authored_at) && !measured_parents.contains(c.id.as_str()))
                .filter_map(|c| match (c.parents.as_slice(), stats.get(c.id.as_str())) {
                    ([p], Some(own)) => stats.get(p.as_str()).map(|before| (c.id.clone(), own, *before)),
                    _ => None,
                })
                .filter(|(_, own, before)| {
                    !(own.complexity > before.complexity && own.coverage_percent < before.coverage_percent)
                        && before.coverage_percent > 0.0
                })
                .map(|(id, _, before)| {
                    let regressed = BuildStats {
                        commit_id: id.clone(),
                        coverage_percent: before.coverage_percent / 2.0,
                        complexity: before.complexity + 1.0,
                    };
                    (id, regressed)
                })
                .collect();
            if candidates.is_empty() {
                return None;
            }
            let (id, regressed) = rng.pick(&candidates).clone();
            *out.build_stats.iter_mut().find(|s| s.commit_id == id)? = regressed;
        }
        names::HUGE_USER_STORIES => {
            let idx: Vec<usize> = (0..out.stories.len()).filter(|&i| in_s1(&out.stories[i])).collect();
            if idx.is_empty() {
                return None;
            }
            let i = *rng.pick(&idx);
            out.stories[i].body.push_str(&" huge".repeat(rng.between(100, 2000) as usize));
        }
        names::ONE_STORY_MULTIPLE_BACKLOGS => {
            let limit = config.one_story_multiple_backlogs.threshold_amount as usize;
            let idx: Vec<usize> = (0..out.stories.len())
                .filter(|&i| {
                    let s = &out.stories[i];
                    let so_far = s.sprint_memberships.iter().filter(|m| m.sprint_id.0 != "s2").count();
                    in_s1(s) && so_far <= limit
                })
                .collect();
            if idx.is_empty() {
                return None;
            }
            let story = &mut out.stories[*rng.pick(&idx)];
            if story.sprint_memberships.iter().any(|m| m.sprint_id.0 == "s0") {
                return None;
            }
            story.sprint_memberships.insert(0, SprintMembership { sprint_id: "s0".into(), assigned_at: ts(0) });
            if story.sprint_memberships.iter().filter(|m| m.sprint_id.0 != "s2").count() <= limit {
                return None;
            }
        }
        names::DUPLICATES => {
            let idx: Vec<usize> = (0..out.stories.len())
                .filter(|&i| in_s1(&out.stories[i]) && !out.stories[i].has_label_ignore_case("duplicate"))
                .collect();
            if idx.is_empty() {
                return None;
            }
            out.stories[*rng.pick(&idx)].labels.insert("duplicate".into());
        }
        names::AT_THE_LAST_MINUTE => {
            let window = (config.at_the_last_minute.window_minutes * 60.0) as i64;
            let idx: Vec<usize> = (0..out.commits.len())
                .filter(|&i| {
                    let t = out.commits[i].authored_at.unix();
                    (start..due - window).contains(&t) && t > start
                })
                .collect();
            if idx.is_empty() {
                return None;
            }
            let c = &mut out.commits[*rng.pick(&idx)];
            c.authored_at = ts(due - rng.between(0, window));
        }
        names::FAST_PULL_REQUESTS => {
            let window = (config.fast_pull_requests.window_minutes * 60.0) as i64;
            let idx: Vec<usize> = (0..out.pulls.len())
                .filter(|&i| {
                    let p = &out.pulls[i];
                    in_sprint(p.opened_at)
                        && p.closed_at.is_some()
                        && !(p.comment_count == 0 && p.open_seconds().unwrap_or(i64::MAX) < window)
                })
                .collect();
            if idx.is_empty() {
                return None;
            }
            let p = &mut out.pulls[*rng.pick(&idx)];
            p.comment_count = 0;
            p.closed_at = Some(ts(p.opened_at.unix() + rng.between(0, window - 1)));
        }
        _ => unreachable!("no violation mutation for {metric}"),
    }
    Some(out)
}

/// Denominator the rating divides by, read from the echoed inputs.
fn total_of(r: &MetricResult) -> Option<f64> {
    let key = match r.metric.as_str() {
        names::TEST_LATER_DEVELOPMENT => "commits_with_stats",
        names::HUGE_USER_STORIES => "stories",
        names::ONE_STORY_MULTIPLE_BACKLOGS | names::DUPLICATES => "total_stories",
        names::AT_THE_LAST_MINUTE => "total_commits",
        names::FAST_PULL_REQUESTS => "total_pull_requests",
        _ => return None,
    };
    r.inputs_echo.get(key).copied()
}

fn monotonicity() -> Outcome {
    const PAIRS: usize = 1_000;
    let mut rng = FixtureRng::new(0x3040);
    for metric in PERFECT_WHEN_CLEAN {
        let (mut pairs, mut attempts) = (0usize, 0usize);
        while pairs < PAIRS {
            attempts += 1;
            ensure!(attempts < 100 * PAIRS, "{metric}: only {pairs} qualifying pairs in {attempts} attempts");
            let raw = random_records(&mut rng);
            let config = random_config(&mut rng);
            let Some(mutated) = add_violation(&raw, metric, &config, &mut rng) else { continue };
            let before = run(&build_history(raw).map_err(|e| e.to_string())?, metric, "s1", &config);
            let after = run(&build_history(mutated).map_err(|e| e.to_string())?, metric, "s1", &config);
            // A larger average can clear other huge stories; such pairs do not
            // add exactly one violation and are drawn again.
            if after.violations.len() != before.violations.len() + 1 || total_of(&before) != total_of(&after) {
                ensure!(metric == names::HUGE_USER_STORIES, "{metric}: mutation did not add exactly one violation");
                continue;
            }
            let (Some(b), Some(a)) = (before.score, after.score) else {
                return Err(format!("{metric}: not applicable in a qualifying pair"));
            };
            ensure!(a.value() <= b.value(), "{metric}: score rose from {} to {} after one more violation", b.value(), a.value());
            pairs += 1;
        }
    }

    let mut pairs = 0usize;
    while pairs < PAIRS {
        let raw = random_records(&mut rng);
        let config = random_config(&mut rng);
        let mut more = raw.clone();
        for i in 0..rng.between(1, 5) {
            more.commits.push(Commit {
                id: format!("extra{i}"),
                author: rng.pick(&DEVS).to_string(),
                authored_at: ts(rng.between(SPRINT, 2 * SPRINT)),
                parents: vec![],
                message: String::new(),
                files: vec![],
                team: "A".into(),
            });
        }
        // A fixed roster keeps the developer count equal across the pair.
        let roster: BTreeMap<_, BTreeSet<String>> =
            [("A".into(), DEVS.iter().map(|d| d.to_string()).collect())].into_iter().collect();
        let (mut raw, mut more) = (raw, more);
        raw.roster = Some(roster.clone());
        more.roster = Some(roster);
        let before = run(&build_history(raw).map_err(|e| e.to_string())?, names::NO_COMMITTING, "s1", &config);
        let after = run(&build_history(more).map_err(|e| e.to_string())?, names::NO_COMMITTING, "s1", &config);
        let (Some(b), Some(a)) = (before.score, after.score) else { return Err("no-committing not applicable".into()) };
        ensure!(a.value() >= b.value(), "no-committing fell from {} to {} after more commits", b.value(), a.value());
        pairs += 1;
    }
    Ok(format!("{PAIRS} qualifying pairs for each of the 7 violation-count metrics and for no-committing"))
}

fn directive(metric: &str, seed: u64) -> InjectionSpec {
    let n = 1 + (seed % 3) as u32;
    let mut spec = InjectionSpec::default();
    match metric {
        names::COLLECTIVE_CODE_OWNERSHIP => {
            spec.hot_files = Some(HotFiles { count: n, edits: 10 + (seed % 4) as u32, authors: 1 + (seed % 2) as u32 })
        }
        names::TEST_LATER_DEVELOPMENT => spec.tdd_regressions = n,
        names::HUGE_USER_STORIES => {
            spec.huge_stories = Some(HugeStories { count: n, length_multiplier: 8.0 + (seed % 5) as f64 })
        }
        names::ONE_STORY_MULTIPLE_BACKLOGS => {
            spec.neverending_stories = Some(NeverendingStories { count: n, sprints_each: 2 + (seed % 3) as u32 })
        }
        names::DUPLICATES => spec.duplicate_stories = n,
        names::AT_THE_LAST_MINUTE => spec.last_minute_commits = n,
        names::NO_COMMITTING => spec.idle_developers = n,
        names::DAILY_USER_STORY_AMOUNT => spec.overloaded_sprints = n,
        names::FAST_PULL_REQUESTS => spec.silent_fast_pulls = n,
        _ => unreachable!(),
    }
    spec
}

fn injection_oracle() -> Outcome {
    const SEEDS: u64 = 100;
    let config = MetricConfig::default();
    let mut planted = 0usize;
    for seed in 0..SEEDS {
        let base = generate(&FixtureSpec { seed, ..Default::default() }).map_err(|e| format!("seed {seed}: {e}"))?;
        for metric in ALL {
            let (history, ledger) =
                inject(&base.history, &directive(metric, seed), seed ^ 0x9e37).map_err(|e| format!("seed {seed} {metric}: {e}"))?;
            let expected = ledger.for_metric(metric);
            ensure!(!expected.is_empty(), "seed {seed}: empty ledger for {metric}");
            ensure!(
                detected(&history, metric, &config) == expected,
                "seed {seed}: {metric} artifacts differ from the ledger"
            );
            planted += expected.len();
            for r in sprintlint::run_all(&history, &config).iter().filter(|r| r.metric != metric) {
                ensure!(
                    r.score.map(Score::value) == Some(100.0),
                    "seed {seed}: injecting {metric} moved {} in {} to {:?}",
                    r.metric,
                    r.sprint,
                    r.score
                );
            }
        }
    }
    Ok(format!("{SEEDS} seeds x 9 metrics, {planted} planted artifacts matched, non-targets at 100"))
}

fn rating_spot_values() -> Outcome {
    let cases = [
        ("threshold_linear(5, 10)", threshold_linear(5.0, 10.0).value(), 50.0),
        ("ratio_linear(2, 10, 1, 3)", ratio_linear(2.0, 10.0, 1.0, 3.0).map_err(|e| e.to_string())?.value(), 40.0),
        ("capped_linear(6, 10)", capped_linear(6.0, 10.0).value(), 60.0),
        ("cutoff_parabola(0.5, 200, 100)", cutoff_parabola(0.5, 200.0, 100.0).value(), 75.0),
    ];
    for (what, got, want) in cases {
        ensure!(got == want, "{what} = {got}, expected {want}");
    }
    Ok("50, 40, 60, 75 exactly".into())
}

fn result(metric: &str, score: f64) -> MetricResult {
    MetricResult {
        metric: metric.into(),
        team: "A".into(),
        sprint: "s1".into(),
        violations: vec![],
        score: Some(Score::new(score).expect("in range")),
        inputs_echo: Default::default(),
        diagnostic: None,
    }
}

fn aggregation() -> Outcome {
    // High carries weight 8 and Low weight 2 by default.
    let results = [result(names::FAST_PULL_REQUESTS, 100.0), result(names::HUGE_USER_STORIES, 50.0)];
    let config = MetricConfig::default();
    ensure!(config.severity_weights[&Severity::High] == 8.0, "High weight is not 8");
    ensure!(config.severity_weights[&Severity::Low] == 2.0, "Low weight is not 2");
    let overall = aggregate(&"A".into(), &"s1".into(), &results, &config)
        .map_err(|e| e.to_string())?
        .overall
        .ok_or("no overall score")?
        .value();
    ensure!((overall - 90.0).abs() <= 1e-9, "overall {overall}, expected 90");

    let mut scaled = config.clone();
    scaled.severity_weights.values_mut().for_each(|w| *w *= 7.0);
    let mut rng = FixtureRng::new(0xa66);
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let history = if case % 2 == 0 {
            build_history(random_records(&mut rng)).map_err(|e| e.to_string())?
        } else {
            let base = generate(&FixtureSpec { seed: case, ..Default::default() }).map_err(|e| e.to_string())?;
            let metric = ALL[(case / 2 % 9) as usize];
            inject(&base.history, &directive(metric, case), case).map_err(|e| e.to_string())?.0
        };
        let cfg = random_config(&mut rng);
        let mut cfg7 = cfg.clone();
        cfg7.severity_weights = scaled.severity_weights.clone();
        let results = sprintlint::run_all(&history, &cfg);
        let a = score_all(&history, &results, &cfg).map_err(|e| e.to_string())?;
        let b = score_all(&history, &results, &cfg7).map_err(|e| e.to_string())?;
        for (x, y) in a.iter().zip(&b) {
            match (x.overall, y.overall) {
                (Some(x), Some(y)) => {
                    worst = worst.max((x.value() - y.value()).abs());
                    compared += 1;
                }
                (None, None) => {}
                _ => return Err(format!("case {case}: applicability changed under scaling")),
            }
        }
    }
    ensure!(worst <= 1e-9, "scaling weights by 7 moved an overall score by {worst}");
    Ok(format!("overall {overall}; x7 weights over {compared} team-sprints, max drift {worst:e}"))
}

fn end_to_end() -> Outcome {
    let spec = FixtureSpec {
        seed: 42,
        teams: 2,
        developers_per_team: 6,
        sprints: 6,
        sprint_length_days: 14.0,
        stories_per_sprint: 42,
        commits_per_dev_per_sprint: 139,
        pulls_per_sprint: 10,
    };
    let config = MetricConfig::default();
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    let mut sizes = (0, 0);
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let started = Instant::now();
        let fixture = generate(&spec).map_err(|e| e.to_string())?;
        write_fixture(dir.path(), &fixture.history, &FixtureHeader::new(&spec, &fixture.certificate), None)
            .map_err(|e| e.to_string())?;
        let history = IngestManifest::from_dir(dir.path()).ingest().map_err(|e| e.to_string())?;
        let report = lint(&history, &config, &LintOptions::default()).map_err(|e| e.to_string())?;
        let json = report.to_json();
        timings.push(started.elapsed());
        sizes = (history.commits().len(), history.stories().len());
        let direct = lint(&fixture.history, &config, &LintOptions::default()).map_err(|e| e.to_string())?.to_json();
        ensure!(direct == json, "report from ingested files differs from the in-memory report");
        reports.push(json);
    }
    ensure!(reports[0] == reports[1], "reports differ between runs");
    ensure!((9_000..=11_000).contains(&sizes.0), "{} commits", sizes.0);
    ensure!((450..=550).contains(&sizes.1), "{} stories", sizes.1);
    let slowest = timings.iter().max().copied().unwrap_or_default();
    ensure!(slowest < Duration::from_secs(5), "pipeline took {slowest:?}");
    Ok(format!(
        "{} commits, {} stories; generate, write, ingest, lint in {slowest:?}; {} byte report identical across runs",
        sizes.0,
        sizes.1,
        reports[0].len()
    ))
}
