use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::generate::{active_authors, fresh_id, interior, last_minute_seconds, make_story, sentence};
use super::rng::FixtureRng;
use super::{FixtureError, HotFiles, HugeStories, InjectionSpec, Ledger, NeverendingStories};
use crate::catalog::names;
use crate::config::MetricConfig;
use crate::model::{
    build_history, ArtifactRef, BuildStats, Commit, FileChange, ProjectHistory, PullRequest, RawRecords, Sprint,
    SprintId, SprintMembership, TeamId,
};
use crate::time::Timestamp;

/// Plants the requested violations and returns the exact artifacts each
/// detector must report at the default config.
///
/// Every directive touches only what its own metric looks at. Story
/// injections keep backlog sizes and developer counts fixed, because the
/// daily story quota depends on both.
pub fn inject(
    history: &ProjectHistory,
    injection: &InjectionSpec,
    seed: u64,
) -> Result<(ProjectHistory, Ledger), FixtureError> {
    if injection.is_empty() {
        return Ok((history.clone(), Ledger::default()));
    }
    let mut st = Injector::new(history, seed);
    st.idle_developers(injection.idle_developers)?;
    st.overloaded_sprints(injection.overloaded_sprints)?;
    if let Some(n) = injection.neverending_stories {
        st.neverending_stories(n)?;
    }
    if let Some(h) = injection.huge_stories {
        st.huge_stories(h)?;
    }
    st.duplicate_stories(injection.duplicate_stories)?;
    if let Some(h) = injection.hot_files {
        st.hot_files(h)?;
    }
    st.tdd_regressions(injection.tdd_regressions)?;
    st.last_minute_commits(injection.last_minute_commits)?;
    st.silent_fast_pulls(injection.silent_fast_pulls)?;
    st.finish()
}

fn infeasible(msg: impl Into<String>) -> FixtureError {
    FixtureError::Infeasible(msg.into())
}

struct Injector<'h> {
    base: &'h ProjectHistory,
    raw: RawRecords,
    rng: FixtureRng,
    config: MetricConfig,
    ids: HashSet<String>,
    used_stories: HashSet<(TeamId, u64)>,
    removed_stories: HashSet<(TeamId, u64)>,
    idle: BTreeMap<SprintId, BTreeSet<String>>,
    ledger: Ledger,
    paths: usize,
}

impl<'h> Injector<'h> {
    fn new(base: &'h ProjectHistory, seed: u64) -> Self {
        let raw = base.records().clone();
        let ids = raw.commits.iter().map(|c| c.id.clone()).collect();
        Injector {
            base,
            raw,
            rng: FixtureRng::new(seed),
            config: MetricConfig::default(),
            ids,
            used_stories: HashSet::new(),
            removed_stories: HashSet::new(),
            idle: BTreeMap::new(),
            ledger: Ledger::default(),
            paths: 0,
        }
    }

    fn sprints(&self) -> Vec<Sprint> {
        self.base.sprints().to_vec()
    }

    /// Sprints with room for generated activity before the last-minute window.
    fn roomy(&self, sprint: &Sprint) -> bool {
        let (lo, hi) = interior(sprint, &self.config);
        lo <= hi
    }

    fn pick_sprint(&mut self, candidates: Vec<Sprint>, what: &str) -> Result<Sprint, FixtureError> {
        if candidates.is_empty() {
            return Err(infeasible(format!("no sprint can take another {what}")));
        }
        Ok(candidates[self.rng.index(candidates.len())].clone())
    }

    fn backlog(&self, sprint: &SprintId) -> Vec<usize> {
        self.raw
            .stories
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_member_of(sprint) && !self.removed_stories.contains(&(s.team.clone(), s.number)))
            .map(|(i, _)| i)
            .collect()
    }

    /// Backlog stories no other directive has claimed, in a single backlog.
    fn free_stories(&self, sprint: &SprintId) -> Vec<usize> {
        self.backlog(sprint)
            .into_iter()
            .filter(|&i| {
                let s = &self.raw.stories[i];
                s.sprint_memberships.len() == 1 && !self.used_stories.contains(&(s.team.clone(), s.number))
            })
            .collect()
    }

    fn claim(&mut self, index: usize) {
        let s = &self.raw.stories[index];
        self.used_stories.insert((s.team.clone(), s.number));
    }

    fn active_devs(&self, sprint: &Sprint) -> Vec<String> {
        let idle = self.idle.get(&sprint.id);
        active_authors(&self.raw, &sprint.team, sprint)
            .into_iter()
            .filter(|d| idle.is_none_or(|i| !i.contains(d)))
            .collect()
    }

    fn fresh_path(&mut self, dir: &str) -> String {
        self.paths += 1;
        format!("src/{dir}/{dir}_{:03}.rs", self.paths)
    }

    /// Latest commit of the team at or before `at`, as a parent for new work.
    fn parent_for(&self, team: &TeamId, at: i64) -> Vec<String> {
        self.raw
            .commits
            .iter()
            .filter(|c| &c.team == team && c.authored_at.unix() <= at)
            .max_by(|a, b| (a.authored_at, &a.id).cmp(&(b.authored_at, &b.id)))
            .map(|c| vec![c.id.clone()])
            .unwrap_or_default()
    }

    fn push_commit(&mut self, sprint: &Sprint, author: String, at: i64, parents: Vec<String>, path: String, message: &str) -> String {
        let id = fresh_id(&mut self.rng, &mut self.ids);
        self.raw.commits.push(Commit {
            id: id.clone(),
            author,
            authored_at: Timestamp::from_unix(at),
            parents,
            message: message.to_string(),
            files: vec![FileChange { path, lines_added: 1 + self.rng.below(30), lines_deleted: self.rng.below(10) }],
            team: sprint.team.clone(),
        });
        id
    }

    fn idle_developers(&mut self, count: u32) -> Result<(), FixtureError> {
        for _ in 0..count {
            let candidates: Vec<Sprint> = self.sprints().into_iter().filter(|s| self.active_devs(s).len() >= 2).collect();
            let sprint = self.pick_sprint(candidates, "idle developer")?;
            let active = self.active_devs(&sprint);
            let dev = active[self.rng.index(active.len())].clone();
            let others: Vec<String> = active.into_iter().filter(|d| d != &dev).collect();
            let mut next = 0;
            for c in self.raw.commits.iter_mut() {
                if c.team == sprint.team && sprint.contains(c.authored_at) && c.author == dev {
                    c.author = others[next % others.len()].clone();
                    next += 1;
                }
            }
            self.idle.entry(sprint.id.clone()).or_default().insert(dev.clone());
            self.ledger.record(names::NO_COMMITTING, &sprint.team, &sprint.id, ArtifactRef::Developer(dev));
        }
        Ok(())
    }

    fn at_optimal_quota(&self, sprint: &Sprint) -> bool {
        let backlog = self.backlog(&sprint.id).len();
        if backlog == 0 {
            return false;
        }
        let cfg = &self.config.daily_user_story_amount;
        if cfg.weight_b <= 0.0 {
            return false;
        }
        let devs = self.base.developers(&sprint.team).len() as f64;
        let quota = devs / backlog as f64 / sprint.length_days();
        (quota - cfg.weight_a / (2.0 * cfg.weight_b)).abs() <= 1e-9
    }

    /// Doubles a sprint backlog that sits at the optimal quota.
    fn overloaded_sprints(&mut self, count: u32) -> Result<(), FixtureError> {
        let mut done: HashSet<SprintId> = HashSet::new();
        for _ in 0..count {
            let candidates: Vec<Sprint> = self
                .sprints()
                .into_iter()
                .filter(|s| !done.contains(&s.id) && self.at_optimal_quota(s))
                .collect();
            let sprint = self.pick_sprint(candidates, "overload (needs a backlog at the optimal quota)")?;
            let extra = self.backlog(&sprint.id).len();
            let devs: Vec<&String> = self.base.developers(&sprint.team).iter().collect();
            let mut number = self.raw.stories.iter().filter(|s| s.team == sprint.team).map(|s| s.number).max().unwrap_or(0);
            for k in 0..extra {
                number += 1;
                let assignee = (!devs.is_empty()).then(|| devs[k % devs.len()].as_str());
                let story = make_story(&mut self.rng, number, &sprint, assignee);
                self.raw.stories.push(story);
            }
            done.insert(sprint.id.clone());
            let id = sprint.id.0.clone();
            self.ledger.record(names::DAILY_USER_STORY_AMOUNT, &sprint.team, &sprint.id, ArtifactRef::Sprint(id));
        }
        Ok(())
    }

    /// A story carried through `sprints_each` consecutive backlogs. Each
    /// later backlog gives up one filler story so its size stays the same.
    fn neverending_stories(&mut self, spec: NeverendingStories) -> Result<(), FixtureError> {
        let threshold = self.config.one_story_multiple_backlogs.threshold_amount;
        if spec.count > 0 && spec.sprints_each <= threshold {
            return Err(infeasible(format!(
                "neverending stories need more than {threshold} sprints each, got {}",
                spec.sprints_each
            )));
        }
        let k = spec.sprints_each as usize;
        for _ in 0..spec.count {
            let mut runs: Vec<Vec<Sprint>> = Vec::new();
            for team in self.base.teams() {
                let team_sprints: Vec<Sprint> = self.base.sprints_of(team).cloned().collect();
                for run in team_sprints.windows(k) {
                    if run.iter().all(|s| !self.free_stories(&s.id).is_empty()) {
                        runs.push(run.to_vec());
                    }
                }
            }
            if runs.is_empty() {
                return Err(infeasible(format!("no {k} consecutive sprints with unclaimed stories")));
            }
            let run = runs[self.rng.index(runs.len())].clone();
            let first = self.free_stories(&run[0].id);
            let carried = first[self.rng.index(first.len())];
            self.claim(carried);
            for (j, sprint) in run.iter().enumerate().skip(1) {
                let fillers = self.free_stories(&sprint.id);
                let filler = fillers[self.rng.index(fillers.len())];
                self.claim(filler);
                let f = &self.raw.stories[filler];
                self.removed_stories.insert((f.team.clone(), f.number));

                let story = &mut self.raw.stories[carried];
                story.sprint_memberships.push(SprintMembership { sprint_id: sprint.id.clone(), assigned_at: sprint.starts_at });
                if j + 1 > threshold as usize {
                    let number = story.number;
                    self.ledger.record(names::ONE_STORY_MULTIPLE_BACKLOGS, &sprint.team, &sprint.id, ArtifactRef::Story(number));
                }
            }
            let last = run.last().expect("k >= 2");
            let story = &mut self.raw.stories[carried];
            if story.closed_at.is_some() {
                story.closed_at = Some(Timestamp::from_unix(last.due_on.unix() - 3600));
            }
        }
        Ok(())
    }

    fn huge_stories(&mut self, spec: HugeStories) -> Result<(), FixtureError> {
        if spec.count > 0 && !(spec.length_multiplier.is_finite() && spec.length_multiplier > 1.0) {
            return Err(infeasible("huge stories need a length_multiplier above 1"));
        }
        let cfg = self.config.huge_user_stories.clone();
        let mut done: HashSet<SprintId> = HashSet::new();
        for _ in 0..spec.count {
            let candidates: Vec<Sprint> = self
                .sprints()
                .into_iter()
                .filter(|s| !done.contains(&s.id) && !self.free_stories(&s.id).is_empty())
                .collect();
            let sprint = self.pick_sprint(candidates, "huge story")?;
            let free = self.free_stories(&sprint.id);
            let target = free[self.rng.index(free.len())];
            self.claim(target);

            let wanted = (self.raw.stories[target].length() as f64 * spec.length_multiplier).ceil() as usize;
            while self.raw.stories[target].length() < wanted {
                let more = sentence(&mut self.rng, 120);
                let story = &mut self.raw.stories[target];
                story.body.push_str("\n\n");
                story.body.push_str(&more);
            }

            let backlog = self.backlog(&sprint.id);
            let n = backlog.len() as f64;
            let lengths: Vec<f64> = backlog.iter().map(|&i| self.raw.stories[i].length() as f64).collect();
            let checks: Vec<f64> = backlog.iter().map(|&i| self.raw.stories[i].checkboxes() as f64).collect();
            let length_limit = cfg.threshold_length * lengths.iter().sum::<f64>() / n;
            let avg_checks = checks.iter().sum::<f64>() / n;
            let check_limit = cfg.threshold_check * avg_checks;
            for (pos, &i) in backlog.iter().enumerate() {
                let flagged = lengths[pos] > length_limit || (avg_checks > 0.0 && checks[pos] > check_limit);
                if flagged != (i == target) {
                    let number = self.raw.stories[target].number;
                    return Err(infeasible(format!(
                        "story #{number} cannot be made the only huge story of {} with multiplier {}",
                        sprint.id, spec.length_multiplier
                    )));
                }
            }
            done.insert(sprint.id.clone());
            let number = self.raw.stories[target].number;
            self.ledger.record(names::HUGE_USER_STORIES, &sprint.team, &sprint.id, ArtifactRef::Story(number));
        }
        Ok(())
    }

    fn duplicate_stories(&mut self, count: u32) -> Result<(), FixtureError> {
        let label = self.config.duplicates.duplicate_label.clone();
        for _ in 0..count {
            let candidates: Vec<Sprint> =
                self.sprints().into_iter().filter(|s| !self.free_stories(&s.id).is_empty()).collect();
            let sprint = self.pick_sprint(candidates, "duplicate story")?;
            let free = self.free_stories(&sprint.id);
            let target = free[self.rng.index(free.len())];
            self.claim(target);
            let story = &mut self.raw.stories[target];
            story.labels.insert(label.clone());
            let number = story.number;
            self.ledger.record(names::DUPLICATES, &sprint.team, &sprint.id, ArtifactRef::Story(number));
        }
        Ok(())
    }

    fn hot_files(&mut self, spec: HotFiles) -> Result<(), FixtureError> {
        let cfg = &self.config.collective_code_ownership;
        if spec.count > 0
            && (spec.edits < cfg.threshold_e
                || spec.authors == 0
                || spec.authors > cfg.threshold_a
                || spec.authors > spec.edits)
        {
            return Err(infeasible(format!(
                "hot files need at least {} edits by 1..={} authors, got {} edits by {}",
                cfg.threshold_e, cfg.threshold_a, spec.edits, spec.authors
            )));
        }
        for _ in 0..spec.count {
            let candidates: Vec<Sprint> = self
                .sprints()
                .into_iter()
                .filter(|s| self.roomy(s) && self.active_devs(s).len() >= spec.authors as usize)
                .collect();
            let sprint = self.pick_sprint(candidates, "hot file")?;
            let mut authors = self.active_devs(&sprint);
            self.rng.shuffle(&mut authors);
            authors.truncate(spec.authors as usize);
            let path = self.fresh_path("hot");
            let (lo, hi) = interior(&sprint, &self.config);
            for i in 0..spec.edits as usize {
                let at = self.rng.between(lo, hi);
                let parents = self.parent_for(&sprint.team, at);
                self.push_commit(&sprint, authors[i % authors.len()].clone(), at, parents, path.clone(), "Tweak hot path");
            }
            self.ledger.record(names::COLLECTIVE_CODE_OWNERSHIP, &sprint.team, &sprint.id, ArtifactRef::File(path));
        }
        Ok(())
    }

    /// A new child of a measured commit that adds complexity and loses
    /// coverage.
    fn tdd_regressions(&mut self, count: u32) -> Result<(), FixtureError> {
        for _ in 0..count {
            let mut candidates: Vec<(Sprint, Vec<usize>)> = Vec::new();
            for s in self.sprints() {
                if !self.roomy(&s) || self.active_devs(&s).is_empty() {
                    continue;
                }
                let (_, hi) = interior(&s, &self.config);
                let parents: Vec<usize> = self
                    .raw
                    .commits
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.team == s.team && s.contains(c.authored_at) && c.authored_at.unix() <= hi)
                    .filter(|(_, c)| self.base.stats_for(&c.id).is_some_and(|st| st.coverage_percent >= 0.1))
                    .map(|(i, _)| i)
                    .collect();
                if !parents.is_empty() {
                    candidates.push((s, parents));
                }
            }
            if candidates.is_empty() {
                return Err(infeasible("no sprint has a measured commit to regress from"));
            }
            let (sprint, parents) = candidates[self.rng.index(candidates.len())].clone();
            let parent = self.raw.commits[parents[self.rng.index(parents.len())]].clone();
            let before = self.base.stats_for(&parent.id).expect("filtered on stats").clone();
            let (lo, hi) = interior(&sprint, &self.config);
            let at = self.rng.between(lo.max(parent.authored_at.unix()), hi);
            let active = self.active_devs(&sprint);
            let author = active[self.rng.index(active.len())].clone();
            let path = self.fresh_path("patch");
            let id = self.push_commit(&sprint, author, at, vec![parent.id.clone()], path, "Add feature without tests");
            let drop = (1 + self.rng.below(5)) as f64;
            let coverage = ((before.coverage_percent * 10.0).floor() - drop).max(0.0) / 10.0;
            let complexity = before.complexity + 1.0 + self.rng.below(5) as f64;
            self.raw.build_stats.push(BuildStats { commit_id: id.clone(), coverage_percent: coverage, complexity });
            self.ledger.record(names::TEST_LATER_DEVELOPMENT, &sprint.team, &sprint.id, ArtifactRef::Commit(id));
        }
        Ok(())
    }

    fn last_minute_commits(&mut self, count: u32) -> Result<(), FixtureError> {
        let window = last_minute_seconds(&self.config);
        for _ in 0..count {
            let candidates: Vec<Sprint> = self
                .sprints()
                .into_iter()
                .filter(|s| self.roomy(s) && !self.active_devs(s).is_empty())
                .collect();
            let sprint = self.pick_sprint(candidates, "last-minute commit")?;
            let due = sprint.due_on.unix();
            let at = self.rng.between(due - window, due - 1);
            let active = self.active_devs(&sprint);
            let author = active[self.rng.index(active.len())].clone();
            let parents = self.parent_for(&sprint.team, at);
            let path = self.fresh_path("late");
            let id = self.push_commit(&sprint, author, at, parents, path, "Finish before the deadline");
            self.ledger.record(names::AT_THE_LAST_MINUTE, &sprint.team, &sprint.id, ArtifactRef::Commit(id));
        }
        Ok(())
    }

    fn silent_fast_pulls(&mut self, count: u32) -> Result<(), FixtureError> {
        let window = (self.config.fast_pull_requests.window_minutes * 60.0).ceil() as i64;
        for _ in 0..count {
            let candidates: Vec<Sprint> = self.sprints().into_iter().filter(|s| self.roomy(s)).collect();
            let sprint = self.pick_sprint(candidates, "fast pull request")?;
            let (lo, hi) = interior(&sprint, &self.config);
            let opened = self.rng.between(lo, hi);
            let open_for = self.rng.between(60.min(window - 1), window - 1);
            let number = self
                .raw
                .pulls
                .iter()
                .filter(|p| p.team == sprint.team)
                .map(|p| p.number + 1)
                .max()
                .unwrap_or(super::generate::FIRST_PULL_NUMBER);
            self.raw.pulls.push(PullRequest {
                number,
                opened_at: Timestamp::from_unix(opened),
                closed_at: Some(Timestamp::from_unix(opened + open_for)),
                merged: true,
                comment_count: 0,
                team: sprint.team.clone(),
            });
            self.ledger.record(names::FAST_PULL_REQUESTS, &sprint.team, &sprint.id, ArtifactRef::Pull(number));
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(ProjectHistory, Ledger), FixtureError> {
        let removed = std::mem::take(&mut self.removed_stories);
        self.raw.stories.retain(|s| !removed.contains(&(s.team.clone(), s.number)));
        let history = build_history(self.raw)?;
        for (sprint_id, devs) in &self.idle {
            let team = &history.sprint(sprint_id).expect("sprint kept").team;
            for dev in devs {
                if !history.developers(team).contains(dev) {
                    return Err(infeasible(format!("{dev} has no activity left once idle in {sprint_id}")));
                }
            }
        }
        Ok((history, self.ledger))
    }
}
