use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{BuildStats, Commit, PullRequest, Sprint, SprintId, StoryState, TeamId, UserStory};

/// Unvalidated record collections, as produced by ingestion or fixtures.
///
/// This is also the serialized form of a [`ProjectHistory`] snapshot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawRecords {
    #[serde(default)]
    pub commits: Vec<Commit>,
    #[serde(default)]
    pub stories: Vec<UserStory>,
    #[serde(default)]
    pub sprints: Vec<Sprint>,
    #[serde(default)]
    pub pulls: Vec<PullRequest>,
    #[serde(default)]
    pub build_stats: Vec<BuildStats>,
    /// Explicit developer roster per team; replaces the derived set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roster: Option<BTreeMap<TeamId, BTreeSet<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HistoryError {
    #[error("invalid {record}: {reason}")]
    InvalidRecord { record: String, reason: String },
    #[error("duplicate {kind} key '{key}'")]
    Duplicate { kind: &'static str, key: String },
    #[error("{record} references unknown {target} '{key}'")]
    DanglingReference {
        record: String,
        target: &'static str,
        key: String,
    },
}

/// A commit whose parent is not part of the export (shallow history).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShallowParent {
    pub commit: String,
    pub missing_parent: String,
}

/// Validated, immutable snapshot of all development data.
///
/// Collections are stored in a canonical order so that the input record
/// order never influences anything derived from the history.
#[derive(Debug, Clone)]
pub struct ProjectHistory {
    records: RawRecords,
    teams: BTreeSet<TeamId>,
    developers: BTreeMap<TeamId, BTreeSet<String>>,
    shallow: Vec<ShallowParent>,
    commit_index: HashMap<String, usize>,
    sprint_index: HashMap<SprintId, usize>,
    stats_index: HashMap<String, usize>,
    team_commits: HashMap<TeamId, Vec<usize>>,
    team_pulls: HashMap<TeamId, Vec<usize>>,
    sprint_stories: HashMap<SprintId, Vec<usize>>,
    team_sprints: HashMap<TeamId, Vec<usize>>,
}

impl PartialEq for ProjectHistory {
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.developers == other.developers
    }
}

impl Serialize for ProjectHistory {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProjectHistory {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawRecords::deserialize(deserializer)?;
        build_history(raw).map_err(serde::de::Error::custom)
    }
}

fn invalid(record: String, reason: impl Into<String>) -> HistoryError {
    HistoryError::InvalidRecord {
        record,
        reason: reason.into(),
    }
}

fn check_commit(c: &Commit) -> Result<(), HistoryError> {
    let name = || format!("commit '{}'", c.id);
    if c.id.trim().is_empty() {
        return Err(invalid("commit".into(), "empty id"));
    }
    if c.author.trim().is_empty() {
        return Err(invalid(name(), "empty author"));
    }
    if c.team.0.trim().is_empty() {
        return Err(invalid(name(), "empty team"));
    }
    if let Some(f) = c.files.iter().find(|f| f.path.is_empty()) {
        return Err(invalid(name(), format!("file change with empty path ({} added)", f.lines_added)));
    }
    Ok(())
}

fn check_story(s: &UserStory) -> Result<(), HistoryError> {
    let name = || format!("story #{} of team '{}'", s.number, s.team);
    if s.number == 0 {
        return Err(invalid(name(), "story number must be positive"));
    }
    match (s.state, s.closed_at) {
        (StoryState::Closed, None) => return Err(invalid(name(), "closed story without closed_at")),
        (StoryState::Open, Some(_)) => return Err(invalid(name(), "open story with closed_at")),
        _ => {}
    }
    let mut seen = HashSet::new();
    for m in &s.sprint_memberships {
        if !seen.insert(&m.sprint_id) {
            return Err(invalid(name(), format!("sprint '{}' listed twice in milestone history", m.sprint_id)));
        }
    }
    Ok(())
}

fn check_sprint(s: &Sprint) -> Result<(), HistoryError> {
    if s.id.0.trim().is_empty() {
        return Err(invalid("sprint".into(), "empty id"));
    }
    if s.starts_at >= s.due_on {
        return Err(invalid(format!("sprint '{}'", s.id), "starts_at must precede due_on"));
    }
    Ok(())
}

fn check_pull(p: &PullRequest) -> Result<(), HistoryError> {
    let name = || format!("pull request #{} of team '{}'", p.number, p.team);
    if p.number == 0 {
        return Err(invalid(name(), "number must be positive"));
    }
    match p.closed_at {
        Some(c) if c < p.opened_at => Err(invalid(name(), "closed before it was opened")),
        None if p.merged => Err(invalid(name(), "merged without closed_at")),
        _ => Ok(()),
    }
}

pub(crate) fn check_stats(s: &BuildStats) -> Result<(), HistoryError> {
    let name = || format!("build stats for commit '{}'", s.commit_id);
    if !(s.coverage_percent.is_finite() && (0.0..=100.0).contains(&s.coverage_percent)) {
        return Err(invalid(name(), format!("coverage {} outside [0, 100]", s.coverage_percent)));
    }
    if !(s.complexity.is_finite() && s.complexity >= 0.0) {
        return Err(invalid(name(), format!("complexity {} must be a non-negative number", s.complexity)));
    }
    Ok(())
}

/// Validates raw records and builds the immutable history.
///
/// Developers per team are the distinct commit authors plus story
/// assignees, unless an explicit roster is given for that team.
pub fn build_history(mut raw: RawRecords) -> Result<ProjectHistory, HistoryError> {
    for c in &mut raw.commits {
        c.author = c.author.trim().to_lowercase();
        check_commit(c)?;
    }
    for s in &mut raw.stories {
        s.assignees = s.assignees.iter().map(|a| a.trim().to_lowercase()).collect();
        check_story(s)?;
    }
    for s in &raw.sprints {
        check_sprint(s)?;
    }
    for p in &raw.pulls {
        check_pull(p)?;
    }
    for s in &raw.build_stats {
        check_stats(s)?;
    }

    raw.commits.sort_by(|a, b| (a.authored_at, &a.id).cmp(&(b.authored_at, &b.id)));
    raw.sprints.sort_by(|a, b| {
        (&a.team, a.due_on, a.starts_at, &a.id).cmp(&(&b.team, b.due_on, b.starts_at, &b.id))
    });
    raw.stories.sort_by(|a, b| (&a.team, a.number).cmp(&(&b.team, b.number)));
    raw.pulls.sort_by(|a, b| (&a.team, a.number).cmp(&(&b.team, b.number)));
    raw.build_stats.sort_by(|a, b| a.commit_id.cmp(&b.commit_id));

    let mut commit_index = HashMap::with_capacity(raw.commits.len());
    for (i, c) in raw.commits.iter().enumerate() {
        if commit_index.insert(c.id.clone(), i).is_some() {
            return Err(HistoryError::Duplicate { kind: "commit", key: c.id.clone() });
        }
    }
    let mut sprint_index = HashMap::with_capacity(raw.sprints.len());
    for (i, s) in raw.sprints.iter().enumerate() {
        if sprint_index.insert(s.id.clone(), i).is_some() {
            return Err(HistoryError::Duplicate { kind: "sprint", key: s.id.0.clone() });
        }
    }
    for pair in raw.stories.windows(2) {
        if pair[0].team == pair[1].team && pair[0].number == pair[1].number {
            return Err(HistoryError::Duplicate {
                kind: "story",
                key: format!("{}#{}", pair[0].team, pair[0].number),
            });
        }
    }
    for pair in raw.pulls.windows(2) {
        if pair[0].team == pair[1].team && pair[0].number == pair[1].number {
            return Err(HistoryError::Duplicate {
                kind: "pull request",
                key: format!("{}#{}", pair[0].team, pair[0].number),
            });
        }
    }
    let mut stats_index = HashMap::with_capacity(raw.build_stats.len());
    for (i, s) in raw.build_stats.iter().enumerate() {
        if stats_index.insert(s.commit_id.clone(), i).is_some() {
            return Err(HistoryError::Duplicate { kind: "build stats", key: s.commit_id.clone() });
        }
        if !commit_index.contains_key(&s.commit_id) {
            return Err(HistoryError::DanglingReference {
                record: format!("build stats row for '{}'", s.commit_id),
                target: "commit",
                key: s.commit_id.clone(),
            });
        }
    }

    let mut sprint_stories: HashMap<SprintId, Vec<usize>> = HashMap::new();
    for (i, story) in raw.stories.iter().enumerate() {
        for m in &story.sprint_memberships {
            let Some(&si) = sprint_index.get(&m.sprint_id) else {
                return Err(HistoryError::DanglingReference {
                    record: format!("story #{} of team '{}'", story.number, story.team),
                    target: "sprint",
                    key: m.sprint_id.0.clone(),
                });
            };
            if raw.sprints[si].team != story.team {
                return Err(invalid(
                    format!("story #{} of team '{}'", story.number, story.team),
                    format!("assigned to sprint '{}' of team '{}'", m.sprint_id, raw.sprints[si].team),
                ));
            }
            sprint_stories.entry(m.sprint_id.clone()).or_default().push(i);
        }
    }

    let mut shallow = Vec::new();
    for c in &raw.commits {
        for p in &c.parents {
            if !commit_index.contains_key(p) {
                shallow.push(ShallowParent { commit: c.id.clone(), missing_parent: p.clone() });
            }
        }
    }

    let mut teams = BTreeSet::new();
    let mut developers: BTreeMap<TeamId, BTreeSet<String>> = BTreeMap::new();
    let mut team_commits: HashMap<TeamId, Vec<usize>> = HashMap::new();
    for (i, c) in raw.commits.iter().enumerate() {
        teams.insert(c.team.clone());
        developers.entry(c.team.clone()).or_default().insert(c.author.clone());
        team_commits.entry(c.team.clone()).or_default().push(i);
    }
    for s in &raw.stories {
        teams.insert(s.team.clone());
        let devs = developers.entry(s.team.clone()).or_default();
        devs.extend(s.assignees.iter().cloned());
    }
    let mut team_sprints: HashMap<TeamId, Vec<usize>> = HashMap::new();
    for (i, s) in raw.sprints.iter().enumerate() {
        teams.insert(s.team.clone());
        team_sprints.entry(s.team.clone()).or_default().push(i);
    }
    let mut team_pulls: HashMap<TeamId, Vec<usize>> = HashMap::new();
    for (i, p) in raw.pulls.iter().enumerate() {
        teams.insert(p.team.clone());
        team_pulls.entry(p.team.clone()).or_default().push(i);
    }
    for pulls in team_pulls.values_mut() {
        pulls.sort_by_key(|&i| (raw.pulls[i].opened_at, raw.pulls[i].number));
    }
    if let Some(roster) = &raw.roster {
        for (team, devs) in roster {
            teams.insert(team.clone());
            developers.insert(team.clone(), devs.iter().map(|d| d.trim().to_lowercase()).collect());
        }
    }
    for team in &teams {
        developers.entry(team.clone()).or_default();
    }

    Ok(ProjectHistory {
        records: raw,
        teams,
        developers,
        shallow,
        commit_index,
        sprint_index,
        stats_index,
        team_commits,
        team_pulls,
        sprint_stories,
        team_sprints,
    })
}

impl ProjectHistory {
    pub fn empty() -> Self {
        build_history(RawRecords::default()).expect("empty history is valid")
    }

    pub fn teams(&self) -> &BTreeSet<TeamId> {
        &self.teams
    }

    pub fn developers(&self, team: &TeamId) -> &BTreeSet<String> {
        static NONE: BTreeSet<String> = BTreeSet::new();
        self.developers.get(team).unwrap_or(&NONE)
    }

    pub fn developer_map(&self) -> &BTreeMap<TeamId, BTreeSet<String>> {
        &self.developers
    }

    pub fn commits(&self) -> &[Commit] {
        &self.records.commits
    }

    pub fn stories(&self) -> &[UserStory] {
        &self.records.stories
    }

    pub fn sprints(&self) -> &[Sprint] {
        &self.records.sprints
    }

    pub fn pulls(&self) -> &[PullRequest] {
        &self.records.pulls
    }

    pub fn build_stats(&self) -> &[BuildStats] {
        &self.records.build_stats
    }

    pub fn records(&self) -> &RawRecords {
        &self.records
    }

    pub fn into_records(self) -> RawRecords {
        self.records
    }

    pub fn shallow_parents(&self) -> &[ShallowParent] {
        &self.shallow
    }

    pub fn commit(&self, id: &str) -> Option<&Commit> {
        self.commit_index.get(id).map(|&i| &self.records.commits[i])
    }

    pub fn sprint(&self, id: &SprintId) -> Option<&Sprint> {
        self.sprint_index.get(id).map(|&i| &self.records.sprints[i])
    }

    pub fn stats_for(&self, commit_id: &str) -> Option<&BuildStats> {
        self.stats_index.get(commit_id).map(|&i| &self.records.build_stats[i])
    }

    /// Sprints of a team ordered by due date.
    pub fn sprints_of<'a>(&'a self, team: &TeamId) -> impl Iterator<Item = &'a Sprint> + 'a {
        self.team_sprints
            .get(team)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.records.sprints[i])
    }

    /// Stories whose membership history contains the sprint.
    pub fn backlog_of<'a>(&'a self, sprint: &SprintId) -> impl Iterator<Item = &'a UserStory> + 'a {
        self.sprint_stories
            .get(sprint)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&i| &self.records.stories[i])
    }

    /// Commits of a team, ordered by author time.
    pub(crate) fn team_commits(&self, team: &TeamId) -> &[usize] {
        self.team_commits.get(team).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Pull requests of a team, ordered by opening time.
    pub(crate) fn team_pulls(&self, team: &TeamId) -> &[usize] {
        self.team_pulls.get(team).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Latest timestamp anywhere in the data; `None` for an empty history.
    pub fn latest_timestamp(&self) -> Option<crate::time::Timestamp> {
        let r = &self.records;
        r.commits
            .iter()
            .map(|c| c.authored_at)
            .chain(r.sprints.iter().map(|s| s.due_on))
            .chain(r.stories.iter().flat_map(|s| std::iter::once(s.created_at).chain(s.closed_at)))
            .chain(r.pulls.iter().flat_map(|p| std::iter::once(p.opened_at).chain(p.closed_at)))
            .max()
    }
}
