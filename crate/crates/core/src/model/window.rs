use super::{Commit, ProjectHistory, PullRequest, Sprint, SprintId, TeamId, UserStory};

/// The artifacts one team produced during one sprint.
#[derive(Debug, Clone)]
pub struct SprintSlice<'h> {
    pub history: &'h ProjectHistory,
    pub team: &'h TeamId,
    pub sprint: &'h Sprint,
    /// Authored within `[starts_at, due_on]`, in time order.
    pub commits: Vec<&'h Commit>,
    /// Stories whose membership history contains the sprint.
    pub stories: Vec<&'h UserStory>,
    /// Opened within `[starts_at, due_on]`.
    pub pulls: Vec<&'h PullRequest>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WindowError {
    #[error("unknown sprint '{0}'")]
    UnknownSprint(SprintId),
    #[error("sprint '{sprint}' belongs to team '{owner}', not '{requested}'")]
    WrongTeam {
        sprint: SprintId,
        owner: TeamId,
        requested: TeamId,
    },
}

pub fn window<'h>(
    history: &'h ProjectHistory,
    team: &TeamId,
    sprint: &SprintId,
) -> Result<SprintSlice<'h>, WindowError> {
    let sprint = history
        .sprint(sprint)
        .ok_or_else(|| WindowError::UnknownSprint(sprint.clone()))?;
    if &sprint.team != team {
        return Err(WindowError::WrongTeam {
            sprint: sprint.id.clone(),
            owner: sprint.team.clone(),
            requested: team.clone(),
        });
    }
    let team = &sprint.team;

    let all = history.commits();
    let idx = history.team_commits(team);
    let lo = idx.partition_point(|&i| all[i].authored_at < sprint.starts_at);
    let hi = idx.partition_point(|&i| all[i].authored_at <= sprint.due_on);
    let commits = idx[lo..hi].iter().map(|&i| &all[i]).collect();

    let pulls_all = history.pulls();
    let pidx = history.team_pulls(team);
    let lo = pidx.partition_point(|&i| pulls_all[i].opened_at < sprint.starts_at);
    let hi = pidx.partition_point(|&i| pulls_all[i].opened_at <= sprint.due_on);
    let pulls = pidx[lo..hi].iter().map(|&i| &pulls_all[i]).collect();

    let stories = history.backlog_of(&sprint.id).collect();

    Ok(SprintSlice { history, team, sprint, commits, stories, pulls })
}
