use crate::model::{RawRecords, Sprint, SprintMembership, StoryState, UserStory};
use crate::time::{Timestamp, SECONDS_PER_DAY};

/// Id of the past-due sprint in [`unfinished_example`].
pub const UNFINISHED_EXAMPLE_SPRINT: &str = "sprint-12";

/// Two consecutive sprints of one team. "Sprint 12" is over and holds ten
/// stories, of which #129 and #135 are still open; "Sprint 13" is the
/// running sprint and ends last, so it is never past due by default.
pub fn unfinished_example() -> RawRecords {
    let start = Timestamp::parse("2015-06-01T09:00:00Z").expect("constant timestamp").unix();
    let two_weeks = 14 * SECONDS_PER_DAY;
    let sprint = |n: i64, from: i64| Sprint {
        id: format!("sprint-{n}").into(),
        title: format!("Sprint {n}"),
        starts_at: Timestamp::from_unix(from),
        due_on: Timestamp::from_unix(from + two_weeks),
        team: "team-a".into(),
    };
    let s12 = sprint(12, start);
    let s13 = sprint(13, start + two_weeks);

    let story = |number: u64, s: &Sprint, open: bool| UserStory {
        number,
        title: format!("User story {number}"),
        body: format!("As a visitor I want feature {number}.\n\n- [ ] implement\n- [ ] test"),
        state: if open { StoryState::Open } else { StoryState::Closed },
        labels: Default::default(),
        sprint_memberships: vec![SprintMembership { sprint_id: s.id.clone(), assigned_at: s.starts_at }],
        assignees: [format!("dev{}@example.org", number % 4)].into_iter().collect(),
        created_at: Timestamp::from_unix(s.starts_at.unix() - SECONDS_PER_DAY),
        closed_at: (!open).then(|| Timestamp::from_unix(s.due_on.unix() - SECONDS_PER_DAY)),
        team: s.team.clone(),
    };
    let mut stories: Vec<UserStory> = (126..=135).map(|n| story(n, &s12, n == 129 || n == 135)).collect();
    stories.extend((136..=139).map(|n| story(n, &s13, true)));

    RawRecords { sprints: vec![s12, s13], stories, ..Default::default() }
}
