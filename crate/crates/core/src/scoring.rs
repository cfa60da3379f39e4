//! Severity-weighted team scores per sprint and their trends over time.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::MetricConfig;
use crate::engine::MetricRegistry;
use crate::model::{MetricResult, ProjectHistory, Score, Severity, SprintId, TeamId};
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoringError {
    #[error("no weight configured for severity '{0}'")]
    MissingSeverityWeight(Severity),
    #[error("metric '{0}' is not registered")]
    UnknownMetric(String),
    #[error("result for {metric} belongs to {team}/{sprint}, expected {expected_team}/{expected_sprint}")]
    MixedResults {
        metric: String,
        team: TeamId,
        sprint: SprintId,
        expected_team: TeamId,
        expected_sprint: SprintId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub metric: String,
    pub score: f64,
    pub severity: Severity,
    pub weight: f64,
    /// `weight * score / total weight`; the shares sum to the overall score.
    pub weighted_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedMetric {
    pub metric: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSprintScore {
    pub team: TeamId,
    pub sprint: SprintId,
    /// `None` when no applicable metric carries weight.
    pub overall: Option<Score>,
    pub contributions: Vec<Contribution>,
    pub skipped: Vec<SkippedMetric>,
}

/// Weighted mean of the applicable results of one team-sprint, using the
/// standard registry for severities.
pub fn aggregate(
    team: &TeamId,
    sprint: &SprintId,
    results: &[MetricResult],
    config: &MetricConfig,
) -> Result<TeamSprintScore, ScoringError> {
    aggregate_with(MetricRegistry::standard(), team, sprint, results, config)
}

pub fn aggregate_with(
    registry: &MetricRegistry,
    team: &TeamId,
    sprint: &SprintId,
    results: &[MetricResult],
    config: &MetricConfig,
) -> Result<TeamSprintScore, ScoringError> {
    let order: HashMap<&str, usize> =
        registry.iter().enumerate().map(|(i, m)| (m.descriptor.name, i)).collect();
    let mut sorted: Vec<(usize, &MetricResult)> = Vec::with_capacity(results.len());
    for r in results {
        if &r.team != team || &r.sprint != sprint {
            return Err(ScoringError::MixedResults {
                metric: r.metric.clone(),
                team: r.team.clone(),
                sprint: r.sprint.clone(),
                expected_team: team.clone(),
                expected_sprint: sprint.clone(),
            });
        }
        let idx = *order.get(r.metric.as_str()).ok_or_else(|| ScoringError::UnknownMetric(r.metric.clone()))?;
        sorted.push((idx, r));
    }
    // Summing in registration order makes the result independent of input order.
    sorted.sort_by_key(|(i, _)| *i);

    let mut contributions = Vec::new();
    let mut skipped = Vec::new();
    for (idx, r) in sorted {
        let descriptor = &registry.iter().nth(idx).expect("index from registry").descriptor;
        let severity = config
            .toggle(&r.metric)
            .ok()
            .and_then(|t| t.severity_override)
            .unwrap_or(descriptor.severity);
        let weight = *config
            .severity_weights
            .get(&severity)
            .ok_or(ScoringError::MissingSeverityWeight(severity))?;
        match r.score {
            Some(score) => contributions.push(Contribution {
                metric: r.metric.clone(),
                score: score.value(),
                severity,
                weight,
                weighted_share: 0.0,
            }),
            None => skipped.push(SkippedMetric {
                metric: r.metric.clone(),
                reason: r.diagnostic.clone().unwrap_or_else(|| "not applicable".into()),
            }),
        }
    }

    let total_weight: f64 = contributions.iter().map(|c| c.weight).sum();
    let overall = if total_weight > 0.0 {
        for c in &mut contributions {
            c.weighted_share = c.weight * c.score / total_weight;
        }
        let mean = contributions.iter().map(|c| c.weight * c.score).sum::<f64>() / total_weight;
        Some(Score::clamped(mean))
    } else {
        None
    };
    Ok(TeamSprintScore { team: team.clone(), sprint: sprint.clone(), overall, contributions, skipped })
}

/// Aggregates `run_all` output into one score per team-sprint of the history,
/// ordered like the history's sprints.
pub fn score_all(
    history: &ProjectHistory,
    results: &[MetricResult],
    config: &MetricConfig,
) -> Result<Vec<TeamSprintScore>, ScoringError> {
    let mut grouped: HashMap<(&TeamId, &SprintId), Vec<MetricResult>> = HashMap::new();
    for r in results {
        grouped.entry((&r.team, &r.sprint)).or_default().push(r.clone());
    }
    history
        .sprints()
        .iter()
        .map(|s| {
            let group = grouped.get(&(&s.team, &s.id)).map(|v| v.as_slice()).unwrap_or(&[]);
            aggregate(&s.team, &s.id, group, config)
        })
        .collect()
}

pub const OVERALL: &str = "overall";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub sprint: SprintId,
    pub sprint_title: String,
    pub due_on: Timestamp,
    /// `None` marks a gap: the value was not applicable or not computed.
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub team: TeamId,
    /// Metric name or [`OVERALL`].
    pub metric: String,
    pub points: Vec<TrendPoint>,
}

/// One series per (team, metric) and per (team, overall), with one point for
/// every sprint of the team in due-date order. Missing values stay gaps.
pub fn trend(history: &ProjectHistory, results: &[MetricResult], scores: &[TeamSprintScore]) -> Vec<TrendSeries> {
    let registry = MetricRegistry::standard();
    let rank = |name: &str| registry.iter().position(|m| m.descriptor.name == name).unwrap_or(usize::MAX);

    // team -> (registry rank, metric) -> sprint -> score
    type Cells<'a> = HashMap<&'a SprintId, Option<f64>>;
    let mut by_metric: BTreeMap<&TeamId, BTreeMap<(usize, &str), Cells>> = BTreeMap::new();
    for r in results {
        by_metric
            .entry(&r.team)
            .or_default()
            .entry((rank(&r.metric), r.metric.as_str()))
            .or_default()
            .insert(&r.sprint, r.score.map(Score::value));
    }
    let overall: HashMap<(&TeamId, &SprintId), Option<f64>> =
        scores.iter().map(|s| ((&s.team, &s.sprint), s.overall.map(Score::value))).collect();

    let mut out = Vec::new();
    for team in history.teams() {
        let sprints: Vec<_> = history.sprints_of(team).collect();
        if sprints.is_empty() {
            continue;
        }
        let series = |metric: &str, value: &dyn Fn(&SprintId) -> Option<f64>| TrendSeries {
            team: team.clone(),
            metric: metric.to_string(),
            points: sprints
                .iter()
                .map(|s| TrendPoint {
                    sprint: s.id.clone(),
                    sprint_title: s.title.clone(),
                    due_on: s.due_on,
                    score: value(&s.id),
                })
                .collect(),
        };
        if let Some(metrics) = by_metric.get(team) {
            for ((_, name), values) in metrics {
                out.push(series(name, &|id| values.get(id).copied().flatten()));
            }
        }
        out.push(series(OVERALL, &|id| overall.get(&(team, id)).copied().flatten()));
    }
    out
}

/// Writes `team,metric,sprint_title,due_on,score`; gaps leave the score empty.
pub fn write_trend_csv<W: Write>(series: &[TrendSeries], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["team", "metric", "sprint_title", "due_on", "score"])?;
    for s in series {
        for p in &s.points {
            let score = p.score.map(|v| format!("{:.1}", Score::clamped(v).rounded())).unwrap_or_default();
            w.write_record([s.team.as_str(), &s.metric, &p.sprint_title, &p.due_on.to_iso(), &score])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn trend_csv_string(series: &[TrendSeries]) -> String {
    let mut buf = Vec::new();
    write_trend_csv(series, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}
