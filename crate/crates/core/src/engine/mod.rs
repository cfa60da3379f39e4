//! Metric registry and the evaluation pipeline: window the history, run a
//! detector, rate its findings.

pub mod rating;

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::config::{ConfigError, MetricConfig};
use crate::model::{window, MetricDescriptor, MetricResult, ProjectHistory, SprintId, SprintSlice, TeamId, WindowError};

pub use rating::{capped_linear, cutoff_parabola, ratio_linear, threshold_linear, RatingFunction, ZeroDenominator};

/// Runs one metric over one team-sprint slice.
pub type Detector = fn(&SprintSlice<'_>, &MetricConfig) -> MetricResult;

#[derive(Debug, Clone)]
pub struct RegisteredMetric {
    pub descriptor: MetricDescriptor,
    pub detector: Detector,
}

/// Metrics in registration order; names are unique.
#[derive(Debug, Clone, Default)]
pub struct MetricRegistry {
    metrics: Vec<RegisteredMetric>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error("metric '{0}' is already registered")]
    DuplicateMetric(String),
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error(transparent)]
    Window(#[from] WindowError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Result of asking for one metric.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Evaluated(MetricResult),
    /// The metric is disabled in the config.
    Skipped { metric: String },
}

impl MetricRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The nine built-in conformance metrics.
    pub fn standard() -> &'static MetricRegistry {
        static STANDARD: OnceLock<MetricRegistry> = OnceLock::new();
        STANDARD.get_or_init(crate::catalog::standard_registry)
    }

    pub fn register(&mut self, descriptor: MetricDescriptor, detector: Detector) -> Result<(), EngineError> {
        if self.get(descriptor.name).is_some() {
            return Err(EngineError::DuplicateMetric(descriptor.name.to_string()));
        }
        self.metrics.push(RegisteredMetric { descriptor, detector });
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&RegisteredMetric> {
        self.metrics.iter().find(|m| m.descriptor.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegisteredMetric> {
        self.metrics.iter()
    }

    pub fn len(&self) -> usize {
        self.metrics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.metrics.is_empty()
    }

    pub fn evaluate(
        &self,
        metric: &str,
        history: &ProjectHistory,
        team: &TeamId,
        sprint: &SprintId,
        config: &MetricConfig,
    ) -> Result<Evaluation, EngineError> {
        let entry = self.get(metric).ok_or_else(|| EngineError::UnknownMetric(metric.to_string()))?;
        if !config.toggle(metric)?.enabled {
            return Ok(Evaluation::Skipped { metric: metric.to_string() });
        }
        let slice = window(history, team, sprint)?;
        Ok(Evaluation::Evaluated((entry.detector)(&slice, config)))
    }

    /// Every enabled metric for every team-sprint, ordered by team, sprint
    /// due date, then registration order.
    pub fn run_all(&self, history: &ProjectHistory, config: &MetricConfig) -> Vec<MetricResult> {
        let enabled: Vec<&RegisteredMetric> = self
            .metrics
            .iter()
            .filter(|m| config.toggle(m.descriptor.name).map(|t| t.enabled).unwrap_or(true))
            .collect();
        // Sprints are stored ordered by (team, due_on); rayon keeps that order.
        history
            .sprints()
            .par_iter()
            .flat_map_iter(|sprint| {
                let slice = window(history, &sprint.team, &sprint.id).expect("sprint from history");
                enabled
                    .iter()
                    .map(|m| (m.detector)(&slice, config))
                    .collect::<Vec<_>>()
            })
            .collect()
    }
}

pub fn evaluate(
    metric: &str,
    history: &ProjectHistory,
    team: &TeamId,
    sprint: &SprintId,
    config: &MetricConfig,
) -> Result<Evaluation, EngineError> {
    MetricRegistry::standard().evaluate(metric, history, team, sprint, config)
}

pub fn run_all(history: &ProjectHistory, config: &MetricConfig) -> Vec<MetricResult> {
    MetricRegistry::standard().run_all(history, config)
}
