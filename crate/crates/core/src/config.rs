//! Tunable thresholds, weights and severity settings for every metric.
//!
//! The JSON form mirrors the struct; absent fields take their defaults, and
//! unknown fields are rejected so that a typo never silently falls back to
//! a default.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::Severity;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{field} must be {requirement}, got {value}")]
    OutOfRange {
        field: String,
        requirement: &'static str,
        value: f64,
    },
    #[error("no weight configured for severity '{0}'")]
    MissingSeverityWeight(Severity),
    #[error("duplicate_label must not be empty")]
    EmptyLabel,
    #[error("unknown metric '{0}'")]
    UnknownMetric(String),
    #[error("malformed config: {0}")]
    Parse(String),
}

macro_rules! metric_section {
    (
        $(#[$meta:meta])*
        $name:ident { $( $(#[$fmeta:meta])* $field:ident : $ty:ty = $default:expr ),* $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            pub enabled: bool,
            pub severity_override: Option<Severity>,
            $( $(#[$fmeta])* pub $field: $ty, )*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { enabled: true, severity_override: None, $( $field: $default, )* }
            }
        }
    };
}

metric_section!(
    /// Files with many edits by few authors.
    CollectiveOwnershipConfig {
        weight: f64 = 10.0,
        /// Minimum edits for a file to count.
        threshold_e: u32 = 10,
        /// Maximum distinct authors for a file to count.
        threshold_a: u32 = 2,
    }
);

metric_section!(TestLaterConfig { weight: f64 = 2.0 });

metric_section!(HugeStoriesConfig {
    weight: f64 = 25.0,
    threshold_length: f64 = 3.0,
    threshold_check: f64 = 3.0,
});

metric_section!(MultiBacklogConfig {
    weight: f64 = 1.0,
    /// A story counts once it has been in more than this many sprints.
    threshold_amount: u32 = 1,
});

metric_section!(DuplicatesConfig {
    weight: f64 = 1.0,
    /// Matched case-insensitively.
    duplicate_label: String = "duplicate".to_string(),
});

metric_section!(LastMinuteConfig {
    weight: f64 = 1.0,
    window_minutes: f64 = 120.0,
});

metric_section!(NoCommittingConfig { weight: f64 = 10.0 });

metric_section!(DailyQuotaConfig {
    weight_a: f64 = 200.0,
    weight_b: f64 = 100.0,
});

metric_section!(
    /// The rating of this metric takes no weight; only the window is tunable.
    FastPullsConfig { window_minutes: f64 = 60.0 }
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    pub collective_code_ownership: CollectiveOwnershipConfig,
    pub test_later_development: TestLaterConfig,
    pub huge_user_stories: HugeStoriesConfig,
    pub one_story_multiple_backlogs: MultiBacklogConfig,
    pub duplicates: DuplicatesConfig,
    pub at_the_last_minute: LastMinuteConfig,
    pub no_committing: NoCommittingConfig,
    pub daily_user_story_amount: DailyQuotaConfig,
    pub fast_pull_requests: FastPullsConfig,
    pub severity_weights: BTreeMap<Severity, f64>,
}

pub fn default_severity_weights() -> BTreeMap<Severity, f64> {
    [
        (Severity::Informational, 0.0),
        (Severity::VeryLow, 1.0),
        (Severity::Low, 2.0),
        (Severity::Normal, 4.0),
        (Severity::High, 8.0),
    ]
    .into_iter()
    .collect()
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            collective_code_ownership: Default::default(),
            test_later_development: Default::default(),
            huge_user_stories: Default::default(),
            one_story_multiple_backlogs: Default::default(),
            duplicates: Default::default(),
            at_the_last_minute: Default::default(),
            no_committing: Default::default(),
            daily_user_story_amount: Default::default(),
            fast_pull_requests: Default::default(),
            severity_weights: default_severity_weights(),
        }
    }
}

/// The enable flag and severity override shared by every section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Toggle {
    pub enabled: bool,
    pub severity_override: Option<Severity>,
}

fn positive(field: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { field: field.into(), requirement: "> 0", value })
    }
}

fn non_negative(field: &str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { field: field.into(), requirement: ">= 0", value })
    }
}

impl MetricConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: MetricConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.collective_code_ownership;
        non_negative("collective_code_ownership.weight", c.weight)?;
        positive("collective_code_ownership.threshold_e", c.threshold_e as f64)?;
        positive("collective_code_ownership.threshold_a", c.threshold_a as f64)?;
        non_negative("test_later_development.weight", self.test_later_development.weight)?;
        let h = &self.huge_user_stories;
        non_negative("huge_user_stories.weight", h.weight)?;
        positive("huge_user_stories.threshold_length", h.threshold_length)?;
        positive("huge_user_stories.threshold_check", h.threshold_check)?;
        let m = &self.one_story_multiple_backlogs;
        non_negative("one_story_multiple_backlogs.weight", m.weight)?;
        positive("one_story_multiple_backlogs.threshold_amount", m.threshold_amount as f64)?;
        non_negative("duplicates.weight", self.duplicates.weight)?;
        if self.duplicates.duplicate_label.trim().is_empty() {
            return Err(ConfigError::EmptyLabel);
        }
        non_negative("at_the_last_minute.weight", self.at_the_last_minute.weight)?;
        positive("at_the_last_minute.window_minutes", self.at_the_last_minute.window_minutes)?;
        non_negative("no_committing.weight", self.no_committing.weight)?;
        non_negative("daily_user_story_amount.weight_a", self.daily_user_story_amount.weight_a)?;
        non_negative("daily_user_story_amount.weight_b", self.daily_user_story_amount.weight_b)?;
        positive("fast_pull_requests.window_minutes", self.fast_pull_requests.window_minutes)?;
        for severity in Severity::ALL {
            match self.severity_weights.get(&severity) {
                None => return Err(ConfigError::MissingSeverityWeight(severity)),
                Some(&w) => non_negative(&format!("severity_weights.{severity}"), w)?,
            }
        }
        Ok(())
    }

    /// Enable flag and severity override of a metric, by registered name.
    pub fn toggle(&self, metric: &str) -> Result<Toggle, ConfigError> {
        macro_rules! t {
            ($s:expr) => {
                Toggle { enabled: $s.enabled, severity_override: $s.severity_override }
            };
        }
        Ok(match metric {
            "collective-code-ownership" => t!(self.collective_code_ownership),
            "test-later-development" => t!(self.test_later_development),
            "huge-user-stories" => t!(self.huge_user_stories),
            "one-story-multiple-backlogs" => t!(self.one_story_multiple_backlogs),
            "duplicates" => t!(self.duplicates),
            "at-the-last-minute" => t!(self.at_the_last_minute),
            "no-committing" => t!(self.no_committing),
            "daily-user-story-amount" => t!(self.daily_user_story_amount),
            "fast-pull-requests" => t!(self.fast_pull_requests),
            other => return Err(ConfigError::UnknownMetric(other.to_string())),
        })
    }

    pub fn set_enabled(&mut self, metric: &str, enabled: bool) -> Result<(), ConfigError> {
        match metric {
            "collective-code-ownership" => self.collective_code_ownership.enabled = enabled,
            "test-later-development" => self.test_later_development.enabled = enabled,
            "huge-user-stories" => self.huge_user_stories.enabled = enabled,
            "one-story-multiple-backlogs" => self.one_story_multiple_backlogs.enabled = enabled,
            "duplicates" => self.duplicates.enabled = enabled,
            "at-the-last-minute" => self.at_the_last_minute.enabled = enabled,
            "no-committing" => self.no_committing.enabled = enabled,
            "daily-user-story-amount" => self.daily_user_story_amount.enabled = enabled,
            "fast-pull-requests" => self.fast_pull_requests.enabled = enabled,
            other => return Err(ConfigError::UnknownMetric(other.to_string())),
        }
        Ok(())
    }

    /// Canonical JSON: sorted keys, no whitespace.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// SHA-256 over the canonical JSON of the resolved config.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.canonical_json().as_bytes());
        let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }
}
