//! Rating functions mapping violation counts and ratios onto `[0, 100]`.
//!
//! Two families: linearly decreasing threshold functions (with a ratio
//! variant and an increasing capped variant) and the cut-off parabola.

use serde::Serialize;

use crate::model::Score;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("rating denominator is zero")]
pub struct ZeroDenominator;

/// `max(0, 100 - x * weight)`
pub fn threshold_linear(x: f64, weight: f64) -> Score {
    Score::clamped(100.0 - x * weight)
}

/// `max(0, 100 - (violations / total) * 100 * extra_factor * weight)`
pub fn ratio_linear(
    violations: f64,
    total: f64,
    weight: f64,
    extra_factor: f64,
) -> Result<Score, ZeroDenominator> {
    if total == 0.0 {
        return Err(ZeroDenominator);
    }
    Ok(Score::clamped(100.0 - (violations / total) * 100.0 * extra_factor * weight))
}

/// `min(100, x * weight)`
pub fn capped_linear(x: f64, weight: f64) -> Score {
    Score::clamped(x * weight)
}

/// `clamp(0, 100, weight_a * quota - weight_b * quota^2)`
///
/// Perfect scores for the band of quotas where the parabola exceeds 100;
/// the lower clamp keeps large quotas from going negative.
pub fn cutoff_parabola(quota: f64, weight_a: f64, weight_b: f64) -> Score {
    Score::clamped(weight_a * quota - weight_b * quota * quota)
}

/// Which rating family a metric uses, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RatingFunction {
    ThresholdLinear { weight: f64 },
    RatioLinear { weight: f64 },
    CappedLinear { weight: f64 },
    CutoffParabola { weight_a: f64, weight_b: f64 },
}

impl RatingFunction {
    /// Applies the function. `x` is the violation count (or the averaged
    /// quantity for the capped and parabola kinds); `total` and
    /// `extra_factor` are only read by the ratio kind.
    pub fn apply(&self, x: f64, total: f64, extra_factor: f64) -> Result<Score, ZeroDenominator> {
        match *self {
            RatingFunction::ThresholdLinear { weight } => Ok(threshold_linear(x, weight)),
            RatingFunction::RatioLinear { weight } => ratio_linear(x, total, weight, extra_factor),
            RatingFunction::CappedLinear { weight } => Ok(capped_linear(x, weight)),
            RatingFunction::CutoffParabola { weight_a, weight_b } => {
                Ok(cutoff_parabola(x, weight_a, weight_b))
            }
        }
    }
}
