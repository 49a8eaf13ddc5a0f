//! Scoring and hypothesis tests for converted probabilities.

mod bootstrap;
mod correlation;
mod poisson;

use thiserror::Error;

use crate::odds::ProbabilityVector;

pub use bootstrap::{bootstrap_paired_test, bootstrap_paired_tests, DEFAULT_RESAMPLES, DEFAULT_SEED};
pub use correlation::pearson_correlation;
pub use poisson::{poisson_cdf, poisson_sf_inclusive, poisson_two_tailed_test};

/// Probabilities are clamped to `[PROBABILITY_CLAMP, 1 - PROBABILITY_CLAMP]`
/// before taking logs.
pub const PROBABILITY_CLAMP: f64 = 1e-15;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Sign of a test statistic.
///
/// For the bootstrap the statistic is `mean(a - b)`, so `Negative` means the
/// first series has the lower loss. For the Poisson test it is
/// `actual - expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Negative,
    Zero,
    Positive,
}

impl Direction {
    pub fn of(value: f64) -> Self {
        if value < 0.0 {
            Direction::Negative
        } else if value > 0.0 {
            Direction::Positive
        } else {
            Direction::Zero
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Negative => Direction::Positive,
            Direction::Zero => Direction::Zero,
            Direction::Positive => Direction::Negative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub significant_at_005: bool,
    pub direction: Direction,
}

impl TestResult {
    pub(crate) fn new(statistic: f64, p_value: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            significant_at_005: p_value < SIGNIFICANCE_LEVEL,
            direction: Direction::of(statistic),
        }
    }
}

/// Per-match negative log-likelihoods in nats.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossSeries {
    pub per_match_loss: Vec<f64>,
    pub method_tag: String,
    pub bookmaker_tag: String,
}

impl LossSeries {
    pub fn new(per_match_loss: Vec<f64>) -> Self {
        Self {
            per_match_loss,
            ..Default::default()
        }
    }

    pub fn tagged(mut self, method: impl Into<String>, bookmaker: impl Into<String>) -> Self {
        self.method_tag = method.into();
        self.bookmaker_tag = bookmaker.into();
        self
    }

    pub fn len(&self) -> usize {
        self.per_match_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_match_loss.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.per_match_loss.is_empty() {
            return f64::NAN;
        }
        self.per_match_loss.iter().sum::<f64>() / self.per_match_loss.len() as f64
    }
}

/// `-sum_j y_j ln p_j` with clamped probabilities.
pub fn match_log_loss(probs: &[f64], outcome: &[f64]) -> f64 {
    probs
        .iter()
        .zip(outcome)
        .filter(|(_, y)| **y != 0.0)
        .map(|(p, y)| -y * p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP).ln())
        .sum()
}

pub fn log_loss(predictions: &[ProbabilityVector], outcomes: &[Vec<f64>]) -> Result<LossSeries, StatsError> {
    if predictions.len() != outcomes.len() {
        return Err(StatsError::ShapeMismatch(format!(
            "{} predictions for {} outcomes",
            predictions.len(),
            outcomes.len()
        )));
    }
    let losses = predictions
        .iter()
        .zip(outcomes)
        .enumerate()
        .map(|(i, (p, y))| {
            if p.len() != y.len() {
                return Err(StatsError::ShapeMismatch(format!(
                    "row {i}: {} probabilities for {} outcomes",
                    p.len(),
                    y.len()
                )));
            }
            Ok(match_log_loss(p.probs(), y))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LossSeries::new(losses))
}

/// Sum over matches of the probability in `draw_index`.
pub fn expected_draws(predictions: &[ProbabilityVector], draw_index: usize) -> Result<f64, StatsError> {
    predictions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.probs().get(draw_index).copied().ok_or_else(|| {
                StatsError::ShapeMismatch(format!("row {i} has no column {draw_index}"))
            })
        })
        .sum()
}
