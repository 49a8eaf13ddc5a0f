//! Generalised linear models fitted on historical odds and results.
//!
//! The power-law family ([`fit_fl_glm`], [`fit_fl_glm_two_beta`]) raises the
//! inverse odds to a fitted exponent and renormalises each row. The logistic
//! baselines ([`fit_multinomial_logistic`], [`fit_ordered_logistic`]) take the
//! inverse odds as raw features.

mod fl;
mod format;
mod logistic;
pub(crate) mod optim;
mod ordered;

use thiserror::Error;

use crate::odds::{MarketOdds, Method, OddsError, ProbabilityVector};

pub use fl::{
    fit_fl_glm, fit_fl_glm_two_beta, fit_fl_glm_with, fl_glm_log_likelihood, fl_glm_log_likelihood_gradient,
    fl_glm_normaliser, predict_fl_glm, predict_fl_glm_two_beta, two_beta_log_likelihood, FlGlmOptimizer,
    FlGlmOptions, BETA_SEARCH_INTERVAL,
};
pub use format::{MODEL_FORMAT_NAME, MODEL_FORMAT_VERSION};
pub use logistic::{fit_multinomial_logistic, multinomial_probabilities};
pub use ordered::{fit_ordered_logistic, ordered_probabilities};

/// L2 penalty on logistic coefficients; keeps separated data finite.
pub const LOGISTIC_L2_PENALTY: f64 = 1e-8;

/// Smallest probability a logistic model reports for any outcome.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

#[derive(Debug, Error)]
pub enum GlmError {
    #[error("training set: {0}")]
    InvalidTrainingSet(String),
    #[error("log-likelihood is not finite at beta = {beta:?}")]
    NonFiniteLikelihood { beta: Vec<f64> },
    #[error("{model} did not converge after {iterations} iterations")]
    NoConvergence { model: Method, iterations: usize },
    #[error("model {model} cannot score this market: {reason}")]
    IncompatibleMarket { model: Method, reason: String },
    #[error(transparent)]
    Odds(#[from] OddsError),
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
}

/// Historical inverse odds with one-hot outcomes, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    outcomes_per_row: usize,
    successes: usize,
    inverse_odds: Vec<f64>,
    log_inverse_odds: Vec<f64>,
    outcome_matrix: Vec<f64>,
    draw_column: Option<usize>,
}

impl TrainingSet {
    pub fn new(
        inverse_odds: Vec<Vec<f64>>,
        outcome_matrix: Vec<Vec<f64>>,
        draw_column: Option<usize>,
    ) -> Result<Self, GlmError> {
        let invalid = |msg: String| Err(GlmError::InvalidTrainingSet(msg));
        if inverse_odds.is_empty() {
            return invalid("no rows".into());
        }
        if inverse_odds.len() != outcome_matrix.len() {
            return invalid(format!(
                "{} odds rows but {} outcome rows",
                inverse_odds.len(),
                outcome_matrix.len()
            ));
        }
        let k = inverse_odds[0].len();
        if k < 2 {
            return invalid(format!("need at least two outcome columns, got {k}"));
        }
        if let Some(d) = draw_column {
            if d >= k {
                return invalid(format!("draw column {d} out of range for {k} columns"));
            }
        }
        let mut successes = None;
        for (i, (q, y)) in inverse_odds.iter().zip(&outcome_matrix).enumerate() {
            if q.len() != k || y.len() != k {
                return invalid(format!("row {i} has the wrong number of columns"));
            }
            if let Some(j) = q.iter().position(|v| !(v.is_finite() && *v > 0.0 && *v < 1.0)) {
                return invalid(format!("row {i} column {j}: inverse odds {} outside (0, 1)", q[j]));
            }
            if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
                return invalid(format!("row {i}: outcomes must be 0/1 indicators"));
            }
            let ones = y.iter().filter(|v| **v == 1.0).count();
            match successes {
                None if ones >= 1 && ones < k => successes = Some(ones),
                Some(t) if t == ones => {}
                _ => return invalid(format!("row {i} has {ones} successful outcomes")),
            }
        }
        let flat: Vec<f64> = inverse_odds.into_iter().flatten().collect();
        Ok(Self {
            outcomes_per_row: k,
            successes: successes.unwrap_or(1),
            log_inverse_odds: flat.iter().map(|q| q.ln()).collect(),
            inverse_odds: flat,
            outcome_matrix: outcome_matrix.into_iter().flatten().collect(),
            draw_column,
        })
    }

    /// Builds a training set from markets and their one-hot outcomes.
    pub fn from_markets<'a, I>(rows: I, draw_column: Option<usize>) -> Result<Self, GlmError>
    where
        I: IntoIterator<Item = (&'a MarketOdds, &'a [f64])>,
    {
        let (odds, outcomes): (Vec<_>, Vec<_>) = rows
            .into_iter()
            .map(|(m, y)| (m.inverse().values, y.to_vec()))
            .unzip();
        Self::new(odds, outcomes, draw_column)
    }

    pub fn rows(&self) -> usize {
        self.inverse_odds.len() / self.outcomes_per_row
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes_per_row
    }

    pub fn successes(&self) -> usize {
        self.successes
    }

    pub fn draw_column(&self) -> Option<usize> {
        self.draw_column
    }

    pub fn inverse_row(&self, i: usize) -> &[f64] {
        &self.inverse_odds[i * self.outcomes_per_row..(i + 1) * self.outcomes_per_row]
    }

    pub(crate) fn log_inverse_row(&self, i: usize) -> &[f64] {
        &self.log_inverse_odds[i * self.outcomes_per_row..(i + 1) * self.outcomes_per_row]
    }

    pub fn outcome_row(&self, i: usize) -> &[f64] {
        &self.outcome_matrix[i * self.outcomes_per_row..(i + 1) * self.outcomes_per_row]
    }

    /// Index of the first successful outcome in row `i`.
    pub(crate) fn winner(&self, i: usize) -> usize {
        self.outcome_row(i).iter().position(|v| *v == 1.0).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParameters {
    FlGlm {
        beta: f64,
    },
    FlGlmTwoBeta {
        beta_decisive: f64,
        beta_draw: f64,
        draw_column: usize,
    },
    /// One row per class, `[intercept, w_1, .., w_k]`; the reference class
    /// row is pinned at zero.
    MultinomialLogistic {
        coefficients: Vec<Vec<f64>>,
        reference_class: usize,
    },
    /// `P(class <= j) = logistic(thresholds[j] - coefficients . q)`.
    OrderedLogistic {
        coefficients: Vec<f64>,
        thresholds: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitMetadata {
    pub rows: usize,
    pub outcomes: usize,
    pub successes: usize,
    pub iterations: usize,
    pub optimizer: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub parameters: ModelParameters,
    pub log_likelihood: f64,
    /// Mean over rows of `sum_j q_ij^beta / t` at the optimum (power-law kinds).
    pub mean_normaliser: Option<f64>,
    pub metadata: FitMetadata,
}

impl FittedModel {
    pub fn kind(&self) -> Method {
        match self.parameters {
            ModelParameters::FlGlm { .. } => Method::FlGlm,
            ModelParameters::FlGlmTwoBeta { .. } => Method::FlGlmTwoBeta,
            ModelParameters::MultinomialLogistic { .. } => Method::MultinomialLogistic,
            ModelParameters::OrderedLogistic { .. } => Method::OrderedLogistic,
        }
    }

    pub fn predict(&self, market: &MarketOdds) -> Result<ProbabilityVector, GlmError> {
        let incompatible = |reason: String| GlmError::IncompatibleMarket {
            model: self.kind(),
            reason,
        };
        match &self.parameters {
            ModelParameters::FlGlm { beta } => Ok(predict_fl_glm(*beta, market)?),
            ModelParameters::FlGlmTwoBeta {
                beta_decisive,
                beta_draw,
                draw_column,
            } => {
                if *draw_column >= market.outcomes() {
                    return Err(incompatible(format!("no draw column {draw_column}")));
                }
                Ok(predict_fl_glm_two_beta(*beta_decisive, *beta_draw, *draw_column, market)?)
            }
            ModelParameters::MultinomialLogistic { coefficients, .. } => {
                if market.outcomes() != coefficients.len() || market.successes() != 1 {
                    return Err(incompatible(format!(
                        "fitted on {} single-winner outcomes",
                        coefficients.len()
                    )));
                }
                let probs = multinomial_probabilities(coefficients, &market.inverse().values);
                Ok(ProbabilityVector::new(floored(probs), 1, Method::MultinomialLogistic)?)
            }
            ModelParameters::OrderedLogistic {
                coefficients,
                thresholds,
            } => {
                if market.outcomes() != coefficients.len() || market.successes() != 1 {
                    return Err(incompatible(format!(
                        "fitted on {} single-winner outcomes",
                        coefficients.len()
                    )));
                }
                let probs = ordered_probabilities(coefficients, thresholds, &market.inverse().values);
                Ok(ProbabilityVector::new(floored(probs), 1, Method::OrderedLogistic)?)
            }
        }
    }

    /// Serialises to the versioned key-value text format.
    pub fn to_text(&self) -> String {
        format::write_model(self)
    }

    pub fn from_text(text: &str) -> Result<Self, GlmError> {
        format::read_model(text)
    }
}

/// Lifts probabilities that underflowed to zero, as fits on separable
/// samples produce, to `PROBABILITY_FLOOR` and renormalises.
fn floored(probs: Vec<f64>) -> Vec<f64> {
    if probs.iter().all(|p| *p >= PROBABILITY_FLOOR) {
        return probs;
    }
    let lifted: Vec<f64> = probs.iter().map(|p| p.max(PROBABILITY_FLOOR)).collect();
    let total: f64 = lifted.iter().sum();
    lifted.into_iter().map(|p| p / total).collect()
}

/// Fits the requested model family.
pub fn fit(method: Method, data: &TrainingSet) -> Result<FittedModel, GlmError> {
    match method {
        Method::FlGlm => fit_fl_glm(data),
        Method::FlGlmTwoBeta => fit_fl_glm_two_beta(data),
        Method::MultinomialLogistic => fit_multinomial_logistic(data),
        Method::OrderedLogistic => fit_ordered_logistic(data),
        other => Err(GlmError::InvalidTrainingSet(format!("{other} is not a fitted model"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn training_set_validation() {
        let ok = TrainingSet::new(vec![vec![0.5, 0.5]], vec![vec![1.0, 0.0]], None).unwrap();
        assert_eq!((ok.rows(), ok.outcomes(), ok.successes()), (1, 2, 1));

        assert!(TrainingSet::new(vec![], vec![], None).is_err());
        assert!(TrainingSet::new(vec![vec![0.5, 0.5]], vec![], None).is_err());
        assert!(TrainingSet::new(vec![vec![0.5, 1.0]], vec![vec![1.0, 0.0]], None).is_err());
        assert!(TrainingSet::new(vec![vec![0.5, 0.5]], vec![vec![1.0, 1.0]], None).is_err());
        assert!(TrainingSet::new(vec![vec![0.5, 0.5]], vec![vec![0.0, 0.0]], None).is_err());
        assert!(TrainingSet::new(vec![vec![0.5, 0.5]], vec![vec![1.0, 0.0]], Some(2)).is_err());
        assert!(TrainingSet::new(
            vec![vec![0.5, 0.5, 0.5], vec![0.5, 0.5, 0.5]],
            vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]],
            None
        )
        .is_err());
    }

    #[test]
    fn predict_rejects_mismatched_logistic_market() {
        let model = FittedModel {
            parameters: ModelParameters::OrderedLogistic {
                coefficients: vec![0.0, 0.0, 0.0],
                thresholds: vec![-0.5, 0.5],
            },
            log_likelihood: -1.0,
            mean_normaliser: None,
            metadata: FitMetadata {
                rows: 1,
                outcomes: 3,
                successes: 1,
                iterations: 0,
                optimizer: "test".into(),
            },
        };
        let two_way = MarketOdds::single(vec![2.0, 2.0]).unwrap();
        assert!(matches!(model.predict(&two_way), Err(GlmError::IncompatibleMarket { .. })));
        let three_way = MarketOdds::single(vec![2.0, 3.0, 4.0]).unwrap();
        assert!(model.predict(&three_way).is_ok());
    }

    #[test]
    fn collapsed_thresholds_still_give_valid_probabilities() {
        let model = FittedModel {
            parameters: ModelParameters::OrderedLogistic {
                coefficients: vec![0.0, 0.0, 0.0],
                thresholds: vec![0.3, 0.3],
            },
            log_likelihood: -1.0,
            mean_normaliser: None,
            metadata: FitMetadata {
                rows: 1,
                outcomes: 3,
                successes: 1,
                iterations: 0,
                optimizer: "test".into(),
            },
        };
        let p = model.predict(&MarketOdds::single(vec![2.0, 3.0, 4.0]).unwrap()).unwrap();
        assert!(p.probs()[1] > 0.0 && p.probs()[1] < 1e-14);
    }
}
