//! Favourite-longshot adjusted power-law model.
//!
//! Each row's inverse odds are raised to a common exponent `beta` and
//! renormalised to sum to `t`:
//! `p_ij = t * q_ij^beta / sum_l q_il^beta`. `beta = 1` is multiplicative
//! conversion; `beta > 1` shifts probability from longshots to favourites.

use super::optim::golden_section_max;
use super::{FitMetadata, FittedModel, GlmError, ModelParameters, TrainingSet};
use crate::odds::{MarketOdds, Method, OddsError, ProbabilityVector};

/// Exponent interval searched by the golden-section optimiser.
pub const BETA_SEARCH_INTERVAL: (f64, f64) = (0.25, 4.0);

const GOLDEN_TOLERANCE: f64 = 1e-9;
const NEWTON_STEP_TOLERANCE: f64 = 1e-10;
const NEWTON_MAX_ITERATIONS: usize = 100;
const SWEEP_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlGlmOptimizer {
    GoldenSection,
    /// Plain gradient ascent on the per-row mean log-likelihood.
    GradientAscent {
        learning_rate: f64,
        max_iterations: usize,
        tolerance: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlGlmOptions {
    pub optimizer: FlGlmOptimizer,
    pub interval: (f64, f64),
}

impl Default for FlGlmOptions {
    fn default() -> Self {
        Self {
            optimizer: FlGlmOptimizer::GoldenSection,
            interval: BETA_SEARCH_INTERVAL,
        }
    }
}

impl FlGlmOptimizer {
    pub fn gradient_ascent() -> Self {
        FlGlmOptimizer::GradientAscent {
            learning_rate: 1.0,
            max_iterations: 10_000,
            tolerance: 1e-10,
        }
    }
}

/// `sum_j q_j^beta / t`: the factor removed by row normalisation.
pub fn fl_glm_normaliser(beta: f64, market: &MarketOdds) -> f64 {
    market.inverse().values.iter().map(|q| q.powf(beta)).sum::<f64>() / market.successes() as f64
}

pub fn predict_fl_glm(beta: f64, market: &MarketOdds) -> Result<ProbabilityVector, OddsError> {
    let raw: Vec<f64> = market.inverse().values.iter().map(|q| q.powf(beta)).collect();
    normalise(raw, market.successes(), Method::FlGlm)
}

pub fn predict_fl_glm_two_beta(
    beta_decisive: f64,
    beta_draw: f64,
    draw_column: usize,
    market: &MarketOdds,
) -> Result<ProbabilityVector, OddsError> {
    let raw: Vec<f64> = market
        .inverse()
        .values
        .iter()
        .enumerate()
        .map(|(j, q)| q.powf(if j == draw_column { beta_draw } else { beta_decisive }))
        .collect();
    normalise(raw, market.successes(), Method::FlGlmTwoBeta)
}

fn normalise(raw: Vec<f64>, successes: usize, method: Method) -> Result<ProbabilityVector, OddsError> {
    let scale = successes as f64 / raw.iter().sum::<f64>();
    ProbabilityVector::new(raw.into_iter().map(|p| p * scale).collect(), successes, method)
}

/// Log-likelihood, its exponent derivatives and the summed normaliser. The
/// draw derivative stays zero unless a draw column exponent is given.
fn accumulate(data: &TrainingSet, beta: f64, beta_draw: Option<(usize, f64)>) -> LikelihoodParts {
    let t = data.successes() as f64;
    let ln_t = t.ln();
    let mut parts = LikelihoodParts::default();
    let mut weights = vec![0.0; data.outcomes()];
    for i in 0..data.rows() {
        let log_q = data.log_inverse_row(i);
        let y = data.outcome_row(i);
        let exponent = |j: usize| match beta_draw {
            Some((d, b)) if d == j => b,
            _ => beta,
        };
        // log-sum-exp over beta_j ln q_j
        let max = (0..log_q.len())
            .map(|j| exponent(j) * log_q[j])
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (j, w) in weights.iter_mut().enumerate() {
            *w = (exponent(j) * log_q[j] - max).exp();
            total += *w;
        }
        let log_norm = max + total.ln();
        let mut row = 0.0;
        let (mut grad_decisive, mut grad_draw) = (0.0, 0.0);
        // First and second moments of (decisive, draw) log-odds under the shares.
        let (mut m_d, mut m_r, mut m_dd, mut m_rr) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..log_q.len() {
            let share = weights[j] / total;
            match beta_draw {
                Some((d, _)) if d == j => {
                    m_r += share * log_q[j];
                    m_rr += share * log_q[j] * log_q[j];
                }
                _ => {
                    m_d += share * log_q[j];
                    m_dd += share * log_q[j] * log_q[j];
                }
            }
            let expected = t * share * log_q[j];
            let observed = y[j] * log_q[j];
            if y[j] != 0.0 {
                row += y[j] * (ln_t + exponent(j) * log_q[j] - log_norm);
            }
            match beta_draw {
                Some((d, _)) if d == j => grad_draw += observed - expected,
                _ => grad_decisive += observed - expected,
            }
        }
        parts.log_likelihood.add(row);
        parts.grad_decisive.add(grad_decisive);
        parts.grad_draw.add(grad_draw);
        parts.hessian[0] -= t * (m_dd - m_d * m_d);
        parts.hessian[1] += t * m_d * m_r;
        parts.hessian[2] -= t * (m_rr - m_r * m_r);
        parts.normaliser.add(log_norm.exp() / t);
    }
    parts
}

#[derive(Default)]
struct LikelihoodParts {
    log_likelihood: NeumaierSum,
    grad_decisive: NeumaierSum,
    grad_draw: NeumaierSum,
    /// Second derivatives in (decisive, decisive), (decisive, draw), (draw, draw).
    hessian: [f64; 3],
    normaliser: NeumaierSum,
}

/// Compensated summation; keeps the objective smooth enough for the
/// golden-section search near its optimum on large corpora.
#[derive(Default, Clone, Copy)]
pub(crate) struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `ln L(beta) = sum_i sum_j Y_ij ln p_ij(beta)`.
pub fn fl_glm_log_likelihood(data: &TrainingSet, beta: f64) -> f64 {
    accumulate(data, beta, None).log_likelihood.value()
}

/// `d ln L / d beta = sum_i sum_j (Y_ij - p_ij) ln q_ij`.
pub fn fl_glm_log_likelihood_gradient(data: &TrainingSet, beta: f64) -> f64 {
    accumulate(data, beta, None).grad_decisive.value()
}

/// Log-likelihood with the draw column raised to `beta_draw` and every other
/// column to `beta_decisive`.
pub fn two_beta_log_likelihood(
    data: &TrainingSet,
    beta_decisive: f64,
    beta_draw: f64,
) -> Result<f64, GlmError> {
    let draw = draw_column(data)?;
    Ok(accumulate(data, beta_decisive, Some((draw, beta_draw)))
        .log_likelihood
        .value())
}

fn draw_column(data: &TrainingSet) -> Result<usize, GlmError> {
    data.draw_column()
        .ok_or_else(|| GlmError::InvalidTrainingSet("two-exponent model needs a draw column".into()))
}

pub fn fit_fl_glm(data: &TrainingSet) -> Result<FittedModel, GlmError> {
    fit_fl_glm_with(data, FlGlmOptions::default())
}

pub fn fit_fl_glm_with(data: &TrainingSet, options: FlGlmOptions) -> Result<FittedModel, GlmError> {
    let (lo, hi) = options.interval;
    let (beta, iterations, optimizer) = match options.optimizer {
        FlGlmOptimizer::GoldenSection => {
            let best = golden_section_max(|b| fl_glm_log_likelihood(data, b), lo, hi, GOLDEN_TOLERANCE)
                .map_err(|b| GlmError::NonFiniteLikelihood { beta: vec![b] })?;
            (best.x, best.evaluations, "golden_section".to_string())
        }
        FlGlmOptimizer::GradientAscent {
            learning_rate,
            max_iterations,
            tolerance,
        } => {
            let n = data.rows() as f64;
            let mut beta = 1.0;
            let mut converged = None;
            for iteration in 1..=max_iterations {
                let gradient = fl_glm_log_likelihood_gradient(data, beta) / n;
                if !gradient.is_finite() {
                    return Err(GlmError::NonFiniteLikelihood { beta: vec![beta] });
                }
                let step = learning_rate * gradient;
                beta = (beta + step).clamp(lo, hi);
                if step.abs() < tolerance {
                    converged = Some(iteration);
                    break;
                }
            }
            let iterations = converged.ok_or(GlmError::NoConvergence {
                model: Method::FlGlm,
                iterations: max_iterations,
            })?;
            (beta, iterations, "gradient_ascent".to_string())
        }
    };

    let parts = accumulate(data, beta, None);
    let log_likelihood = parts.log_likelihood.value();
    if !log_likelihood.is_finite() {
        return Err(GlmError::NonFiniteLikelihood { beta: vec![beta] });
    }
    Ok(FittedModel {
        parameters: ModelParameters::FlGlm { beta },
        log_likelihood,
        mean_normaliser: Some(parts.normaliser.value() / data.rows() as f64),
        metadata: metadata(data, iterations, optimizer),
    })
}

/// Fits separate exponents for the draw column and the decisive columns.
///
/// The log-likelihood is concave in the two exponents, so Newton's method
/// from (1, 1) is tried first. Coordinate-wise golden-section sweeps over
/// the search interval take over when Newton leaves the interval or meets a
/// singular Hessian, as happens on tiny or degenerate samples.
pub fn fit_fl_glm_two_beta(data: &TrainingSet) -> Result<FittedModel, GlmError> {
    let draw = draw_column(data)?;
    let (lo, hi) = BETA_SEARCH_INTERVAL;
    let inside = |b: f64| (lo..=hi).contains(&b);
    let ((decisive, draw_beta), iterations, optimizer) = match two_beta_newton(data, draw) {
        Some((point, iterations)) if inside(point.0) && inside(point.1) => (point, iterations, "newton"),
        _ => {
            let (point, sweeps) = two_beta_sweeps(data, draw)?;
            (point, sweeps, "coordinate_golden_section")
        }
    };

    let parts = accumulate(data, decisive, Some((draw, draw_beta)));
    let log_likelihood = parts.log_likelihood.value();
    if !log_likelihood.is_finite() {
        return Err(GlmError::NonFiniteLikelihood {
            beta: vec![decisive, draw_beta],
        });
    }
    Ok(FittedModel {
        parameters: ModelParameters::FlGlmTwoBeta {
            beta_decisive: decisive,
            beta_draw: draw_beta,
            draw_column: draw,
        },
        log_likelihood,
        mean_normaliser: Some(parts.normaliser.value() / data.rows() as f64),
        metadata: metadata(data, iterations, optimizer.to_string()),
    })
}

fn two_beta_newton(data: &TrainingSet, draw: usize) -> Option<((f64, f64), usize)> {
    let mut point = (1.0, 1.0);
    let mut parts = accumulate(data, point.0, Some((draw, point.1)));
    for iteration in 1..=NEWTON_MAX_ITERATIONS {
        let (g0, g1) = (parts.grad_decisive.value(), parts.grad_draw.value());
        let [h00, h01, h11] = parts.hessian;
        let det = h00 * h11 - h01 * h01;
        if !(h00 < 0.0 && det > 0.0) {
            return None;
        }
        let step = ((h01 * g1 - h11 * g0) / det, (h01 * g0 - h00 * g1) / det);
        let current = parts.log_likelihood.value();
        let mut scale = 1.0;
        loop {
            let trial = (point.0 + scale * step.0, point.1 + scale * step.1);
            let trial_parts = accumulate(data, trial.0, Some((draw, trial.1)));
            let value = trial_parts.log_likelihood.value();
            if value.is_finite() && value >= current {
                point = trial;
                parts = trial_parts;
                break;
            }
            scale *= 0.5;
            if scale < 1e-12 {
                // No representable ascent left: already at the optimum.
                return Some((point, iteration));
            }
        }
        if (scale * step.0).abs().max((scale * step.1).abs()) < NEWTON_STEP_TOLERANCE {
            return Some((point, iteration));
        }
    }
    None
}

fn two_beta_sweeps(data: &TrainingSet, draw: usize) -> Result<((f64, f64), usize), GlmError> {
    let (lo, hi) = BETA_SEARCH_INTERVAL;
    let objective = |decisive: f64, draw_beta: f64| {
        accumulate(data, decisive, Some((draw, draw_beta)))
            .log_likelihood
            .value()
    };
    let (mut decisive, mut draw_beta) = (1.0, 1.0);
    let mut best = objective(decisive, draw_beta);
    for sweep in 1..=MAX_SWEEPS {
        let next_decisive = golden_section_max(|b| objective(b, draw_beta), lo, hi, GOLDEN_TOLERANCE)
            .map_err(|b| GlmError::NonFiniteLikelihood { beta: vec![b, draw_beta] })?
            .x;
        let next_draw = golden_section_max(|b| objective(next_decisive, b), lo, hi, GOLDEN_TOLERANCE)
            .map_err(|b| GlmError::NonFiniteLikelihood {
                beta: vec![next_decisive, b],
            })?
            .x;
        let change = (next_decisive - decisive).abs().max((next_draw - draw_beta).abs());
        let value = objective(next_decisive, next_draw);
        // The golden-section argmax is only resolved to its bracket width, so
        // a sweep that no longer raises the likelihood also counts as done.
        let stalled = value <= best + 1e-12 * best.abs().max(1.0);
        decisive = next_decisive;
        draw_beta = next_draw;
        best = best.max(value);
        if change < SWEEP_TOLERANCE || stalled {
            return Ok(((decisive, draw_beta), sweep));
        }
    }
    Err(GlmError::NoConvergence {
        model: Method::FlGlmTwoBeta,
        iterations: MAX_SWEEPS,
    })
}

fn metadata(data: &TrainingSet, iterations: usize, optimizer: String) -> FitMetadata {
    FitMetadata {
        rows: data.rows(),
        outcomes: data.outcomes(),
        successes: data.successes(),
        iterations,
        optimizer,
    }
}
