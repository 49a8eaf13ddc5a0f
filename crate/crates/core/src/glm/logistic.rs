//! Multinomial logistic regression on inverse-odds features.

use nalgebra::{DMatrix, DVector};

use super::{FitMetadata, FittedModel, GlmError, ModelParameters, TrainingSet, LOGISTIC_L2_PENALTY};
use crate::odds::Method;

const MAX_NEWTON_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

/// Softmax over `intercept + w . q` per class.
pub fn multinomial_probabilities(coefficients: &[Vec<f64>], inverse: &[f64]) -> Vec<f64> {
    let scores: Vec<f64> = coefficients.iter().map(|c| linear_score(c, inverse)).collect();
    softmax(&scores)
}

fn linear_score(coefficients: &[f64], inverse: &[f64]) -> f64 {
    coefficients[0] + coefficients[1..].iter().zip(inverse).map(|(w, q)| w * q).sum::<f64>()
}

fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Penalised maximum likelihood by Newton-Raphson with step halving.
///
/// Class 0 is the reference class with coefficients pinned at zero. Each
/// other class has an intercept plus one weight per inverse-odds column.
pub fn fit_multinomial_logistic(data: &TrainingSet) -> Result<FittedModel, GlmError> {
    if data.successes() != 1 {
        return Err(GlmError::InvalidTrainingSet(
            "multinomial logistic regression needs single-winner rows".into(),
        ));
    }
    let k = data.outcomes();
    let features = k + 1;
    let free = (k - 1) * features;
    let mut theta = DVector::<f64>::zeros(free);
    let mut current = penalised_objective(data, &theta);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_NEWTON_ITERATIONS {
        iterations += 1;
        let (gradient, hessian) = derivatives(data, &theta);
        let rhs = gradient - LOGISTIC_L2_PENALTY * &theta;
        let system = -hessian + DMatrix::identity(free, free) * LOGISTIC_L2_PENALTY;
        let Some(cholesky) = system.cholesky() else {
            break;
        };
        let step = cholesky.solve(&rhs);

        let mut scale = 1.0;
        let mut improved = None;
        for _ in 0..50 {
            let candidate = &theta + scale * &step;
            let value = penalised_objective(data, &candidate);
            if value.is_finite() && value >= current {
                improved = Some((candidate, value));
                break;
            }
            scale *= 0.5;
        }
        let Some((candidate, value)) = improved else {
            converged = step.amax() < STEP_TOLERANCE.sqrt();
            break;
        };
        let moved = (scale * &step).amax();
        theta = candidate;
        current = value;
        if moved < STEP_TOLERANCE {
            converged = true;
            break;
        }
    }
    if !converged || theta.iter().any(|v| !v.is_finite()) {
        return Err(GlmError::NoConvergence {
            model: Method::MultinomialLogistic,
            iterations,
        });
    }

    let coefficients = class_coefficients(&theta, k);
    let log_likelihood = log_likelihood(data, &coefficients);
    Ok(FittedModel {
        parameters: ModelParameters::MultinomialLogistic {
            coefficients,
            reference_class: 0,
        },
        log_likelihood,
        mean_normaliser: None,
        metadata: FitMetadata {
            rows: data.rows(),
            outcomes: k,
            successes: 1,
            iterations,
            optimizer: "newton".to_string(),
        },
    })
}

fn class_coefficients(theta: &DVector<f64>, k: usize) -> Vec<Vec<f64>> {
    let features = k + 1;
    std::iter::once(vec![0.0; features])
        .chain((0..k - 1).map(|c| theta.rows(c * features, features).iter().copied().collect()))
        .collect()
}

fn log_likelihood(data: &TrainingSet, coefficients: &[Vec<f64>]) -> f64 {
    (0..data.rows())
        .map(|i| {
            let scores: Vec<f64> = coefficients
                .iter()
                .map(|c| linear_score(c, data.inverse_row(i)))
                .collect();
            let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let log_total = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
            scores[data.winner(i)] - log_total
        })
        .sum()
}

fn penalised_objective(data: &TrainingSet, theta: &DVector<f64>) -> f64 {
    let coefficients = class_coefficients(theta, data.outcomes());
    log_likelihood(data, &coefficients) - 0.5 * LOGISTIC_L2_PENALTY * theta.norm_squared()
}

/// Gradient and Hessian of the unpenalised log-likelihood in the free
/// (non-reference) coefficients.
fn derivatives(data: &TrainingSet, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let k = data.outcomes();
    let features = k + 1;
    let free = (k - 1) * features;
    let coefficients = class_coefficients(theta, k);
    let mut gradient = DVector::zeros(free);
    let mut hessian = DMatrix::zeros(free, free);
    let mut x = vec![1.0; features];
    for i in 0..data.rows() {
        x[1..].copy_from_slice(data.inverse_row(i));
        let p = multinomial_probabilities(&coefficients, data.inverse_row(i));
        let winner = data.winner(i);
        for c in 1..k {
            let residual = if c == winner { 1.0 } else { 0.0 } - p[c];
            let row = (c - 1) * features;
            for a in 0..features {
                gradient[row + a] += residual * x[a];
            }
            for c2 in 1..k {
                let weight = p[c] * (if c == c2 { 1.0 } else { 0.0 } - p[c2]);
                let col = (c2 - 1) * features;
                for a in 0..features {
                    for b in 0..features {
                        hessian[(row + a, col + b)] -= weight * x[a] * x[b];
                    }
                }
            }
        }
    }
    (gradient, hessian)
}
