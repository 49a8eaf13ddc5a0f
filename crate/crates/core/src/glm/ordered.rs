//! Proportional-odds (ordered logistic) regression on inverse-odds features.
//!
//! Categories follow column order. With `eta = w . q` and thresholds
//! `theta_0 < .. < theta_{k-2}`, `P(category <= j) = logistic(theta_j - eta)`.

use super::optim::bfgs_minimize;
use super::{FitMetadata, FittedModel, GlmError, ModelParameters, TrainingSet, LOGISTIC_L2_PENALTY};
use crate::odds::Method;

const MAX_ITERATIONS: usize = 2_000;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn ordered_probabilities(coefficients: &[f64], thresholds: &[f64], inverse: &[f64]) -> Vec<f64> {
    let eta: f64 = coefficients.iter().zip(inverse).map(|(w, q)| w * q).sum();
    let k = thresholds.len() + 1;
    (0..k).map(|category| category_probability(thresholds, eta, category)).collect()
}

fn category_probability(thresholds: &[f64], eta: f64, category: usize) -> f64 {
    let last = thresholds.len();
    match category {
        0 => logistic(thresholds[0] - eta),
        c if c == last => logistic(eta - thresholds[last - 1]),
        c => logistic(thresholds[c] - eta) - logistic(thresholds[c - 1] - eta),
    }
}

/// Maps the unconstrained gap parameters to strictly increasing thresholds.
fn thresholds_from(gaps: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(gaps.len());
    let mut acc = 0.0;
    for (j, g) in gaps.iter().enumerate() {
        acc = if j == 0 { *g } else { acc + g.exp() };
        out.push(acc);
    }
    out
}

pub fn fit_ordered_logistic(data: &TrainingSet) -> Result<FittedModel, GlmError> {
    if data.successes() != 1 {
        return Err(GlmError::InvalidTrainingSet(
            "ordered logistic regression needs single-winner rows".into(),
        ));
    }
    let k = data.outcomes();
    let n = data.rows();

    // Start from w = 0 and thresholds at smoothed cumulative frequencies.
    let mut counts = vec![0.5; k];
    for i in 0..n {
        counts[data.winner(i)] += 1.0;
    }
    let total: f64 = counts.iter().sum();
    let mut cumulative = 0.0;
    let mut start = vec![0.0; k];
    let mut previous = 0.0;
    for j in 0..k - 1 {
        cumulative += counts[j] / total;
        let theta = (cumulative / (1.0 - cumulative)).ln();
        start.push(if j == 0 { theta } else { (theta - previous).ln() });
        previous = theta;
    }

    let objective = |params: &[f64]| negative_log_likelihood(data, params);
    let result = bfgs_minimize(objective, start, 1e-8 * n.max(1) as f64, MAX_ITERATIONS);
    if !result.converged || result.x.iter().any(|v| !v.is_finite()) {
        return Err(GlmError::NoConvergence {
            model: Method::OrderedLogistic,
            iterations: result.iterations,
        });
    }

    let coefficients = result.x[..k].to_vec();
    let thresholds = thresholds_from(&result.x[k..]);
    let log_likelihood = (0..n)
        .map(|i| {
            let eta: f64 = coefficients.iter().zip(data.inverse_row(i)).map(|(w, q)| w * q).sum();
            category_probability(&thresholds, eta, data.winner(i)).ln()
        })
        .sum();
    Ok(FittedModel {
        parameters: ModelParameters::OrderedLogistic {
            coefficients,
            thresholds,
        },
        log_likelihood,
        mean_normaliser: None,
        metadata: FitMetadata {
            rows: n,
            outcomes: k,
            successes: 1,
            iterations: result.iterations,
            optimizer: "bfgs".to_string(),
        },
    })
}

/// Penalised negative log-likelihood and its gradient in `(w, gaps)`.
fn negative_log_likelihood(data: &TrainingSet, params: &[f64]) -> (f64, Vec<f64>) {
    let k = data.outcomes();
    let (weights, gaps) = params.split_at(k);
    let thresholds = thresholds_from(gaps);
    let mut value = 0.0;
    let mut grad_w = vec![0.0; k];
    let mut grad_theta = vec![0.0; k - 1];

    for i in 0..data.rows() {
        let q = data.inverse_row(i);
        let eta: f64 = weights.iter().zip(q).map(|(w, x)| w * x).sum();
        let category = data.winner(i);
        let p = category_probability(&thresholds, eta, category);
        if !(p > 0.0) {
            return (f64::INFINITY, vec![0.0; params.len()]);
        }
        value -= p.ln();

        let density = |j: usize| {
            let f = logistic(thresholds[j] - eta);
            f * (1.0 - f)
        };
        let upper = (category < k - 1).then(|| density(category));
        let lower = (category > 0).then(|| density(category - 1));
        // d(-ln p)/d theta and d(-ln p)/d eta
        if let Some(f) = upper {
            grad_theta[category] -= f / p;
        }
        if let Some(f) = lower {
            grad_theta[category - 1] += f / p;
        }
        let d_eta = (upper.unwrap_or(0.0) - lower.unwrap_or(0.0)) / p;
        for (g, x) in grad_w.iter_mut().zip(q) {
            *g += d_eta * x;
        }
    }

    value += 0.5
        * LOGISTIC_L2_PENALTY
        * (weights.iter().map(|w| w * w).sum::<f64>() + thresholds.iter().map(|t| t * t).sum::<f64>());
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g += LOGISTIC_L2_PENALTY * w;
    }
    for (g, t) in grad_theta.iter_mut().zip(&thresholds) {
        *g += LOGISTIC_L2_PENALTY * t;
    }

    // Chain rule: theta_j = a_0 + sum_{1 <= m <= j} exp(a_m).
    let mut grad_gaps = vec![0.0; k - 1];
    let mut tail = 0.0;
    for m in (0..k - 1).rev() {
        tail += grad_theta[m];
        grad_gaps[m] = if m == 0 { tail } else { tail * gaps[m].exp() };
    }

    grad_w.extend(grad_gaps);
    (value, grad_w)
}
