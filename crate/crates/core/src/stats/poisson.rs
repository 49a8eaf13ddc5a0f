//! Exact two-tailed Poisson test for observed counts.

use statrs::function::gamma::{gamma_lr, gamma_ur};

use super::{StatsError, TestResult};

/// `P[X <= k]` for `X ~ Poisson(lambda)`.
pub fn poisson_cdf(k: u64, lambda: f64) -> f64 {
    gamma_ur(k as f64 + 1.0, lambda)
}

/// `P[X >= k]` for `X ~ Poisson(lambda)`.
pub fn poisson_sf_inclusive(k: u64, lambda: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        gamma_lr(k as f64, lambda)
    }
}

/// p-value `2 * min(P[X <= actual], P[X >= actual])` under
/// `Poisson(expected)`, clamped to 1. The statistic is `actual - expected`.
pub fn poisson_two_tailed_test(expected: f64, actual: u64) -> Result<TestResult, StatsError> {
    if !(expected.is_finite() && expected > 0.0) {
        return Err(StatsError::InvalidInput(format!("expected count {expected} must be positive")));
    }
    let lower = poisson_cdf(actual, expected);
    let upper = poisson_sf_inclusive(actual, expected);
    Ok(TestResult::new(actual as f64 - expected, 2.0 * lower.min(upper)))
}
