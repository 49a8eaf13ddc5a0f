use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{StatsError, TestResult};

/// Pearson `r` with a two-tailed p-value from `t = r sqrt((n-2)/(1-r^2))`
/// on `n - 2` degrees of freedom. The statistic is `r`.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::ShapeMismatch(format!("{} x values and {} y values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewObservations { needed: 3, got: n });
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if !(sxx > 0.0) {
        return Err(StatsError::ZeroVariance("x"));
    }
    if !(syy > 0.0) {
        return Err(StatsError::ZeroVariance("y"));
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df is positive");
        2.0 * dist.sf(t.abs())
    };
    Ok(TestResult::new(r, p))
}
