//! Small deterministic optimisers used by the model fits.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy)]
pub(crate) struct ScalarMaximum {
    pub x: f64,
    pub evaluations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
///
/// Returns `Err(x)` with the offending abscissa if `f` is not finite there.
pub(crate) fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<ScalarMaximum, f64>
where
    F: FnMut(f64) -> f64,
{
    let mut eval = |x: f64, n: &mut usize| {
        *n += 1;
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(x)
        }
    };
    let mut evaluations = 0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut evaluations)?;
    let mut fd = eval(d, &mut evaluations)?;
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c, &mut evaluations)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d, &mut evaluations)?;
        }
    }
    let x = if fc >= fd { c } else { d };
    Ok(ScalarMaximum { x, evaluations })
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// BFGS with Armijo backtracking for a smooth objective returning
/// `(value, gradient)`. Converges when the gradient's max-norm drops below
/// `gradient_tol` or a step no longer changes the value.
pub(crate) fn bfgs_minimize<F>(mut objective: F, start: Vec<f64>, gradient_tol: f64, max_iterations: usize) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = start.len();
    let mut x = start;
    let (mut fx, mut g) = objective(&x);
    let mut h = identity(n);
    let max_norm = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));

    for iteration in 0..max_iterations {
        if !fx.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Minimum {
                x,
                iterations: iteration,
                converged: false,
            };
        }
        if max_norm(&g) < gradient_tol {
            return Minimum {
                x,
                iterations: iteration,
                converged: true,
            };
        }
        let mut direction: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&direction, &g);
        if slope >= 0.0 {
            // Lost positive definiteness; restart from steepest descent.
            h = identity(n);
            direction = g.iter().map(|v| -v).collect();
            slope = dot(&direction, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&direction).map(|(a, d)| a + step * d).collect();
            let (ft, gt) = objective(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next, g_next)) = accepted else {
            // No decrease representable in floating point: at the optimum.
            return Minimum {
                x,
                iterations: iteration,
                converged: max_norm(&g) < gradient_tol.sqrt(),
            };
        };

        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        let unchanged = f_next == fx;
        x = next;
        fx = f_next;
        g = g_next;
        if unchanged {
            return Minimum {
                x,
                iterations: iteration + 1,
                converged: max_norm(&g) < gradient_tol.sqrt(),
            };
        }
    }
    Minimum {
        converged: max_norm(&g) < gradient_tol,
        x,
        iterations: max_iterations,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
