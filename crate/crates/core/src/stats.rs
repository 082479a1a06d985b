//! Small statistical helpers shared by the Monte Carlo estimators.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Half-width of the Wilson score interval at 95% for `successes` out of
/// `trials`. Returns the half-width around the Wilson centre.
pub fn wilson_half_width(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom
}

/// Wilson 95% interval `(low, high)`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let hw = wilson_half_width(successes, trials);
    let lo = if successes == 0 { 0.0 } else { (centre - hw).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + hw).min(1.0) };
    (lo, hi)
}

/// Mean and standard error of the mean (sample standard deviation over
/// `sqrt(n)`), summed in slice order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Natural-log binary entropy with `0 ln 0 = 0`.
pub fn binary_entropy(t: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(t) + term(1.0 - t)
}
