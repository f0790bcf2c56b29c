/// Two-sided 95 % normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `trials`, clamped to `[0, 1]`.
/// Zero trials yields the uninformative `(0, 1)`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let k = successes.min(trials);
    let n = trials as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let margin = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bound at an observed 0 % or 100 % is exact; don't leave rounding dust.
    let lo = if k == 0 {
        0.0
    } else {
        (center - margin).max(0.0)
    };
    let hi = if k == trials {
        1.0
    } else {
        (center + margin).min(1.0)
    };
    (lo, hi)
}
