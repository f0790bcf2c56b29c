//! Analytic additive-error predictors for each injected error source.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Result, RpeError};
use crate::sim::DetectorModel;

/// Largest additive error the estimator tolerates, `1/√8`.
pub const DELTA_BOUND: f64 = 0.353553390593274;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSource {
    Measurement,
    Preparation,
    PhaseDamping,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub value: f64,
    pub source: ErrorSource,
    pub exceeds_bound: bool,
}

impl DeltaEstimate {
    pub fn new(value: f64, source: ErrorSource) -> Self {
        let value = value.clamp(0.0, 1.0);
        Self {
            value,
            source,
            exceeds_bound: value > DELTA_BOUND,
        }
    }
}

/// Preparation infidelity versus pumping time, `E(t) = a·e^(−b·t) + c`
/// with `t` in microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepCurve {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for PrepCurve {
    fn default() -> Self {
        Self {
            a: 0.95,
            b: 1.5,
            c: 0.025,
        }
    }
}

impl PrepCurve {
    pub fn validate(&self) -> Result<()> {
        if self.a < 0.0 || self.b < 0.0 || self.c < 0.0 || self.a + self.c > 1.0 {
            return Err(RpeError::InvalidArgument(format!(
                "prep curve needs a, b, c >= 0 and a + c <= 1, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn infidelity(&self, t_us: f64) -> f64 {
        (self.a * (-self.b * t_us).exp() + self.c).clamp(0.0, 1.0)
    }
}

/// `P(K <= k)` for `K ~ Poisson(mean)`; `k = −1` gives 0.
///
/// Terms are accumulated in log space so large means do not underflow.
pub fn poisson_cdf(k: i64, mean: f64) -> Result<f64> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(RpeError::InvalidArgument(format!(
            "poisson mean must be finite and >= 0, got {mean}"
        )));
    }
    if k < -1 {
        return Err(RpeError::InvalidArgument(format!(
            "k must be >= -1, got {k}"
        )));
    }
    if k < 0 {
        return Ok(0.0);
    }
    if mean == 0.0 {
        return Ok(1.0);
    }
    let ln_mean = mean.ln();
    let mut log_terms = Vec::with_capacity(k as usize + 1);
    let mut log_term = -mean;
    log_terms.push(log_term);
    for i in 1..=k {
        log_term += ln_mean - (i as f64).ln();
        log_terms.push(log_term);
    }
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: f64 = log_terms.iter().map(|t| (t - peak).exp()).sum();
    Ok((peak + scaled.ln()).exp().min(1.0))
}

/// Probability a dark outcome reads bright at this threshold.
pub fn dark_misread(detector: &DetectorModel) -> Result<f64> {
    Ok(1.0 - poisson_cdf(i64::from(detector.threshold) - 1, detector.dark_mean)?)
}

/// Probability a bright outcome reads dark, including the dark-like tail.
pub fn bright_misread(detector: &DetectorModel) -> Result<f64> {
    let below = i64::from(detector.threshold) - 1;
    let q = detector.bright_tail_fraction;
    Ok(q * poisson_cdf(below, detector.dark_mean)?
        + (1.0 - q) * poisson_cdf(below, detector.bright_mean)?)
}

/// Pessimistic readout error: the larger of the two misread probabilities.
pub fn delta_meas(detector: &DetectorModel) -> Result<DeltaEstimate> {
    detector.validate()?;
    let value = dark_misread(detector)?.max(bright_misread(detector)?);
    Ok(DeltaEstimate::new(value, ErrorSource::Measurement))
}

pub fn delta_prep(t_us: f64, curve: &PrepCurve) -> Result<DeltaEstimate> {
    if !(t_us >= 0.0 && t_us.is_finite()) {
        return Err(RpeError::InvalidArgument(format!(
            "preparation time must be >= 0 µs, got {t_us}"
        )));
    }
    curve.validate()?;
    Ok(DeltaEstimate::new(
        curve.infidelity(t_us),
        ErrorSource::Preparation,
    ))
}

/// Contrast loss after `n` gates with per-gate damping `lambda`:
/// `(1 − (1 − λ)^(n/4)) / 2`.
///
/// The damping map shrinks the Bloch x-component by `√(1−λ)` per gate while
/// z is untouched; a rotating state spends half its time along each, so the
/// Bloch length decays as `(1−λ)^(1/4)` per gate. This is exact for
/// `θ = π/2` with `n` even.
pub fn delta_phase_damping(lambda: f64, n: u64) -> Result<DeltaEstimate> {
    check_probability("phase damping", lambda)?;
    if n == 0 {
        return Err(RpeError::InvalidArgument(
            "sequence length must be >= 1".into(),
        ));
    }
    let survival = (1.0 - lambda).powf(n as f64 / 4.0);
    Ok(DeltaEstimate::new(
        (1.0 - survival) / 2.0,
        ErrorSource::PhaseDamping,
    ))
}

/// Per-gate damping at a relative intensity of `db`, scaling linearly with
/// intensity from `lambda_ref` at 0 dB, clamped to `[0, 1]`.
///
/// `lambda_ref` is a scale factor and may exceed 1 when only attenuated
/// settings are physical.
pub fn db_to_lambda(db: f64, lambda_ref: f64) -> Result<f64> {
    if !(lambda_ref >= 0.0 && lambda_ref.is_finite()) {
        return Err(RpeError::InvalidArgument(format!(
            "lambda_ref must be finite and >= 0, got {lambda_ref}"
        )));
    }
    Ok((lambda_ref * 10f64.powf(db / 10.0)).clamp(0.0, 1.0))
}

/// The per-gate damping whose contrast loss after `n` gates is `delta`.
pub fn lambda_for_delta(delta: f64, n: u64) -> Result<f64> {
    if !(0.0..0.5).contains(&delta) || n == 0 {
        return Err(RpeError::InvalidArgument(format!(
            "need 0 <= delta < 1/2 and n >= 1, got delta = {delta}, n = {n}"
        )));
    }
    Ok(1.0 - (1.0 - 2.0 * delta).powf(4.0 / n as f64))
}

/// The 0 dB scale that puts the contrast loss at `delta` for `n` gates when
/// attenuated by `db`.
pub fn lambda_ref_for_delta(delta: f64, n: u64, db: f64) -> Result<f64> {
    Ok(lambda_for_delta(delta, n)? / 10f64.powf(db / 10.0))
}

/// The lowest threshold minimising [`delta_meas`] over `0..=max_threshold`.
pub fn optimal_threshold(detector: &DetectorModel, max_threshold: u32) -> Result<u32> {
    let mut best = (0, f64::INFINITY);
    for t in 0..=max_threshold {
        let v = delta_meas(&detector.with_threshold(t))?.value;
        if v < best.1 {
            best = (t, v);
        }
    }
    Ok(best.0)
}
