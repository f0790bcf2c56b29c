use crate::error::{Result, RpeError};
use crate::estimator::{circular_distance, claimed_half_width, signed_offset, RpeResult};

/// Bins per claimed half-width.
const BINS_PER_HALF_WIDTH: usize = 4;
/// Histogram span on each side of the reference, in half-widths.
const SPAN_HALF_WIDTHS: usize = 8;

/// Distribution of final estimates around a reference angle.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateHistogram {
    pub theta_ref: f64,
    pub half_width: f64,
    /// Left edge of the first bin, as an absolute angle (may be negative).
    pub lower_edge: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    /// Estimates below / above the binned span.
    pub below: u64,
    pub above: u64,
    pub total: u64,
    pub failures: u64,
    /// Failures no further than two half-widths from the reference.
    pub failures_within_twice: u64,
}

impl EstimateHistogram {
    pub fn success_bounds(&self) -> (f64, f64) {
        (
            self.theta_ref - self.half_width,
            self.theta_ref + self.half_width,
        )
    }

    pub fn bin_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.counts.len()).map(|i| self.lower_edge + (i as f64 + 0.5) * self.bin_width)
    }

    /// `None` when nothing failed.
    pub fn fraction_failures_within_twice(&self) -> Option<f64> {
        (self.failures > 0).then(|| self.failures_within_twice as f64 / self.failures as f64)
    }
}

/// Bins final estimates within ±8 half-widths of `theta_ref`, where the
/// half-width is `π/2^(max_exponent+1)`.
pub fn failure_histogram(
    results: &[RpeResult],
    theta_ref: f64,
    max_exponent: usize,
) -> Result<EstimateHistogram> {
    if results.is_empty() {
        return Err(RpeError::InvalidArgument("no results to histogram".into()));
    }
    let half_width = claimed_half_width(max_exponent + 1);
    let bin_width = half_width / BINS_PER_HALF_WIDTH as f64;
    let nbins = 2 * SPAN_HALF_WIDTHS * BINS_PER_HALF_WIDTH;
    let span = SPAN_HALF_WIDTHS as f64 * half_width;
    let mut h = EstimateHistogram {
        theta_ref,
        half_width,
        lower_edge: theta_ref - span,
        bin_width,
        counts: vec![0; nbins],
        below: 0,
        above: 0,
        total: results.len() as u64,
        failures: 0,
        failures_within_twice: 0,
    };
    for r in results {
        let offset = signed_offset(theta_ref, r.theta_est);
        let dist = circular_distance(theta_ref, r.theta_est);
        if dist > half_width {
            h.failures += 1;
            if dist <= 2.0 * half_width {
                h.failures_within_twice += 1;
            }
        }
        if offset < -span {
            h.below += 1;
        } else if offset >= span {
            h.above += 1;
        } else {
            let bin = ((offset + span) / bin_width).floor() as usize;
            h.counts[bin.min(nbins - 1)] += 1;
        }
    }
    Ok(h)
}
