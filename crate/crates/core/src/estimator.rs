//! The phase estimator: per-generation arctangent angles, refined across
//! generations `n = 1, 2, 4, …` by picking the branch nearest the previous
//! estimate.
//!
//! Counts are `f64` so exact expected counts can be fed in directly; the
//! simulator path always supplies whole numbers.

use std::f64::consts::{PI, TAU};

use crate::error::{Result, RpeError};

const TIE_TOL: f64 = 1e-12;

/// Maps an angle to `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed offset `b − a` folded into `(−π, π]`.
pub fn signed_offset(a: f64, b: f64) -> f64 {
    let d = (b - a).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    signed_offset(a, b).abs()
}

/// Sequence length for a 1-based generation index.
pub fn repetitions(generation: usize) -> u64 {
    1u64 << (generation - 1)
}

/// Half-width of the final confidence interval after `generations` steps,
/// `π / 2^generations`, i.e. `π / (2 n_max)`.
pub fn claimed_half_width(generations: usize) -> f64 {
    PI / 2f64.powi(generations as i32)
}

/// Bright counts for one generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub generation: usize,
    pub x: f64,
    pub y: f64,
    pub samples: f64,
}

impl Observation {
    pub fn new(generation: usize, x: f64, y: f64, samples: f64) -> Self {
        Self {
            generation,
            x,
            y,
            samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub generation: usize,
    pub repetitions: u64,
    pub samples: f64,
    pub x: f64,
    pub y: f64,
    /// `nθ mod 2π` as read from this generation alone.
    pub raw_angle: f64,
    pub theta_hat: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RpeResult {
    pub steps: Vec<StepRecord>,
    pub theta_est: f64,
    pub half_width: f64,
    pub degenerate_steps: Vec<usize>,
}

impl RpeResult {
    /// `log2` of the longest sequence.
    pub fn max_exponent(&self) -> usize {
        self.steps.len() - 1
    }
}

/// What to do when `x = y = M/2` leaves the angle undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Use angle 0 and record the generation.
    #[default]
    Flag,
    /// Fail with [`RpeError::Degenerate`].
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepAngle {
    pub angle: f64,
    pub degenerate: bool,
}

/// `atan2(y − M/2, M/2 − x)` in `[0, 2π)`.
pub fn step_angle(x: f64, y: f64, samples: f64) -> Result<StepAngle> {
    if !(samples > 0.0 && samples.is_finite()) {
        return Err(RpeError::InvalidArgument(format!(
            "samples must be positive, got {samples}"
        )));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if !(0.0..=samples).contains(&v) {
            return Err(RpeError::InvalidArgument(format!(
                "{name} = {v} outside [0, {samples}]"
            )));
        }
    }
    let sin_part = y - samples / 2.0;
    let cos_part = samples / 2.0 - x;
    if sin_part == 0.0 && cos_part == 0.0 {
        return Ok(StepAngle {
            angle: 0.0,
            degenerate: true,
        });
    }
    Ok(StepAngle {
        angle: wrap_angle(sin_part.atan2(cos_part)),
        degenerate: false,
    })
}

/// The `n = 2^(generation−1)` values of θ consistent with `nθ ≡ raw_angle`.
pub fn candidates(raw_angle: f64, generation: usize) -> Vec<f64> {
    let n = repetitions(generation);
    (0..n)
        .map(|k| (raw_angle + TAU * k as f64) / n as f64)
        .collect()
}

/// Picks the candidate closest (on the circle) to `prev`. An exact tie at
/// distance `π/n` resolves to `prev + π/n`.
pub fn refine(prev: f64, raw_angle: f64, generation: usize) -> f64 {
    let mut best = f64::NAN;
    let mut best_offset = f64::INFINITY;
    for c in candidates(raw_angle, generation) {
        let d = signed_offset(prev, c);
        let closer = d.abs() < best_offset.abs() - TIE_TOL;
        let tie_to_positive = (d.abs() - best_offset.abs()).abs() <= TIE_TOL && d > best_offset;
        if closer || tie_to_positive {
            best = c;
            best_offset = d;
        }
    }
    wrap_angle(best)
}

/// Runs the full estimator over generations `1..=L`.
pub fn estimate(observations: &[Observation], policy: DegeneratePolicy) -> Result<RpeResult> {
    if observations.is_empty() {
        return Err(RpeError::InvalidArgument("no observations".into()));
    }
    if observations.len() > 62 {
        return Err(RpeError::InvalidArgument(format!(
            "{} generations exceed the supported maximum of 62",
            observations.len()
        )));
    }
    let mut steps: Vec<StepRecord> = Vec::with_capacity(observations.len());
    let mut degenerate_steps = Vec::new();
    for (idx, obs) in observations.iter().enumerate() {
        let generation = idx + 1;
        if obs.generation != generation {
            return Err(RpeError::InvalidArgument(format!(
                "expected generation {generation}, found {}",
                obs.generation
            )));
        }
        let sa = step_angle(obs.x, obs.y, obs.samples)?;
        if sa.degenerate {
            if policy == DegeneratePolicy::Strict {
                return Err(RpeError::Degenerate { generation });
            }
            degenerate_steps.push(generation);
        }
        let theta_hat = match steps.last() {
            None => sa.angle,
            Some(prev) => {
                let refined = refine(prev.theta_hat, sa.angle, generation);
                let bound = PI / repetitions(generation) as f64 + TIE_TOL;
                assert!(
                    circular_distance(refined, prev.theta_hat) <= bound,
                    "refinement moved {} > {bound}",
                    circular_distance(refined, prev.theta_hat)
                );
                refined
            }
        };
        steps.push(StepRecord {
            generation,
            repetitions: repetitions(generation),
            samples: obs.samples,
            x: obs.x,
            y: obs.y,
            raw_angle: sa.angle,
            theta_hat,
            degenerate: sa.degenerate,
        });
    }
    let theta_est = steps.last().map(|s| s.theta_hat).unwrap_or_default();
    Ok(RpeResult {
        half_width: claimed_half_width(steps.len()),
        theta_est,
        steps,
        degenerate_steps,
    })
}

/// Success iff `theta_est` lies within `π / 2^(max_exponent+1)` of
/// `theta_ref` on the circle. `max_exponent` is `log2` of the longest
/// sequence, so 7 (sequences up to 128 gates) gives `π/256`.
pub fn is_success(theta_est: f64, theta_ref: f64, max_exponent: usize) -> bool {
    circular_distance(theta_est, theta_ref) <= claimed_half_width(max_exponent + 1)
}

/// Expected counts for an ideal gate of angle `theta`, `M` samples each,
/// over `generations` generations.
pub fn expected_observations(theta: f64, samples: f64, generations: usize) -> Vec<Observation> {
    (1..=generations)
        .map(|g| {
            let nt = repetitions(g) as f64 * theta;
            Observation::new(
                g,
                samples * (1.0 - nt.cos()) / 2.0,
                samples * (1.0 + nt.sin()) / 2.0,
                samples,
            )
        })
        .collect()
}
