//! Seeded Monte Carlo driver for full protocol runs.

mod histogram;
mod persist;
mod sweep;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

pub use histogram::{failure_histogram, EstimateHistogram};
pub use persist::{load, persist, sidecar_path, SCHEMA_VERSION};
pub use sweep::{
    predicted_delta, sweep, GridPoint, SweepAxis, SweepConfigEcho, SweepMetadata, SweepPoint,
    SweepResult, SweepRun, SweepSpec,
};

use crate::error::{Result, RpeError};
use crate::estimator::{self, claimed_half_width, DegeneratePolicy, Observation, RpeResult};
use crate::rng::sequence_stream;
use crate::sim::{run_sequence, GateSpec, NoiseConfig, SequenceStart};

/// Longest supported run: sequences up to `2^20` gates.
pub const MAX_EXPONENT: usize = 20;

/// Samples per generation: one value for all, or one per generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleSchedule {
    Constant(u32),
    PerGeneration(Vec<u32>),
}

impl SampleSchedule {
    pub fn samples(&self, generation: usize) -> u32 {
        match self {
            Self::Constant(m) => *m,
            Self::PerGeneration(v) => v[generation - 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degenerate {
    #[default]
    Flag,
    Strict,
}

impl From<Degenerate> for DegeneratePolicy {
    fn from(d: Degenerate) -> Self {
        match d {
            Degenerate::Flag => DegeneratePolicy::Flag,
            Degenerate::Strict => DegeneratePolicy::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    /// `log2` of the longest sequence; generations run `n = 1, 2, …, 2^L`.
    pub max_exponent: usize,
    pub samples: SampleSchedule,
    pub gate: GateSpec,
    pub noise: NoiseConfig,
    pub theta_ref: f64,
    pub seed: u64,
    pub degenerate: Degenerate,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            max_exponent: 7,
            samples: SampleSchedule::Constant(32),
            gate: GateSpec {
                theta_actual: FRAC_PI_2,
            },
            noise: NoiseConfig::noiseless(),
            theta_ref: FRAC_PI_2,
            seed: 0,
            degenerate: Degenerate::Flag,
        }
    }
}

impl TrialConfig {
    pub fn generations(&self) -> usize {
        self.max_exponent + 1
    }

    pub fn longest_sequence(&self) -> u64 {
        1u64 << self.max_exponent
    }

    pub fn half_width(&self) -> f64 {
        claimed_half_width(self.generations())
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_exponent > MAX_EXPONENT {
            return Err(RpeError::InvalidArgument(format!(
                "max_exponent {} exceeds {MAX_EXPONENT}",
                self.max_exponent
            )));
        }
        match &self.samples {
            SampleSchedule::Constant(0) => {
                return Err(RpeError::InvalidArgument("samples must be >= 1".into()))
            }
            SampleSchedule::PerGeneration(v) => {
                if v.len() != self.generations() {
                    return Err(RpeError::InvalidArgument(format!(
                        "sample schedule has {} entries, need {}",
                        v.len(),
                        self.generations()
                    )));
                }
                if v.contains(&0) {
                    return Err(RpeError::InvalidArgument("samples must be >= 1".into()));
                }
            }
            SampleSchedule::Constant(_) => {}
        }
        GateSpec::new(self.gate.theta_actual)?;
        if !self.theta_ref.is_finite() {
            return Err(RpeError::InvalidArgument("theta_ref must be finite".into()));
        }
        self.noise.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial_index: u64,
    pub result: RpeResult,
    pub success: bool,
    /// For failed trials, the first generation whose estimate left its
    /// claimed range `π/2^j` around the reference.
    pub first_failure_generation: Option<usize>,
}

/// Runs one full protocol: an x- and a y-sequence at every generation, then
/// the estimator, scored against `theta_ref`.
pub fn run_trial(config: &TrialConfig, trial_index: u64) -> Result<TrialOutcome> {
    config.validate()?;
    let mut observations = Vec::with_capacity(config.generations());
    for generation in 1..=config.generations() {
        let n = estimator::repetitions(generation);
        let m = config.samples.samples(generation);
        let count = |start| {
            let mut rng = sequence_stream(config.seed, trial_index, generation, start);
            run_sequence(n, start, m, &config.gate, &config.noise, &mut rng)
        };
        let x = count(SequenceStart::FromZero)?;
        let y = count(SequenceStart::FromPlus)?;
        observations.push(Observation::new(
            generation,
            f64::from(x),
            f64::from(y),
            f64::from(m),
        ));
    }
    let result = estimator::estimate(&observations, config.degenerate.into())?;
    let success = estimator::is_success(result.theta_est, config.theta_ref, config.max_exponent);
    let first_failure_generation = if success {
        None
    } else {
        result
            .steps
            .iter()
            .find(|s| {
                estimator::circular_distance(s.theta_hat, config.theta_ref)
                    > claimed_half_width(s.generation)
            })
            .map(|s| s.generation)
    };
    Ok(TrialOutcome {
        trial_index,
        result,
        success,
        first_failure_generation,
    })
}
