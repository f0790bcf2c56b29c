use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_trial, SampleSchedule, TrialConfig, TrialOutcome};
use crate::error::{Result, RpeError};
use crate::noise::{self, PrepCurve};
use crate::stats::{wilson_interval, Z_95};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Detector threshold in photons.
    Threshold,
    /// Preparation duration in µs, mapped through the prep curve.
    PrepTime,
    /// Damping-light intensity in dB relative to `lambda_ref`.
    LambdaDb,
    /// Constant samples per generation.
    Samples,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Threshold => "threshold",
            Self::PrepTime => "prep_time_us",
            Self::LambdaDb => "lambda_db",
            Self::Samples => "samples",
        }
    }

    fn check(self, value: f64) -> Result<()> {
        let ok = match self {
            Self::Threshold => value >= 0.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX),
            Self::PrepTime => value >= 0.0 && value.is_finite(),
            Self::LambdaDb => value.is_finite(),
            Self::Samples => value >= 1.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX),
        };
        if ok {
            Ok(())
        } else {
            Err(RpeError::InvalidArgument(format!(
                "{value} is not a valid {} value",
                self.name()
            )))
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = RpeError;

    fn from_str(s: &str) -> Result<Self> {
        [
            Self::Threshold,
            Self::PrepTime,
            Self::LambdaDb,
            Self::Samples,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| RpeError::InvalidArgument(format!("unknown sweep axis '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub primary: f64,
    pub secondary: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub primary: SweepAxis,
    pub secondary: Option<SweepAxis>,
    pub grid: Vec<GridPoint>,
    pub trials_per_point: u64,
    pub prep_curve: PrepCurve,
    /// Per-gate damping at 0 dB.
    pub lambda_ref: f64,
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl SweepSpec {
    pub fn one_axis(axis: SweepAxis, values: &[f64], trials_per_point: u64) -> Self {
        Self {
            primary: axis,
            secondary: None,
            grid: values
                .iter()
                .map(|&v| GridPoint {
                    primary: v,
                    secondary: None,
                })
                .collect(),
            trials_per_point,
            prep_curve: PrepCurve::default(),
            lambda_ref: 0.0,
            threads: None,
        }
    }

    /// Row-major product grid: the secondary value varies slowest.
    pub fn two_axis(
        primary: SweepAxis,
        primary_values: &[f64],
        secondary: SweepAxis,
        secondary_values: &[f64],
        trials_per_point: u64,
    ) -> Self {
        let grid = secondary_values
            .iter()
            .flat_map(|&s| {
                primary_values.iter().map(move |&p| GridPoint {
                    primary: p,
                    secondary: Some(s),
                })
            })
            .collect();
        Self {
            primary,
            secondary: Some(secondary),
            grid,
            trials_per_point,
            prep_curve: PrepCurve::default(),
            lambda_ref: 0.0,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(RpeError::InvalidArgument("sweep grid is empty".into()));
        }
        if self.trials_per_point == 0 {
            return Err(RpeError::InvalidArgument(
                "trials_per_point must be >= 1".into(),
            ));
        }
        if self.secondary == Some(self.primary) {
            return Err(RpeError::InvalidArgument("sweep axes must differ".into()));
        }
        for p in &self.grid {
            self.primary.check(p.primary)?;
            match (self.secondary, p.secondary) {
                (Some(axis), Some(v)) => axis.check(v)?,
                (None, None) => {}
                _ => {
                    return Err(RpeError::InvalidArgument(
                        "grid point secondary values must match the secondary axis".into(),
                    ))
                }
            }
        }
        self.prep_curve.validate()?;
        noise::db_to_lambda(0.0, self.lambda_ref)?;
        Ok(())
    }

    fn apply(&self, axis: SweepAxis, value: f64, cfg: &mut TrialConfig) -> Result<()> {
        match axis {
            SweepAxis::Threshold => {
                let det = cfg.noise.detector.unwrap_or_default();
                cfg.noise.detector = Some(det.with_threshold(value as u32));
            }
            SweepAxis::PrepTime => {
                cfg.noise.prep_error = noise::delta_prep(value, &self.prep_curve)?.value;
            }
            SweepAxis::LambdaDb => {
                cfg.noise.phase_damping_per_gate = noise::db_to_lambda(value, self.lambda_ref)?;
            }
            SweepAxis::Samples => cfg.samples = SampleSchedule::Constant(value as u32),
        }
        Ok(())
    }

    /// The trial configuration at one grid point.
    pub fn materialize(&self, base: &TrialConfig, point: &GridPoint) -> Result<TrialConfig> {
        let mut cfg = base.clone();
        self.apply(self.primary, point.primary, &mut cfg)?;
        if let (Some(axis), Some(v)) = (self.secondary, point.secondary) {
            self.apply(axis, v, &mut cfg)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Worst predicted additive error over the sources active in `cfg`.
pub fn predicted_delta(cfg: &TrialConfig) -> Result<f64> {
    let meas = match &cfg.noise.detector {
        Some(d) => noise::delta_meas(d)?.value,
        None => 0.0,
    };
    let damping =
        noise::delta_phase_damping(cfg.noise.phase_damping_per_gate, cfg.longest_sequence())?.value;
    Ok(meas.max(cfg.noise.prep_error).max(damping))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_name: String,
    pub axis_value: f64,
    pub secondary_axis_value: Option<f64>,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub predicted_delta: f64,
}

/// Everything needed to rerun a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfigEcho {
    pub base: TrialConfig,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub schema: String,
    pub code_version: String,
    pub seed: u64,
    pub primary_axis: SweepAxis,
    pub secondary_axis: Option<SweepAxis>,
    pub config: SweepConfigEcho,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub metadata: SweepMetadata,
}

/// A sweep's summary table plus every trial behind it, grouped by point.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub result: SweepResult,
    pub outcomes: Vec<Vec<TrialOutcome>>,
}

impl SweepRun {
    /// Failed trials per first-failing generation, per grid point.
    pub fn failures_by_generation(&self) -> Vec<Vec<u64>> {
        let generations = self.result.metadata.config.base.generations();
        self.outcomes
            .iter()
            .map(|trials| {
                let mut hist = vec![0u64; generations];
                for t in trials.iter().filter(|t| !t.success) {
                    if let Some(g) = t.first_failure_generation {
                        hist[g - 1] += 1;
                    }
                }
                hist
            })
            .collect()
    }
}

/// Runs `trials_per_point` trials at every grid point. Trial `t` of point
/// `p` uses trial index `p · trials_per_point + t`.
pub fn sweep(base: &TrialConfig, spec: &SweepSpec) -> Result<SweepRun> {
    spec.validate()?;
    base.validate()?;
    let configs = spec
        .grid
        .iter()
        .map(|p| spec.materialize(base, p))
        .collect::<Result<Vec<_>>>()?;

    let per = spec.trials_per_point;
    let jobs: Vec<(usize, u64)> = (0..configs.len())
        .flat_map(|p| (0..per).map(move |t| (p, p as u64 * per + t)))
        .collect();
    let run = || -> Result<Vec<TrialOutcome>> {
        jobs.par_iter()
            .map(|&(p, idx)| run_trial(&configs[p], idx))
            .collect()
    };
    let flat = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RpeError::InvalidArgument(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut outcomes: Vec<Vec<TrialOutcome>> = Vec::with_capacity(configs.len());
    let mut iter = flat.into_iter();
    for _ in 0..configs.len() {
        outcomes.push(iter.by_ref().take(per as usize).collect());
    }

    let points = spec
        .grid
        .iter()
        .zip(&configs)
        .zip(&outcomes)
        .map(|((gp, cfg), trials)| {
            let failures = trials.iter().filter(|t| !t.success).count() as u64;
            let (ci_low, ci_high) = wilson_interval(failures, per, Z_95);
            Ok(SweepPoint {
                axis_name: spec.primary.name().to_string(),
                axis_value: gp.primary,
                secondary_axis_value: gp.secondary,
                trials: per,
                failures,
                failure_rate: failures as f64 / per as f64,
                ci_low,
                ci_high,
                predicted_delta: predicted_delta(cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepRun {
        result: SweepResult {
            points,
            metadata: SweepMetadata {
                schema: super::SCHEMA_VERSION.to_string(),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                seed: base.seed,
                primary_axis: spec.primary,
                secondary_axis: spec.secondary,
                config: SweepConfigEcho {
                    base: base.clone(),
                    spec: SweepSpec {
                        threads: None,
                        ..spec.clone()
                    },
                },
            },
        },
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> TrialConfig {
        TrialConfig {
            seed: 17,
            ..TrialConfig::default()
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let b = base();
        assert!(sweep(&b, &SweepSpec::one_axis(SweepAxis::Threshold, &[], 1)).is_err());
        assert!(sweep(&b, &SweepSpec::one_axis(SweepAxis::Threshold, &[1.5], 1)).is_err());
        assert!(sweep(&b, &SweepSpec::one_axis(SweepAxis::Samples, &[0.0], 1)).is_err());
        assert!(sweep(&b, &SweepSpec::one_axis(SweepAxis::PrepTime, &[-1.0], 1)).is_err());
        assert!(sweep(&b, &SweepSpec::one_axis(SweepAxis::Threshold, &[2.0], 0)).is_err());
        assert!("nonsense".parse::<SweepAxis>().is_err());
        assert_eq!(
            "lambda_db".parse::<SweepAxis>().unwrap(),
            SweepAxis::LambdaDb
        );
    }

    #[test]
    fn materializes_each_axis() {
        let mut spec = SweepSpec::one_axis(SweepAxis::LambdaDb, &[-20.0], 1);
        spec.lambda_ref = 2.0;
        let cfg = spec.materialize(&base(), &spec.grid[0]).unwrap();
        assert!((cfg.noise.phase_damping_per_gate - 0.02).abs() < 1e-15);

        let spec = SweepSpec::two_axis(SweepAxis::PrepTime, &[0.7], SweepAxis::Samples, &[16.0], 1);
        let cfg = spec.materialize(&base(), &spec.grid[0]).unwrap();
        assert!((cfg.noise.prep_error - 0.357).abs() < 1e-3);
        assert_eq!(cfg.samples, SampleSchedule::Constant(16));

        let spec = SweepSpec::one_axis(SweepAxis::Threshold, &[5.0], 1);
        let cfg = spec.materialize(&base(), &spec.grid[0]).unwrap();
        assert_eq!(cfg.noise.detector.unwrap().threshold, 5);
    }

    #[test]
    fn aggregates_and_orders_points() {
        let spec = SweepSpec::one_axis(SweepAxis::Threshold, &[0.0, 2.0, 30.0], 20);
        let run = sweep(&base(), &spec).unwrap();
        let pts = &run.result.points;
        assert_eq!(pts.len(), 3);
        assert_eq!(
            pts.iter().map(|p| p.axis_value).collect::<Vec<_>>(),
            vec![0.0, 2.0, 30.0]
        );
        for p in pts {
            assert!(p.failures <= p.trials);
            assert!(p.ci_low <= p.failure_rate && p.failure_rate <= p.ci_high);
        }
        assert_eq!(pts[0].failures, 20);
        assert_eq!(pts[1].failures, 0);
        assert_eq!(pts[0].predicted_delta, 1.0);
        let idx: Vec<u64> = run.outcomes[1].iter().map(|t| t.trial_index).collect();
        assert_eq!(idx, (20..40).collect::<Vec<_>>());
    }

    #[test]
    fn generation_accounting_matches_failures() {
        let spec = SweepSpec::one_axis(SweepAxis::Threshold, &[0.0, 17.0, 18.0, 19.0, 22.0], 40);
        let run = sweep(&base(), &spec).unwrap();
        for (hist, p) in run.failures_by_generation().iter().zip(&run.result.points) {
            assert_eq!(hist.iter().sum::<u64>(), p.failures);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut spec = SweepSpec::one_axis(SweepAxis::Threshold, &[16.0, 18.0], 30);
        spec.threads = Some(1);
        let a = sweep(&base(), &spec).unwrap();
        spec.threads = Some(4);
        let b = sweep(&base(), &spec).unwrap();
        assert_eq!(a.result.points, b.result.points);
    }
}
