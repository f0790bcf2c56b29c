//! The TOML run configuration. Every key carries its unit where it has one;
//! every section and key is optional.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use rpe::harness::{SampleSchedule, TrialConfig};
use rpe::noise::PrepCurve;
use rpe::sim::{DetectorModel, GateSpec, NoiseConfig, PlusPrep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub trial: TrialSection,
    pub detector: DetectorSection,
    pub calibrate: CalibrateSection,
    pub sweep_detection: DetectionSection,
    pub sweep_prep: PrepSection,
    pub sweep_damping: DampingSection,
    pub histogram: HistogramSection,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 1,
            trial: TrialSection::default(),
            detector: DetectorSection::default(),
            calibrate: CalibrateSection::default(),
            sweep_detection: DetectionSection::default(),
            sweep_prep: PrepSection::default(),
            sweep_damping: DampingSection::default(),
            histogram: HistogramSection::default(),
        }
    }
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialSection {
    pub max_exponent: usize,
    pub theta_actual_rad: f64,
    pub theta_ref_rad: f64,
    pub plus_prep: PlusPrep,
}

impl Default for TrialSection {
    fn default() -> Self {
        Self {
            max_exponent: 7,
            theta_actual_rad: FRAC_PI_2,
            theta_ref_rad: FRAC_PI_2,
            plus_prep: PlusPrep::SelfPrep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub dark_mean_counts: f64,
    pub bright_mean_counts: f64,
    pub bright_tail_fraction: f64,
    pub threshold_counts: u32,
}

impl Default for DetectorSection {
    fn default() -> Self {
        let d = DetectorModel::default();
        Self {
            dark_mean_counts: d.dark_mean,
            bright_mean_counts: d.bright_mean,
            bright_tail_fraction: d.bright_tail_fraction,
            threshold_counts: d.threshold,
        }
    }
}

impl DetectorSection {
    pub fn model(&self) -> DetectorModel {
        DetectorModel {
            dark_mean: self.dark_mean_counts,
            bright_mean: self.bright_mean_counts,
            bright_tail_fraction: self.bright_tail_fraction,
            threshold: self.threshold_counts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateSection {
    pub samples: u32,
    pub trials: u64,
    /// Read outcomes directly instead of through the photon counter.
    pub ideal_detection: bool,
}

impl Default for CalibrateSection {
    fn default() -> Self {
        Self {
            samples: 128,
            trials: 1,
            ideal_detection: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectionSection {
    pub threshold_counts: Vec<u32>,
    pub samples: u32,
    pub trials: u64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        Self {
            threshold_counts: (0..=25).collect(),
            samples: 32,
            trials: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrepSection {
    pub prep_time_us: Vec<f64>,
    pub samples: Vec<u32>,
    pub trials: u64,
    /// `E(t) = amplitude · exp(−rate · t) + floor`.
    pub curve_amplitude: f64,
    pub curve_rate_per_us: f64,
    pub curve_floor: f64,
}

impl Default for PrepSection {
    fn default() -> Self {
        let c = PrepCurve::default();
        Self {
            prep_time_us: vec![0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 0.99],
            samples: vec![4, 8, 16, 32, 64],
            trials: 25,
            curve_amplitude: c.a,
            curve_rate_per_us: c.b,
            curve_floor: c.c,
        }
    }
}

impl PrepSection {
    pub fn curve(&self) -> PrepCurve {
        PrepCurve {
            a: self.curve_amplitude,
            b: self.curve_rate_per_us,
            c: self.curve_floor,
        }
    }
}

/// `lambda_ref` wins when given; otherwise it is solved so that
/// `target_delta` is reached at `target_db` over the longest sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DampingSection {
    pub intensity_db: Vec<f64>,
    pub lambda_ref: Option<f64>,
    pub target_delta: f64,
    pub target_db: f64,
    pub samples: u32,
    pub trials: u64,
}

impl Default for DampingSection {
    fn default() -> Self {
        Self {
            intensity_db: vec![-20.0, -23.0, -26.0, -100.0],
            lambda_ref: None,
            target_delta: 0.40,
            target_db: -20.0,
            samples: 32,
            trials: 100,
        }
    }
}

/// Histogram panels: one per damping intensity and one per detector
/// threshold, each with `trials` trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HistogramSection {
    pub intensity_db: Vec<f64>,
    pub threshold_counts: Vec<u32>,
    pub samples: u32,
    pub trials: u64,
}

impl Default for HistogramSection {
    fn default() -> Self {
        Self {
            intensity_db: vec![-20.0, -23.0, -26.0, -100.0],
            threshold_counts: vec![20],
            samples: 32,
            trials: 100,
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Missing(String),
    Unreadable(String, std::io::Error),
    Parse(String, String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Missing(p) => write!(f, "config file not found: {p}"),
            Self::Unreadable(p, e) => write!(f, "cannot read config {p}: {e}"),
            Self::Parse(p, e) => write!(f, "invalid config {p}: {e}"),
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => ConfigError::Missing(shown.clone()),
            _ => ConfigError::Unreadable(shown.clone(), e),
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse(shown, e.to_string()))
    }

    /// Base trial: configured gate and reference, no noise, ideal readout.
    pub fn base_trial(&self, samples: u32) -> TrialConfig {
        TrialConfig {
            max_exponent: self.trial.max_exponent,
            samples: SampleSchedule::Constant(samples),
            gate: GateSpec {
                theta_actual: self.trial.theta_actual_rad,
            },
            noise: NoiseConfig {
                plus_prep: self.trial.plus_prep,
                ..NoiseConfig::noiseless()
            },
            theta_ref: self.trial.theta_ref_rad,
            seed: self.seed,
            ..TrialConfig::default()
        }
    }
}
