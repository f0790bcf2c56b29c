//! C ABI over the `rpe` crate.
//!
//! Every fallible function returns an [`RpeStatus`]; on anything other than
//! `RPE_STATUS_OK` a description is available from
//! [`rpe_last_error_message`] on the same thread. Handles are opaque and
//! must be released with their matching `*_free` function. Panics never
//! cross the boundary; they are reported as `RPE_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use rpe::estimator::{self, DegeneratePolicy, Observation, RpeResult};
use rpe::harness::{
    self, Degenerate, SampleSchedule, SweepAxis, SweepResult, SweepSpec, TrialConfig,
};
use rpe::noise::{self, PrepCurve};
use rpe::sim::DetectorModel;
use rpe::RpeError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpeStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Degenerate = 3,
    Io = 4,
    Schema = 5,
    InvalidState = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpeSweepAxis {
    Threshold = 0,
    PrepTime = 1,
    LambdaDb = 2,
    Samples = 3,
}

/// Axis codes arrive as plain integers so an out-of-range value from C is
/// an error rather than undefined behaviour.
fn axis(code: u32) -> Result<SweepAxis, RpeStatus> {
    const THRESHOLD: u32 = RpeSweepAxis::Threshold as u32;
    const PREP_TIME: u32 = RpeSweepAxis::PrepTime as u32;
    const LAMBDA_DB: u32 = RpeSweepAxis::LambdaDb as u32;
    const SAMPLES: u32 = RpeSweepAxis::Samples as u32;
    match code {
        THRESHOLD => Ok(SweepAxis::Threshold),
        PREP_TIME => Ok(SweepAxis::PrepTime),
        LAMBDA_DB => Ok(SweepAxis::LambdaDb),
        SAMPLES => Ok(SweepAxis::Samples),
        _ => Err(fail(
            RpeStatus::InvalidArgument,
            format!("unknown sweep axis {code}"),
        )),
    }
}

/// Photon-counting detector parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeDetector {
    pub dark_mean: f64,
    pub bright_mean: f64,
    pub bright_tail_fraction: f64,
    pub threshold: u32,
}

impl From<RpeDetector> for DetectorModel {
    fn from(d: RpeDetector) -> Self {
        DetectorModel {
            dark_mean: d.dark_mean,
            bright_mean: d.bright_mean,
            bright_tail_fraction: d.bright_tail_fraction,
            threshold: d.threshold,
        }
    }
}

/// One generation of an estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeStep {
    pub generation: usize,
    pub repetitions: u64,
    pub raw_angle: f64,
    pub theta_hat: f64,
    pub degenerate: bool,
}

/// One row of a sweep table. `secondary_axis_value` is meaningful only when
/// `has_secondary` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpeSweepPoint {
    pub axis_value: f64,
    pub has_secondary: bool,
    pub secondary_axis_value: f64,
    pub trials: u64,
    pub failures: u64,
    pub failure_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub predicted_delta: f64,
}

/// Opaque estimator result.
pub struct RpeEstimate(RpeResult);

/// Opaque trial configuration.
pub struct RpeTrialConfig(TrialConfig);

/// Opaque sweep table.
pub struct RpeSweep(SweepResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: RpeStatus, msg: impl Into<String>) -> RpeStatus {
    set_error(msg.into());
    status
}

fn from_error(e: RpeError) -> RpeStatus {
    let status = match &e {
        RpeError::InvalidArgument(_) => RpeStatus::InvalidArgument,
        RpeError::InvalidState(_) => RpeStatus::InvalidState,
        RpeError::Degenerate { .. } => RpeStatus::Degenerate,
        RpeError::Io { .. } => RpeStatus::Io,
        RpeError::Schema { .. } => RpeStatus::Schema,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `Panic` and errors into status codes.
fn guard(f: impl FnOnce() -> Result<(), RpeStatus>) -> RpeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RpeStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: rpe::Result<T>) -> Result<T, RpeStatus> {
    r.map_err(from_error)
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, RpeStatus> {
    p.as_mut()
        .ok_or_else(|| fail(RpeStatus::NullPointer, format!("{name} is null")))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, RpeStatus> {
    p.as_ref()
        .ok_or_else(|| fail(RpeStatus::NullPointer, format!("{name} is null")))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], RpeStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(RpeStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rpe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rpe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// The default photon-counting detector.
#[no_mangle]
pub extern "C" fn rpe_detector_default() -> RpeDetector {
    let d = DetectorModel::default();
    RpeDetector {
        dark_mean: d.dark_mean,
        bright_mean: d.bright_mean,
        bright_tail_fraction: d.bright_tail_fraction,
        threshold: d.threshold,
    }
}

#[no_mangle]
pub unsafe extern "C" fn rpe_step_angle(
    x: f64,
    y: f64,
    samples: f64,
    angle_out: *mut f64,
    degenerate_out: *mut bool,
) -> RpeStatus {
    guard(|| {
        let angle_out = out_ref(angle_out, "angle_out")?;
        let s = lift(estimator::step_angle(x, y, samples))?;
        *angle_out = s.angle;
        if let Some(d) = degenerate_out.as_mut() {
            *d = s.degenerate;
        }
        Ok(())
    })
}

/// Runs the estimator over `generations` generations. `x[j]`, `y[j]` and
/// `samples[j]` belong to sequence length `2^j`. With `strict` set,
/// degenerate counts are an error rather than a flag.
#[no_mangle]
pub unsafe extern "C" fn rpe_estimate(
    x: *const f64,
    y: *const f64,
    samples: *const f64,
    generations: usize,
    strict: bool,
    out: *mut *mut RpeEstimate,
) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let (x, y, m) = (
            in_slice(x, generations, "x")?,
            in_slice(y, generations, "y")?,
            in_slice(samples, generations, "samples")?,
        );
        let obs: Vec<Observation> = (0..generations)
            .map(|j| Observation::new(j + 1, x[j], y[j], m[j]))
            .collect();
        let policy = if strict {
            DegeneratePolicy::Strict
        } else {
            DegeneratePolicy::Flag
        };
        let r = lift(estimator::estimate(&obs, policy))?;
        *out = Box::into_raw(Box::new(RpeEstimate(r)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rpe_estimate_free(est: *mut RpeEstimate) {
    if !est.is_null() {
        drop(Box::from_raw(est));
    }
}

/// Final angle in `[0, 2π)`, or NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn rpe_estimate_theta(est: *const RpeEstimate) -> f64 {
    est.as_ref().map_or(f64::NAN, |e| e.0.theta_est)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_estimate_half_width(est: *const RpeEstimate) -> f64 {
    est.as_ref().map_or(f64::NAN, |e| e.0.half_width)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_estimate_generations(est: *const RpeEstimate) -> usize {
    est.as_ref().map_or(0, |e| e.0.steps.len())
}

#[no_mangle]
pub unsafe extern "C" fn rpe_estimate_step(
    est: *const RpeEstimate,
    index: usize,
    out: *mut RpeStep,
) -> RpeStatus {
    guard(|| {
        let est = in_ref(est, "est")?;
        let out = out_ref(out, "out")?;
        let s = est.0.steps.get(index).ok_or_else(|| {
            fail(
                RpeStatus::InvalidArgument,
                format!("step {index} out of range ({} steps)", est.0.steps.len()),
            )
        })?;
        *out = RpeStep {
            generation: s.generation,
            repetitions: s.repetitions,
            raw_angle: s.raw_angle,
            theta_hat: s.theta_hat,
            degenerate: s.degenerate,
        };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn rpe_is_success(theta_est: f64, theta_ref: f64, max_exponent: usize) -> bool {
    estimator::is_success(theta_est, theta_ref, max_exponent)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_poisson_cdf(k: i64, mean: f64, out: *mut f64) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lift(noise::poisson_cdf(k, mean))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rpe_delta_meas(detector: *const RpeDetector, out: *mut f64) -> RpeStatus {
    guard(|| {
        let d = in_ref(detector, "detector")?;
        let out = out_ref(out, "out")?;
        *out = lift(noise::delta_meas(&(*d).into()))?.value;
        Ok(())
    })
}

/// Preparation error after `t_us` µs on the default preparation curve.
#[no_mangle]
pub unsafe extern "C" fn rpe_delta_prep(t_us: f64, out: *mut f64) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lift(noise::delta_prep(t_us, &PrepCurve::default()))?.value;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rpe_delta_phase_damping(lambda: f64, n: u64, out: *mut f64) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lift(noise::delta_phase_damping(lambda, n))?.value;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rpe_db_to_lambda(db: f64, lambda_ref: f64, out: *mut f64) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = lift(noise::db_to_lambda(db, lambda_ref))?;
        Ok(())
    })
}

/// A trial configuration with library defaults: sequences up to 128 gates,
/// 32 samples, an ideal π/2 gate, no noise and ideal readout.
#[no_mangle]
pub extern "C" fn rpe_trial_config_new() -> *mut RpeTrialConfig {
    Box::into_raw(Box::new(RpeTrialConfig(TrialConfig::default())))
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_free(cfg: *mut RpeTrialConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn update(cfg: *mut RpeTrialConfig, f: impl FnOnce(&mut TrialConfig)) -> RpeStatus {
    guard(|| {
        let cfg = out_ref(cfg, "cfg")?;
        let mut next = cfg.0.clone();
        f(&mut next);
        lift(next.validate())?;
        cfg.0 = next;
        Ok(())
    })
}

/// `log2` of the longest sequence.
#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_max_exponent(
    cfg: *mut RpeTrialConfig,
    max_exponent: usize,
) -> RpeStatus {
    update(cfg, |c| c.max_exponent = max_exponent)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_samples(
    cfg: *mut RpeTrialConfig,
    samples: u32,
) -> RpeStatus {
    update(cfg, |c| c.samples = SampleSchedule::Constant(samples))
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_theta_actual(
    cfg: *mut RpeTrialConfig,
    theta: f64,
) -> RpeStatus {
    update(cfg, |c| c.gate.theta_actual = theta)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_theta_ref(
    cfg: *mut RpeTrialConfig,
    theta: f64,
) -> RpeStatus {
    update(cfg, |c| c.theta_ref = theta)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_seed(
    cfg: *mut RpeTrialConfig,
    seed: u64,
) -> RpeStatus {
    update(cfg, |c| c.seed = seed)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_prep_error(
    cfg: *mut RpeTrialConfig,
    eps: f64,
) -> RpeStatus {
    update(cfg, |c| c.noise.prep_error = eps)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_phase_damping(
    cfg: *mut RpeTrialConfig,
    lambda: f64,
) -> RpeStatus {
    update(cfg, |c| c.noise.phase_damping_per_gate = lambda)
}

/// Null `detector` restores ideal readout.
#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_detector(
    cfg: *mut RpeTrialConfig,
    detector: *const RpeDetector,
) -> RpeStatus {
    let d = detector.as_ref().map(|d| DetectorModel::from(*d));
    update(cfg, |c| c.noise.detector = d)
}

#[no_mangle]
pub unsafe extern "C" fn rpe_trial_config_set_strict(
    cfg: *mut RpeTrialConfig,
    strict: bool,
) -> RpeStatus {
    update(cfg, |c| {
        c.degenerate = if strict {
            Degenerate::Strict
        } else {
            Degenerate::Flag
        }
    })
}

/// Runs one seeded trial. `estimate_out` may be null; otherwise it receives
/// a new handle the caller must free.
#[no_mangle]
pub unsafe extern "C" fn rpe_run_trial(
    cfg: *const RpeTrialConfig,
    trial_index: u64,
    success_out: *mut bool,
    estimate_out: *mut *mut RpeEstimate,
) -> RpeStatus {
    guard(|| {
        let cfg = in_ref(cfg, "cfg")?;
        let success_out = out_ref(success_out, "success_out")?;
        let o = lift(harness::run_trial(&cfg.0, trial_index))?;
        *success_out = o.success;
        if let Some(out) = estimate_out.as_mut() {
            *out = Box::into_raw(Box::new(RpeEstimate(o.result)));
        }
        Ok(())
    })
}

/// Runs a sweep over `primary_values`, or over their product with
/// `secondary_values` when `secondary_len > 0` (secondary varies slowest).
/// Axes are `RpeSweepAxis` codes; `secondary` is ignored for one-axis
/// sweeps. `threads = 0` uses the global pool; the table does not depend
/// on it.
#[no_mangle]
pub unsafe extern "C" fn rpe_sweep_run(
    cfg: *const RpeTrialConfig,
    primary: u32,
    primary_values: *const f64,
    primary_len: usize,
    secondary: u32,
    secondary_values: *const f64,
    secondary_len: usize,
    trials_per_point: u64,
    lambda_ref: f64,
    threads: usize,
    out: *mut *mut RpeSweep,
) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let cfg = in_ref(cfg, "cfg")?;
        let p = in_slice(primary_values, primary_len, "primary_values")?;
        let s = in_slice(secondary_values, secondary_len, "secondary_values")?;
        let mut spec = if s.is_empty() {
            SweepSpec::one_axis(axis(primary)?, p, trials_per_point)
        } else {
            SweepSpec::two_axis(axis(primary)?, p, axis(secondary)?, s, trials_per_point)
        };
        spec.lambda_ref = lambda_ref;
        spec.threads = (threads > 0).then_some(threads);
        let run = lift(harness::sweep(&cfg.0, &spec))?;
        *out = Box::into_raw(Box::new(RpeSweep(run.result)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn rpe_sweep_free(sweep: *mut RpeSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

#[no_mangle]
pub unsafe extern "C" fn rpe_sweep_len(sweep: *const RpeSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.0.points.len())
}

#[no_mangle]
pub unsafe extern "C" fn rpe_sweep_point(
    sweep: *const RpeSweep,
    index: usize,
    out: *mut RpeSweepPoint,
) -> RpeStatus {
    guard(|| {
        let sweep = in_ref(sweep, "sweep")?;
        let out = out_ref(out, "out")?;
        let p = sweep.0.points.get(index).ok_or_else(|| {
            fail(
                RpeStatus::InvalidArgument,
                format!(
                    "point {index} out of range ({} points)",
                    sweep.0.points.len()
                ),
            )
        })?;
        *out = RpeSweepPoint {
            axis_value: p.axis_value,
            has_secondary: p.secondary_axis_value.is_some(),
            secondary_axis_value: p.secondary_axis_value.unwrap_or(f64::NAN),
            trials: p.trials,
            failures: p.failures,
            failure_rate: p.failure_rate,
            ci_low: p.ci_low,
            ci_high: p.ci_high,
            predicted_delta: p.predicted_delta,
        };
        Ok(())
    })
}

unsafe fn path_arg<'a>(path: *const c_char) -> Result<&'a Path, RpeStatus> {
    if path.is_null() {
        return Err(fail(RpeStatus::NullPointer, "path is null"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(Path::new)
        .map_err(|_| fail(RpeStatus::InvalidArgument, "path is not valid UTF-8"))
}

/// Writes the table to `path` and its metadata next to it.
#[no_mangle]
pub unsafe extern "C" fn rpe_sweep_persist(
    sweep: *const RpeSweep,
    path: *const c_char,
) -> RpeStatus {
    guard(|| {
        let sweep = in_ref(sweep, "sweep")?;
        lift(harness::persist(&sweep.0, path_arg(path)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn rpe_sweep_load(path: *const c_char, out: *mut *mut RpeSweep) -> RpeStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let r = lift(harness::load(path_arg(path)?))?;
        *out = Box::into_raw(Box::new(RpeSweep(r)));
        Ok(())
    })
}
