#ifndef RPE_H
#define RPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum RpeStatus {
  RPE_STATUS_OK = 0,
  RPE_STATUS_INVALID_ARGUMENT = 1,
  RPE_STATUS_NULL_POINTER = 2,
  RPE_STATUS_DEGENERATE = 3,
  RPE_STATUS_IO = 4,
  RPE_STATUS_SCHEMA = 5,
  RPE_STATUS_INVALID_STATE = 6,
  RPE_STATUS_PANIC = 7,
} RpeStatus;

typedef enum RpeSweepAxis {
  RPE_SWEEP_AXIS_THRESHOLD = 0,
  RPE_SWEEP_AXIS_PREP_TIME = 1,
  RPE_SWEEP_AXIS_LAMBDA_DB = 2,
  RPE_SWEEP_AXIS_SAMPLES = 3,
} RpeSweepAxis;

// Opaque estimator result.
typedef struct RpeEstimate RpeEstimate;

// Opaque sweep table.
typedef struct RpeSweep RpeSweep;

// Opaque trial configuration.
typedef struct RpeTrialConfig RpeTrialConfig;

// Photon-counting detector parameters.
typedef struct RpeDetector {
  double dark_mean;
  double bright_mean;
  double bright_tail_fraction;
  uint32_t threshold;
} RpeDetector;

// One generation of an estimate.
typedef struct RpeStep {
  size_t generation;
  uint64_t repetitions;
  double raw_angle;
  double theta_hat;
  bool degenerate;
} RpeStep;

// One row of a sweep table. `secondary_axis_value` is meaningful only when
// `has_secondary` is set.
typedef struct RpeSweepPoint {
  double axis_value;
  bool has_secondary;
  double secondary_axis_value;
  uint64_t trials;
  uint64_t failures;
  double failure_rate;
  double ci_low;
  double ci_high;
  double predicted_delta;
} RpeSweepPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. Valid until the
// next failing call on the same thread.
const char *rpe_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *rpe_version(void);

// The default photon-counting detector.
struct RpeDetector rpe_detector_default(void);

enum RpeStatus rpe_step_angle(double x,
                              double y,
                              double samples,
                              double *angle_out,
                              bool *degenerate_out);

// Runs the estimator over `generations` generations. `x[j]`, `y[j]` and
// `samples[j]` belong to sequence length `2^j`. With `strict` set,
// degenerate counts are an error rather than a flag.
enum RpeStatus rpe_estimate(const double *x,
                            const double *y,
                            const double *samples,
                            size_t generations,
                            bool strict,
                            struct RpeEstimate **out);

void rpe_estimate_free(struct RpeEstimate *est);

// Final angle in `[0, 2π)`, or NaN for a null handle.
double rpe_estimate_theta(const struct RpeEstimate *est);

double rpe_estimate_half_width(const struct RpeEstimate *est);

size_t rpe_estimate_generations(const struct RpeEstimate *est);

enum RpeStatus rpe_estimate_step(const struct RpeEstimate *est, size_t index, struct RpeStep *out);

bool rpe_is_success(double theta_est, double theta_ref, size_t max_exponent);

enum RpeStatus rpe_poisson_cdf(int64_t k, double mean, double *out);

enum RpeStatus rpe_delta_meas(const struct RpeDetector *detector, double *out);

// Preparation error after `t_us` µs on the default preparation curve.
enum RpeStatus rpe_delta_prep(double t_us, double *out);

enum RpeStatus rpe_delta_phase_damping(double lambda, uint64_t n, double *out);

enum RpeStatus rpe_db_to_lambda(double db, double lambda_ref, double *out);

// A trial configuration with library defaults: sequences up to 128 gates,
// 32 samples, an ideal π/2 gate, no noise and ideal readout.
struct RpeTrialConfig *rpe_trial_config_new(void);

void rpe_trial_config_free(struct RpeTrialConfig *cfg);

// `log2` of the longest sequence.
enum RpeStatus rpe_trial_config_set_max_exponent(struct RpeTrialConfig *cfg, size_t max_exponent);

enum RpeStatus rpe_trial_config_set_samples(struct RpeTrialConfig *cfg, uint32_t samples);

enum RpeStatus rpe_trial_config_set_theta_actual(struct RpeTrialConfig *cfg, double theta);

enum RpeStatus rpe_trial_config_set_theta_ref(struct RpeTrialConfig *cfg, double theta);

enum RpeStatus rpe_trial_config_set_seed(struct RpeTrialConfig *cfg, uint64_t seed);

enum RpeStatus rpe_trial_config_set_prep_error(struct RpeTrialConfig *cfg, double eps);

enum RpeStatus rpe_trial_config_set_phase_damping(struct RpeTrialConfig *cfg, double lambda);

// Null `detector` restores ideal readout.
enum RpeStatus rpe_trial_config_set_detector(struct RpeTrialConfig *cfg,
                                             const struct RpeDetector *detector);

enum RpeStatus rpe_trial_config_set_strict(struct RpeTrialConfig *cfg, bool strict);

// Runs one seeded trial. `estimate_out` may be null; otherwise it receives
// a new handle the caller must free.
enum RpeStatus rpe_run_trial(const struct RpeTrialConfig *cfg,
                             uint64_t trial_index,
                             bool *success_out,
                             struct RpeEstimate **estimate_out);

// Runs a sweep over `primary_values`, or over their product with
// `secondary_values` when `secondary_len > 0` (secondary varies slowest).
// Axes are `RpeSweepAxis` codes; `secondary` is ignored for one-axis
// sweeps. `threads = 0` uses the global pool; the table does not depend
// on it.
enum RpeStatus rpe_sweep_run(const struct RpeTrialConfig *cfg,
                             uint32_t primary,
                             const double *primary_values,
                             size_t primary_len,
                             uint32_t secondary,
                             const double *secondary_values,
                             size_t secondary_len,
                             uint64_t trials_per_point,
                             double lambda_ref,
                             size_t threads,
                             struct RpeSweep **out);

void rpe_sweep_free(struct RpeSweep *sweep);

size_t rpe_sweep_len(const struct RpeSweep *sweep);

enum RpeStatus rpe_sweep_point(const struct RpeSweep *sweep,
                               size_t index,
                               struct RpeSweepPoint *out);

// Writes the table to `path` and its metadata next to it.
enum RpeStatus rpe_sweep_persist(const struct RpeSweep *sweep, const char *path);

enum RpeStatus rpe_sweep_load(const char *path, struct RpeSweep **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RPE_H */
