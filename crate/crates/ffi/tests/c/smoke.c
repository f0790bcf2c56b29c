#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#include "rpe.h"

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      const char *msg = rpe_last_error_message();                          \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,       \
              msg ? msg : "no message");                                   \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(int argc, char **argv) {
  const char *table = argc > 1 ? argv[1] : "smoke.csv";
  double theta = 1.2345;
  double x[11], y[11], m[11];
  for (int j = 0; j < 11; ++j) {
    double nt = (double)(1u << j) * theta;
    x[j] = (1.0 - cos(nt)) / 2.0;
    y[j] = (1.0 + sin(nt)) / 2.0;
    m[j] = 1.0;
  }
  RpeEstimate *est = NULL;
  CHECK(rpe_estimate(x, y, m, 11, false, &est) == RPE_STATUS_OK);
  CHECK(fabs(rpe_estimate_theta(est) - theta) < 1e-9);
  CHECK(rpe_estimate_generations(est) == 11);
  RpeStep step;
  CHECK(rpe_estimate_step(est, 10, &step) == RPE_STATUS_OK);
  CHECK(step.repetitions == 1024);
  CHECK(rpe_estimate_step(est, 11, &step) == RPE_STATUS_INVALID_ARGUMENT);
  rpe_estimate_free(est);

  double d;
  RpeDetector det = rpe_detector_default();
  CHECK(rpe_delta_meas(&det, &d) == RPE_STATUS_OK && fabs(d - 0.01204) < 1e-4);
  CHECK(rpe_poisson_cdf(0, -1.0, &d) == RPE_STATUS_INVALID_ARGUMENT);
  CHECK(rpe_last_error_message() != NULL);
  CHECK(rpe_delta_prep(0.40, NULL) == RPE_STATUS_NULL_POINTER);

  RpeTrialConfig *cfg = rpe_trial_config_new();
  CHECK(rpe_trial_config_set_detector(cfg, &det) == RPE_STATUS_OK);
  CHECK(rpe_trial_config_set_seed(cfg, 7) == RPE_STATUS_OK);
  CHECK(rpe_trial_config_set_prep_error(cfg, 2.0) == RPE_STATUS_INVALID_ARGUMENT);
  bool ok = false;
  CHECK(rpe_run_trial(cfg, 0, &ok, NULL) == RPE_STATUS_OK && ok);

  double thresholds[] = {2.0, 20.0};
  RpeSweep *sweep = NULL;
  CHECK(rpe_sweep_run(cfg, 99, thresholds, 2, 0, NULL, 0, 10, 0.0, 0, &sweep) ==
        RPE_STATUS_INVALID_ARGUMENT);
  CHECK(rpe_sweep_run(cfg, RPE_SWEEP_AXIS_THRESHOLD, thresholds, 2, 0, NULL, 0, 10, 0.0, 2,
                      &sweep) == RPE_STATUS_OK);
  CHECK(rpe_sweep_len(sweep) == 2);
  RpeSweepPoint p;
  CHECK(rpe_sweep_point(sweep, 1, &p) == RPE_STATUS_OK);
  CHECK(p.failures == 10 && !p.has_secondary);
  CHECK(rpe_sweep_persist(sweep, table) == RPE_STATUS_OK);
  RpeSweep *loaded = NULL;
  CHECK(rpe_sweep_load(table, &loaded) == RPE_STATUS_OK);
  CHECK(rpe_sweep_len(loaded) == 2);
  rpe_sweep_free(loaded);
  rpe_sweep_free(sweep);
  rpe_trial_config_free(cfg);

  printf("rpe %s ok\n", rpe_version());
  return 0;
}
