/*
 * Minimal consumer of the aitlab C ABI: parse a configuration, run the
 * comparison, inspect the rows, and solve one temporal-value problem.
 *
 * Compiled and executed by tests/c_smoke.rs; exits nonzero on any mismatch.
 */

#include <math.h>
#include <stdio.h>
#include <string.h>

#include "aitlab.h"

static const char *BSM_DOC =
    "strategy = \"ait\"\n"
    "\n"
    "[model]\n"
    "kind = \"bsm\"\n"
    "\n"
    "[curves]\n"
    "mu = { constant = 0.08 }\n"
    "rho = { constant = 0.02 }\n"
    "sigma = { constant = 0.2 }\n"
    "\n"
    "[grid]\n"
    "horizon = 1.0\n"
    "n_steps = 100\n"
    "\n"
    "[mc]\n"
    "n_paths = 2000\n"
    "seed = 42\n"
    "\n"
    "[delays]\n"
    "d_stock = 0.25\n";

static const char *VASICEK_DOC =
    "strategy = \"ait\"\n"
    "\n"
    "[model]\n"
    "kind = \"vasicek\"\n"
    "a = 1.0\n"
    "b = 0.05\n"
    "xi = 0.5\n"
    "r0 = 0.03\n"
    "\n"
    "[curves]\n"
    "mu = { constant = 0.08 }\n"
    "sigma = { constant = 0.2 }\n"
    "\n"
    "[grid]\n"
    "horizon = 1.0\n"
    "n_steps = 400\n"
    "\n"
    "[mc]\n"
    "n_paths = 100\n"
    "seed = 5\n"
    "\n"
    "[delays]\n"
    "d_stock = 0.3\n"
    "d_rate = 0.3\n";

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      const char *msg = aitlab_last_error();                               \
      fprintf(stderr, "FAILED %s:%d: %s (%s)\n", __FILE__, __LINE__,       \
              #cond, msg ? msg : "no error message");                      \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  CHECK(aitlab_abi_version() == 1);
  CHECK(aitlab_last_error() == NULL);

  AitlabConfig *config = NULL;
  CHECK(aitlab_config_parse(BSM_DOC, &config) == AITLAB_OK);
  CHECK(aitlab_config_set_seed(config, 7) == AITLAB_OK);

  AitlabReport *report = NULL;
  CHECK(aitlab_run_compare(config, NULL, &report) == AITLAB_OK);
  CHECK(aitlab_report_len(report) == 3);
  CHECK(aitlab_report_within_tolerance(report) == 1);

  const char *expected_strategy[3] = {"merton", "ait", "ait-merton"};
  for (size_t i = 0; i < 3; i++) {
    AitlabCompareRow row;
    CHECK(aitlab_report_row(report, i, &row) == AITLAB_OK);
    CHECK(strcmp(row.model, "black_scholes") == 0);
    CHECK(strcmp(row.strategy, expected_strategy[i]) == 0);
    CHECK(row.seed == 7);
    CHECK(row.has_closed_form == 1);
    CHECK(row.within_tolerance == 1);
    CHECK(isfinite(row.mean) && isfinite(row.std_error));
  }

  AitlabCompareRow row;
  CHECK(aitlab_report_row(report, 3, &row) == AITLAB_OUT_OF_RANGE);
  CHECK(aitlab_last_error() != NULL);

  const char *csv = aitlab_report_csv(report);
  CHECK(csv != NULL && strncmp(csv, "model,strategy,", 15) == 0);

  aitlab_report_free(report);
  aitlab_config_free(config);

  CHECK(aitlab_config_parse("not toml at all", &config) == AITLAB_INVALID);
  CHECK(aitlab_last_error() != NULL);

  CHECK(aitlab_config_parse(VASICEK_DOC, &config) == AITLAB_OK);
  AitlabTemporalValue value;
  CHECK(aitlab_temporal_value(config, &value) == AITLAB_OK);
  CHECK(value.is_finite == 1);
  CHECK(value.d_star > 0.0 && value.d_star < 1.0);
  CHECK(fabs(value.residual) <= 1e-10);
  aitlab_config_free(config);

  printf("c smoke: ok\n");
  return 0;
}
