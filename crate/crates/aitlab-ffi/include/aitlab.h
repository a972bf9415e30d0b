/*
 * C interface to the aitlab portfolio laboratory.
 *
 * Maintained by hand; tests/header_sync.rs keeps the declarations below in
 * lockstep with the exported Rust symbols.
 *
 * Conventions:
 *   - AitlabConfig / AitlabReport are opaque; create them through the
 *     aitlab_* constructors and release them with the matching *_free.
 *     Handles are not thread-safe.
 *   - Fallible calls return AitlabStatus. On failure, aitlab_last_error()
 *     returns a message valid until the next aitlab_* call on that thread.
 *   - const char * fields of out-structs borrow from their report handle
 *     and are valid only until aitlab_report_free.
 *   - AITLAB_TOLERANCE / AITLAB_INVALID / AITLAB_INADMISSIBLE equal the
 *     aitlab CLI exit codes for the same conditions.
 */

#ifndef AITLAB_H
#define AITLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum AitlabStatus {
  AITLAB_OK = 0,
  /* A numerical check failed (only aitlab_run_validate returns this). */
  AITLAB_TOLERANCE = 1,
  /* Bad configuration, parameters, or I/O. */
  AITLAB_INVALID = 2,
  /* The model is well-formed but mathematically inadmissible. */
  AITLAB_INADMISSIBLE = 3,
  AITLAB_NULL_ARGUMENT = 4,
  AITLAB_INVALID_UTF8 = 5,
  AITLAB_OUT_OF_RANGE = 6,
  AITLAB_PANIC = 7,
} AitlabStatus;

/* Opaque parsed experiment configuration. */
typedef struct AitlabConfig AitlabConfig;

/* Opaque result of a compare or simulate run. */
typedef struct AitlabReport AitlabReport;

/* One row of a report, filled by aitlab_report_row. */
typedef struct AitlabCompareRow {
  const char *model;    /* borrowed from the report handle */
  const char *strategy; /* borrowed from the report handle */
  double d_stock;
  double d_rate; /* zero when the model takes no rate-observation delay */
  uint64_t n_paths;
  uint64_t n_steps;
  uint64_t seed;
  uint64_t clamp_count;
  double mean;
  double std_error;
  /* 0 when no closed form exists; the next three fields are then NaN. */
  int32_t has_closed_form;
  double closed_form;
  double abs_diff;
  double diff_in_se;
  int32_t within_tolerance;
} AitlabCompareRow;

/* Root search outcome, filled by aitlab_temporal_value. */
typedef struct AitlabTemporalValue {
  /* 1 when a finite root exists; d_star and residual are then set,
   * otherwise NaN. */
  int32_t is_finite;
  double d_star;
  double residual;
} AitlabTemporalValue;

/* ABI revision of this library; bumped on any breaking header change. */
uint32_t aitlab_abi_version(void);

/* Message for the most recent failure on this thread, or NULL if the most
 * recent call succeeded. */
const char *aitlab_last_error(void);

/* Parses a TOML experiment document from memory / from a file. */
AitlabStatus aitlab_config_parse(const char *toml_text, AitlabConfig **out);
AitlabStatus aitlab_config_parse_file(const char *path, AitlabConfig **out);

/* Overrides the Monte Carlo seed of a parsed configuration. */
AitlabStatus aitlab_config_set_seed(AitlabConfig *config, uint64_t seed);

/* Releases a configuration handle. NULL is a no-op. */
void aitlab_config_free(AitlabConfig *config);

/* Runs both strategies plus their closed forms (three rows), or only the
 * configured strategy (one row). A non-NULL out_dir receives compare.csv /
 * simulate.csv. */
AitlabStatus aitlab_run_compare(const AitlabConfig *config,
                                const char *out_dir, AitlabReport **out);
AitlabStatus aitlab_run_simulate(const AitlabConfig *config,
                                 const char *out_dir, AitlabReport **out);

/* Number of rows in a report; 0 when report is NULL. */
size_t aitlab_report_len(const AitlabReport *report);

/* Copies row `index` into *out. */
AitlabStatus aitlab_report_row(const AitlabReport *report, size_t index,
                               AitlabCompareRow *out);

/* 1 when every row with a closed form sits inside its tolerance band,
 * otherwise 0 (also 0 for NULL). */
int32_t aitlab_report_within_tolerance(const AitlabReport *report);

/* Full report as CSV text with trailing newline, borrowed from the handle;
 * NULL when report is NULL. */
const char *aitlab_report_csv(const AitlabReport *report);

/* Releases a report handle. NULL is a no-op. */
void aitlab_report_free(AitlabReport *report);

/* Solves for the observation delay at which the insider's advantage in the
 * stock exactly offsets the penalty from the delayed rate. Requires a
 * vasicek or hull_white model. */
AitlabStatus aitlab_temporal_value(const AitlabConfig *config,
                                   AitlabTemporalValue *out);

/* Runs the internal numerical check battery with the given seed, storing
 * the pass and total counts. Returns AITLAB_TOLERANCE when any check
 * fails. */
AitlabStatus aitlab_run_validate(uint64_t seed, size_t *passed,
                                 size_t *total);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AITLAB_H */
