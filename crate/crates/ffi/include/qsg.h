#ifndef QSG_H
#define QSG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define QSG_KIND_CLASSICAL 0

#define QSG_KIND_BELL 1

#define QSG_KIND_WSTATE 2

#define QSG_KIND_HAH 3

typedef enum {
  QSG_STATUS_OK = 0,
  QSG_STATUS_NULL_POINTER = 1,
  QSG_STATUS_INVALID_UTF8 = 2,
  QSG_STATUS_INVALID_CONFIG = 3,
  QSG_STATUS_INVALID_ARGUMENT = 4,
  QSG_STATUS_IO = 5,
  QSG_STATUS_SIMULATION = 6,
  QSG_STATUS_PANIC = 7,
} QsgStatus;

/**
 * The outcome of one team's match.
 */
typedef struct QsgMatch QsgMatch;

/**
 * A parsed hardware noise profile.
 */
typedef struct QsgNoiseProfile QsgNoiseProfile;

/**
 * A validated scenario configuration.
 */
typedef struct QsgScenario QsgScenario;

/**
 * Summary statistics of one match.
 */
typedef struct {
  double mean;
  double std;
  double p_positive;
  double accumulated;
  uint64_t n_rounds;
} QsgStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *qsg_version(void);

/**
 * Copy of the last error message on this thread, or NULL if the last call
 * succeeded. Release with `qsg_string_free`.
 */
char *qsg_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a pointer previously returned by this library and not yet freed.
 */
void qsg_string_free(char *s);

/**
 * Parses a noise profile from TOML text.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
QsgStatus qsg_noise_profile_from_str(const char *source, QsgNoiseProfile **out);

/**
 * Loads a noise profile from a TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
QsgStatus qsg_noise_profile_load(const char *path, QsgNoiseProfile **out);

/**
 * Number of qubits the profile describes readout for.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
size_t qsg_noise_profile_qubits(const QsgNoiseProfile *profile);

/**
 * # Safety
 * `profile` must be NULL or a handle not yet freed.
 */
void qsg_noise_profile_free(QsgNoiseProfile *profile);

/**
 * Plays one team for `rounds` rounds. `kind` is one of the `QSG_KIND_*` constants.
 *
 * `intel_prob` is read only for `QSG_KIND_HAH`. `profile` may be
 * NULL for noiseless play; it only affects Bell and W teams.
 *
 * # Safety
 * `profile` must be NULL or a live handle; `out` must be writable.
 */
QsgStatus qsg_match_run(uint32_t kind,
                        uint32_t team_size,
                        double intel_prob,
                        const QsgNoiseProfile *profile,
                        uint64_t rounds,
                        uint64_t master_seed,
                        QsgMatch **out);

/**
 * Number of rounds in the match, 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t qsg_match_len(const QsgMatch *m);

/**
 * Copies up to `len` per-round team scores into `buf`.
 *
 * # Safety
 * `m` must be a live handle and `buf` must hold `len` values.
 */
QsgStatus qsg_match_scores(const QsgMatch *m, int32_t *buf, size_t len);

/**
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
QsgStatus qsg_match_stats(const QsgMatch *m, QsgStats *out);

/**
 * # Safety
 * `m` must be NULL or a handle not yet freed.
 */
void qsg_match_free(QsgMatch *m);

/**
 * Parses and validates a scenario configuration document. Relative paths
 * are taken relative to the process working directory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
QsgStatus qsg_scenario_from_toml(const char *toml, QsgScenario **out);

/**
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t qsg_scenario_team_count(const QsgScenario *s);

/**
 * Runs the scenario and writes its CSV and summary files.
 *
 * # Safety
 * `s` must be a live handle.
 */
QsgStatus qsg_scenario_run(const QsgScenario *s);

/**
 * Runs the scenario in memory and returns the results CSV. Release with
 * `qsg_string_free`.
 *
 * # Safety
 * `s` must be a live handle; `csv_out` must be writable.
 */
QsgStatus qsg_scenario_csv(const QsgScenario *s, char **csv_out);

/**
 * # Safety
 * `s` must be NULL or a handle not yet freed.
 */
void qsg_scenario_free(QsgScenario *s);

/**
 * Exact noiseless outcome probabilities of a Bell (`n_qubits` = 2) or W
 * preparation circuit, indexed by basis index. `out` must hold `2^n_qubits`
 * values.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
QsgStatus qsg_circuit_probabilities(uint32_t kind, uint32_t n_qubits, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSG_H */
