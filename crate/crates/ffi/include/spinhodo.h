#ifndef SPINHODO_H
#define SPINHODO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum SpinhodoStatus {
  SPINHODO_STATUS_OK = 0,
  SPINHODO_STATUS_NULL_POINTER = 1,
  SPINHODO_STATUS_DOMAIN = 2,
  SPINHODO_STATUS_DIVERGENCE = 3,
  SPINHODO_STATUS_INTEGRATION = 4,
  SPINHODO_STATUS_INVALID_ARGUMENT = 5,
  SPINHODO_STATUS_UNSUPPORTED = 6,
  SPINHODO_STATUS_IO = 7,
  SPINHODO_STATUS_PANIC = 8,
} SpinhodoStatus;

/**
 * A finished preset run.
 */
typedef struct SpinhodoRun SpinhodoRun;

/**
 * One sample of a run: state direction plus hodograph geometry.
 */
typedef struct SpinhodoSample {
  double t;
  double p[3];
  double probability;
  double energy;
  double speed;
  double curvature;
  double torsion;
  double arc_length;
} SpinhodoSample;

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *spinhodo_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *spinhodo_version(void);

/**
 * Jacobi `sn`, `cn`, `dn` at `u` for modulus `k` in [0, 1].
 *
 * # Safety
 * `sn`, `cn` and `dn` must be valid for writes.
 */
enum SpinhodoStatus spinhodo_sncndn(double u, double k, double *sn, double *cn, double *dn);

/**
 * Complete elliptic integral of the first kind `K(k)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SpinhodoStatus spinhodo_complete_k(double k, double *out);

/**
 * Complete elliptic integral of the second kind `E(m)`, `m <= 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SpinhodoStatus spinhodo_complete_e(double m, double *out);

/**
 * Incomplete elliptic integral of the second kind `E(phi | m)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum SpinhodoStatus spinhodo_incomplete_e(double phi, double m, double *out);

/**
 * Closed-form Bloch vector in a circular field with uniform decay `gamma`,
 * starting from the pure state at angles `theta0`, `phi0`.
 *
 * # Safety
 * `out` must point to three writable doubles.
 */
enum SpinhodoStatus spinhodo_rabi_general(double t,
                                          double theta0,
                                          double phi0,
                                          double h,
                                          double big_h,
                                          double omega,
                                          double gamma,
                                          double *out);

/**
 * Closed-form eight-component qutrit vector at resonance with `d = 0`.
 *
 * # Safety
 * `out` must point to eight writable doubles.
 */
enum SpinhodoStatus spinhodo_qutrit_resonance(double t,
                                              double h,
                                              double q,
                                              double omega,
                                              double *out);

/**
 * Runs the named preset (`"fig1"` .. `"fig10"`). A positive `rel_tol`
 * overrides the integrator tolerance. The result must be released with
 * [`spinhodo_run_free`].
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` valid for writes.
 */
enum SpinhodoStatus spinhodo_run_preset(const char *name, double rel_tol, struct SpinhodoRun **out);

/**
 * Number of samples in `run`, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle from [`spinhodo_run_preset`].
 */
size_t spinhodo_run_len(const struct SpinhodoRun *run);

/**
 * Copies sample `index` of `run` into `out`.
 *
 * # Safety
 * `run` must be a live handle and `out` valid for writes.
 */
enum SpinhodoStatus spinhodo_run_sample(const struct SpinhodoRun *run,
                                        size_t index,
                                        struct SpinhodoSample *out);

/**
 * The run report as JSON. Release the string with [`spinhodo_string_free`].
 *
 * # Safety
 * `run` must be a live handle and `out` valid for writes.
 */
enum SpinhodoStatus spinhodo_run_report_json(const struct SpinhodoRun *run, char **out);

/**
 * Writes trajectory.csv, geometry.csv, report.json and plot.gp into `dir`.
 *
 * # Safety
 * `run` must be a live handle and `dir` a NUL-terminated string.
 */
enum SpinhodoStatus spinhodo_run_write_artifacts(const struct SpinhodoRun *run, const char *dir);

/**
 * Releases a run handle. Null is ignored.
 *
 * # Safety
 * `run` must be null or a handle not yet freed.
 */
void spinhodo_run_free(struct SpinhodoRun *run);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void spinhodo_string_free(char *s);

#endif  /* SPINHODO_H */
