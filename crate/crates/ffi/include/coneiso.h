#ifndef CONEISO_H
#define CONEISO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum ConeisoStatus {
  CONEISO_STATUS_OK = 0,
  CONEISO_STATUS_NULL_POINTER = 1,
  CONEISO_STATUS_INVALID_ARGUMENT = 2,
  CONEISO_STATUS_INVALID_CONE = 3,
  CONEISO_STATUS_DOMAIN_ERROR = 4,
  CONEISO_STATUS_TOLERANCE_NOT_MET = 5,
  CONEISO_STATUS_EMPTY_INTERSECTION = 6,
  CONEISO_STATUS_UNSUPPORTED = 7,
  CONEISO_STATUS_CONFIG = 8,
  CONEISO_STATUS_IO = 9,
  CONEISO_STATUS_INTERNAL = 10,
} ConeisoStatus;

/**
 * Convex cone handle.
 */
typedef struct ConeisoCone ConeisoCone;

/**
 * Gauge handle.
 */
typedef struct ConeisoGauge ConeisoGauge;

/**
 * Region handle.
 */
typedef struct ConeisoRegion ConeisoRegion;

/**
 * Weight handle.
 */
typedef struct ConeisoWeight ConeisoWeight;

/**
 * Quotient of a region and the sharp constant of the setting.
 */
typedef struct ConeisoQuotient {
  double perimeter;
  double volume;
  double quotient;
  double quotient_error;
  double sharp_constant;
  double sharp_error;
} ConeisoQuotient;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error of this thread into `buf` (NUL-terminated, truncated
 * to `len`). Returns the full message length without the terminator.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t coneiso_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *coneiso_version(void);

/**
 * `(0, ∞)^dim`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ConeisoStatus coneiso_cone_orthant(size_t dim, struct ConeisoCone **out);

/**
 * `R^dim`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ConeisoStatus coneiso_cone_full_space(size_t dim, struct ConeisoCone **out);

/**
 * `{x : a·x > 0}`.
 *
 * # Safety
 * `normal` must point to `dim` doubles and `out` to a handle slot.
 */
enum ConeisoStatus coneiso_cone_half_space(const double *normal,
                                           size_t dim,
                                           struct ConeisoCone **out);

/**
 * Planar sector of the given opening around the ray at angle `axis`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ConeisoStatus coneiso_cone_sector(double opening, double axis, struct ConeisoCone **out);

/**
 * # Safety
 * `cone` must be null or a handle from this library, not yet freed.
 */
void coneiso_cone_free(struct ConeisoCone *cone);

/**
 * Reference weight by catalog tag, on its reference cone.
 *
 * # Safety
 * `tag` must be a NUL-terminated string and `out` a handle slot.
 */
enum ConeisoStatus coneiso_weight_catalog(const char *tag, struct ConeisoWeight **out);

/**
 * Weight from an inline TOML table such as `tag = "monomial"\nexponents = [1, 1]`.
 *
 * # Safety
 * `cone` must be a live handle, `spec` a NUL-terminated string and `out`
 * a handle slot.
 */
enum ConeisoStatus coneiso_weight_from_toml(const struct ConeisoCone *cone,
                                            const char *spec,
                                            struct ConeisoWeight **out);

/**
 * # Safety
 * `w` must be a live handle and `out` a valid pointer.
 */
enum ConeisoStatus coneiso_weight_degree(const struct ConeisoWeight *w, double *out);

/**
 * `w(x)`.
 *
 * # Safety
 * `w` must be a live handle, `x` must point to `n` doubles and `out` to a double.
 */
enum ConeisoStatus coneiso_weight_eval(const struct ConeisoWeight *w,
                                       const double *x,
                                       size_t n,
                                       double *out);

/**
 * # Safety
 * `w` must be null or a live handle.
 */
void coneiso_weight_free(struct ConeisoWeight *w);

/**
 * Euclidean norm on `R^dim`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ConeisoStatus coneiso_gauge_euclidean(size_t dim, struct ConeisoGauge **out);

/**
 * `ℓ^p` norm on `R^dim`, `p ≥ 1`.
 *
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum ConeisoStatus coneiso_gauge_p_norm(size_t dim, double p, struct ConeisoGauge **out);

/**
 * `H(x)` when `dual == 0`, `H°(x)` otherwise.
 *
 * # Safety
 * `h` must be a live handle, `x` must point to `n` doubles and `out` to a double.
 */
enum ConeisoStatus coneiso_gauge_eval(const struct ConeisoGauge *h,
                                      const double *x,
                                      size_t n,
                                      int32_t dual,
                                      double *out);

/**
 * # Safety
 * `h` must be null or a live handle.
 */
void coneiso_gauge_free(struct ConeisoGauge *h);

/**
 * Euclidean ball.
 *
 * # Safety
 * `center` must point to `n` doubles and `out` to a handle slot.
 */
enum ConeisoStatus coneiso_region_ball(const double *center,
                                       size_t n,
                                       double radius,
                                       struct ConeisoRegion **out);

/**
 * `r W` for the Wulff shape `W` of `h`.
 *
 * # Safety
 * `h` must be a live handle and `out` a handle slot.
 */
enum ConeisoStatus coneiso_region_wulff(const struct ConeisoGauge *h,
                                        double scale,
                                        struct ConeisoRegion **out);

/**
 * # Safety
 * `e` must be null or a live handle.
 */
void coneiso_region_free(struct ConeisoRegion *e);

/**
 * Both sides of the perimeter–volume identity of the Wulff sector.
 *
 * # Safety
 * Handles must be live; output pointers must be valid.
 */
enum ConeisoStatus coneiso_identity_check(const struct ConeisoWeight *w,
                                          const struct ConeisoGauge *h,
                                          const struct ConeisoCone *cone,
                                          double rel_tol,
                                          double *perimeter,
                                          double *d_volume,
                                          double *relative_gap);

/**
 * Isoperimetric quotient of `e` and the sharp constant.
 *
 * # Safety
 * Handles must be live; `out` must be valid.
 */
enum ConeisoStatus coneiso_quotient(const struct ConeisoRegion *e,
                                    const struct ConeisoWeight *w,
                                    const struct ConeisoGauge *h,
                                    const struct ConeisoCone *cone,
                                    double rel_tol,
                                    struct ConeisoQuotient *out);

/**
 * First constrained eigenvalue for the density `sin^α θ` on `(0, π)`
 * (`alpha = 0` gives `B ≡ 1` on an arc of length `beta`).
 *
 * # Safety
 * `lambda1` must be a valid pointer.
 */
enum ConeisoStatus coneiso_wirtinger(double alpha, double beta, size_t nodes, double *lambda1);

/**
 * Run a CLI scenario. `seed < 0` keeps the seed of the file, `config` may be
 * null for `catalog`. `exit_code` receives 0 (checks passed) or 1 (a check
 * failed); configuration and numerical errors are returned as a status.
 *
 * # Safety
 * String arguments must be NUL-terminated; `exit_code` must be valid.
 */
enum ConeisoStatus coneiso_run_scenario(const char *scenario,
                                        const char *config,
                                        int64_t seed,
                                        const char *out_dir,
                                        int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONEISO_H */
