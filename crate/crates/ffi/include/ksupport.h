#ifndef KSUPPORT_H
#define KSUPPORT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Values match the command-line exit codes where they
 * overlap.
 */
typedef enum {
  KSP_STATUS_OK = 0,
  KSP_STATUS_NULL_POINTER = 1,
  KSP_STATUS_INVALID_INPUT = 2,
  KSP_STATUS_NON_CONVERGENCE = 3,
  KSP_STATUS_PANIC = 5,
} KspStatus;

/**
 * Vertices of an exposed face of the unit k-support ball.
 */
typedef struct KspFace KspFace;

/**
 * Outcome of a solve.
 */
typedef struct KspSolveReport KspSolveReport;

/**
 * Norm parameters (p, k).
 */
typedef struct KspSpec KspSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, valid until the next call
 * into the library from the same thread. Empty when there was none.
 */
const char *ksp_last_error(void);

/**
 * Creates a spec handle. `p` may be `INFINITY`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
KspStatus ksp_spec_new(double p, size_t k, KspSpec **out);

/**
 * # Safety
 * `spec` must come from `ksp_spec_new` and not be used afterwards.
 */
void ksp_spec_free(KspSpec *spec);

/**
 * Top-(q, k) norm of y, q being the conjugate of the spec's p.
 *
 * # Safety
 * `spec` must be a live handle, `y` must point to `d` doubles and `out` to
 * one writable double.
 */
KspStatus ksp_top_norm(const KspSpec *spec, const double *y, size_t d, double *out);

/**
 * k-support norm of x, certified to within `tol` (absolute and relative).
 * `gap` may be null; otherwise it receives the certified gap.
 *
 * # Safety
 * `spec` must be a live handle, `x` must point to `d` doubles and `out` to
 * one writable double.
 */
KspStatus ksp_ksupport_norm(const KspSpec *spec,
                            const double *x,
                            size_t d,
                            double tol,
                            double *out,
                            double *gap);

/**
 * Face of the unit k-support ball exposed by y; ties in |y_i| within
 * `tol` are merged.
 *
 * # Safety
 * `spec` must be a live handle, `y` must point to `d` doubles and `out` to
 * writable storage for one handle.
 */
KspStatus ksp_face_new(const KspSpec *spec, const double *y, size_t d, double tol, KspFace **out);

/**
 * Number of vertices of the face; 0 for a null handle.
 *
 * # Safety
 * `face` must be null or a live handle.
 */
size_t ksp_face_vertex_count(const KspFace *face);

/**
 * Copies vertex `i` into `out`, which must hold the dimension d.
 *
 * # Safety
 * `face` must be a live handle and `out` must point to d writable doubles.
 */
KspStatus ksp_face_vertex(const KspFace *face, size_t i, double *out);

/**
 * # Safety
 * `face` must come from `ksp_face_new` and not be used afterwards.
 */
void ksp_face_free(KspFace *face);

/**
 * Minimizes ½‖Ax − b‖² + γ‖x‖^sp. `a` is row-major with `m` rows and `d`
 * columns, or null for A = I (then m must equal d). The report handle is
 * written even on `KSP_STATUS_NON_CONVERGENCE`.
 *
 * # Safety
 * `spec` must be a live handle; `a` must be null or point to m·d doubles;
 * `b` must point to m doubles; `out` must point to writable storage for
 * one handle.
 */
KspStatus ksp_solve_quadratic(const KspSpec *spec,
                              const double *a,
                              size_t m,
                              size_t d,
                              const double *b,
                              double gamma,
                              double tol,
                              size_t max_iterations,
                              KspSolveReport **out);

/**
 * Dimension of the solution; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t ksp_report_dim(const KspSolveReport *report);

/**
 * Copies the solution into `out`, which must hold `ksp_report_dim` doubles.
 *
 * # Safety
 * `report` must be a live handle and `out` must point to enough writable
 * doubles.
 */
KspStatus ksp_report_solution(const KspSolveReport *report, double *out);

/**
 * Certified gap at the returned point; NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double ksp_report_gap(const KspSolveReport *report);

/**
 * Objective value at the returned point; NaN for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
double ksp_report_objective(const KspSolveReport *report);

/**
 * Iterations performed; 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
size_t ksp_report_iterations(const KspSolveReport *report);

/**
 * Writes the 0-based indices of the support bound (the union of optimal
 * supports of the final gradient) into `out` if non-null and returns their
 * count. Call with a null `out` to size the buffer.
 *
 * # Safety
 * `report` must be null or a live handle; `out` must be null or point to
 * enough writable entries.
 */
size_t ksp_report_support_bound(const KspSolveReport *report, size_t *out);

/**
 * # Safety
 * `report` must come from `ksp_solve_quadratic` and not be used
 * afterwards.
 */
void ksp_report_free(KspSolveReport *report);

/**
 * Library version as a static nul-terminated string.
 */
const char *ksp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSUPPORT_H */
