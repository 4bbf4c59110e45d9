#ifndef MFD3D_H
#define MFD3D_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum Mfd3dStatus {
  MFD3D_STATUS_OK = 0,
  MFD3D_STATUS_NULL_POINTER = 1,
  MFD3D_STATUS_INVALID_ARGUMENT = 2,
  MFD3D_STATUS_BUFFER_TOO_SMALL = 3,
  MFD3D_STATUS_GEOMETRY = 4,
  MFD3D_STATUS_SELECTION = 5,
  MFD3D_STATUS_WEIGHTS = 6,
  MFD3D_STATUS_SINGULAR = 7,
  MFD3D_STATUS_IO = 8,
  MFD3D_STATUS_FORMAT = 9,
  MFD3D_STATUS_PANIC = 10,
} Mfd3dStatus;

typedef enum Mfd3dNodeKind {
  MFD3D_NODE_KIND_GRID = 0,
  MFD3D_NODE_KIND_HALTON = 1,
} Mfd3dNodeKind;

typedef enum Mfd3dSolverKind {
  MFD3D_SOLVER_KIND_DIRECT = 0,
  MFD3D_SOLVER_KIND_BICGSTAB = 1,
} Mfd3dSolverKind;

/**
 * Opaque domain handle.
 */
typedef struct Mfd3dDomain Mfd3dDomain;

/**
 * Opaque node set handle.
 */
typedef struct Mfd3dNodes Mfd3dNodes;

typedef struct Mfd3dOctDistParams {
  size_t m;
  size_t k;
  size_t s;
  size_t n;
  double delta;
} Mfd3dOctDistParams;

typedef struct Mfd3dSolveOptions {
  /**
   * Method name as accepted by the config files, e.g. `oct-dist:k=18`.
   */
  const char *method;
  /**
   * Nonzero selects `f = constant`, `g = 0`; zero selects `u = exp(x+y+z)`.
   */
  bool constant_rhs;
  double constant;
  enum Mfd3dSolverKind solver;
  double tol;
  size_t maxit;
  bool sigma;
} Mfd3dSolveOptions;

/**
 * Outcome of [`mfd3d_solve`]. Quantities that were not computed are NaN.
 */
typedef struct Mfd3dReport {
  size_t n_interior;
  size_t n_boundary;
  double e_ref;
  double density;
  double sigma;
  double iterations;
  size_t k_min;
  double k_mean;
  size_t k_max;
  /**
   * True when a solution vector was produced.
   */
  bool solved;
} Mfd3dReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mfd3d_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *mfd3d_last_error(void);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum Mfd3dStatus mfd3d_domain_new_ball(double cx,
                                       double cy,
                                       double cz,
                                       double radius,
                                       struct Mfd3dDomain **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum Mfd3dStatus mfd3d_domain_from_stl_file(const char *path, struct Mfd3dDomain **out);

/**
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` be valid for writes.
 */
enum Mfd3dStatus mfd3d_domain_from_stl_bytes(const uint8_t *bytes,
                                             size_t len,
                                             struct Mfd3dDomain **out);

/**
 * Reseeds the randomized ray retries of the inside test.
 *
 * # Safety
 * `domain` must be a live handle.
 */
enum Mfd3dStatus mfd3d_domain_set_seed(struct Mfd3dDomain *domain, uint64_t seed);

/**
 * # Safety
 * `domain` must be a live handle, `xyz` hold 3 doubles and `inside` be
 * valid for writes.
 */
enum Mfd3dStatus mfd3d_domain_contains(const struct Mfd3dDomain *domain,
                                       const double *xyz,
                                       bool *inside);

/**
 * # Safety
 * `domain` must be null or a handle not freed before.
 */
void mfd3d_domain_free(struct Mfd3dDomain *domain);

/**
 * Interior nodes at spacing `h` plus boundary nodes projected from them.
 *
 * # Safety
 * `domain` must be a live handle and `out` valid for writes.
 */
enum Mfd3dStatus mfd3d_nodes_generate(const struct Mfd3dDomain *domain,
                                      enum Mfd3dNodeKind kind,
                                      double h,
                                      struct Mfd3dNodes **out);

/**
 * # Safety
 * `interior` and `boundary` must hold `3 * n` doubles each (may be null
 * when the count is zero); `out` must be valid for writes.
 */
enum Mfd3dStatus mfd3d_nodes_from_arrays(const double *interior,
                                         size_t n_interior,
                                         const double *boundary,
                                         size_t n_boundary,
                                         struct Mfd3dNodes **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum Mfd3dStatus mfd3d_nodes_load(const char *path, struct Mfd3dNodes **out);

/**
 * # Safety
 * `nodes` must be a live handle and `path` a NUL-terminated string.
 */
enum Mfd3dStatus mfd3d_nodes_save(const struct Mfd3dNodes *nodes, const char *path);

/**
 * # Safety
 * `nodes` must be a live handle; the outputs must be valid for writes.
 */
enum Mfd3dStatus mfd3d_nodes_counts(const struct Mfd3dNodes *nodes,
                                    size_t *n_interior,
                                    size_t *n_boundary);

/**
 * Copies all node coordinates, interior first, into `xyz` (`capacity`
 * points).
 *
 * # Safety
 * `nodes` must be a live handle and `xyz` hold `3 * capacity` doubles.
 */
enum Mfd3dStatus mfd3d_nodes_copy(const struct Mfd3dNodes *nodes, double *xyz, size_t capacity);

/**
 * # Safety
 * `nodes` must be null or a handle not freed before.
 */
void mfd3d_nodes_free(struct Mfd3dNodes *nodes);

/**
 * Default oct-dist parameters.
 */
struct Mfd3dOctDistParams mfd3d_oct_dist_defaults(void);

/**
 * Influence set of interior node `center`, center first. `params` may be
 * null for the defaults. The number of members goes to `len`.
 *
 * # Safety
 * `nodes` must be a live handle, `members` hold `capacity` entries and
 * `len` be valid for writes.
 */
enum Mfd3dStatus mfd3d_select_oct_dist(const struct Mfd3dNodes *nodes,
                                       size_t center,
                                       const struct Mfd3dOctDistParams *params,
                                       size_t *members,
                                       size_t capacity,
                                       size_t *len);

/**
 * Laplacian weights at the first of `count` points by polyharmonic RBF-FD
 * (`r^5`, exact for quadratics).
 *
 * # Safety
 * `xyz` must hold `3 * count` doubles and `weights` `count` doubles.
 */
enum Mfd3dStatus mfd3d_stencil_weights(const double *xyz, size_t count, double *weights);

/**
 * Builds and solves the system on `nodes`. On success the report is filled
 * even when the method failed on some stencil (then `solved` is false and
 * `e_ref` NaN or Inf). `solution` may be null; otherwise it receives the
 * `capacity >= n_interior` interior values.
 *
 * # Safety
 * `nodes` and `options` must be valid, `options->method` NUL-terminated,
 * `report` valid for writes and `solution` null or `capacity` long.
 */
enum Mfd3dStatus mfd3d_solve(const struct Mfd3dNodes *nodes,
                             const struct Mfd3dSolveOptions *options,
                             struct Mfd3dReport *report,
                             double *solution,
                             size_t capacity);

/**
 * Shape quality of the tetrahedron with vertices `xyz[0..12]`: 1 for the
 * regular tetrahedron, 0 when degenerate. NaN for a null pointer.
 *
 * # Safety
 * `xyz` must be null or hold 12 doubles.
 */
double mfd3d_tet_gamma(const double *xyz);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFD3D_H */
