#ifndef NBPDN_H
#define NBPDN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NbpdnStatus {
  NBPDN_STATUS_OK = 0,
  NBPDN_STATUS_NULL_POINTER = 1,
  NBPDN_STATUS_INVALID_ARGUMENT = 2,
  NBPDN_STATUS_INFEASIBLE_DEGREE = 3,
  NBPDN_STATUS_CONNECTIVITY_FAILURE = 4,
  NBPDN_STATUS_INVALID_SPARSITY = 5,
  NBPDN_STATUS_DIMENSION_MISMATCH = 6,
  NBPDN_STATUS_BUDGET_EXCEEDED = 7,
  NBPDN_STATUS_INVALID_PARTITION = 8,
  NBPDN_STATUS_MAX_ITERS_EXCEEDED = 9,
  NBPDN_STATUS_CONFIG = 10,
  NBPDN_STATUS_IO = 11,
  NBPDN_STATUS_PANIC = 12,
} NbpdnStatus;

typedef enum NbpdnAlgorithm {
  NBPDN_ALGORITHM_BPDN = 0,
  NBPDN_ALGORITHM_NBPDN1 = 1,
  NBPDN_ALGORITHM_NBPDN2 = 2,
  NBPDN_ALGORITHM_PNBPDN1 = 3,
  NBPDN_ALGORITHM_PNBPDN2 = 4,
  NBPDN_ALGORITHM_DLASSO = 5,
} NbpdnAlgorithm;

// Opaque problem instance.
typedef struct NbpdnInstance NbpdnInstance;

// Opaque network matrix.
typedef struct NbpdnNetwork NbpdnNetwork;

// Opaque run trace.
typedef struct NbpdnTrace NbpdnTrace;

typedef struct NbpdnBoundInputs {
  double delta_sa;
  double delta_2s;
  double delta_s;
  double theta;
  double lambda;
  size_t s;
  size_t a;
  size_t b;
  size_t k;
} NbpdnBoundInputs;

typedef struct NbpdnBoundConstants {
  // `c[0]` is c1, …, `c[14]` is c15.
  double c[15];
  // `d[0]` is d1, …, `d[3]` is d4.
  double d[4];
  double fixed_eps;
  double fixed_tail;
  double pruned_fixed_eps;
  double pruned_l1_eps;
  double pruned_l2_eps;
  bool fixed_bound_valid;
  bool recurrence_l1_valid;
  bool recurrence_l2_valid;
  bool iterative_bound_valid;
} NbpdnBoundConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, static NUL-terminated string.
const char *nbpdn_version(void);

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call on the same thread.
const char *nbpdn_last_error(void);

// Random `s`-sparse signal of length `n` observed by `nodes` nodes with
// `m` Gaussian measurements each. A non-finite `snr_db` means noiseless.
enum NbpdnStatus nbpdn_instance_generate(size_t n,
                                         size_t s,
                                         size_t nodes,
                                         size_t m,
                                         double snr_db,
                                         uint64_t seed,
                                         struct NbpdnInstance **out);

void nbpdn_instance_free(struct NbpdnInstance *inst);

enum NbpdnStatus nbpdn_instance_dim(const struct NbpdnInstance *inst, size_t *out);

enum NbpdnStatus nbpdn_instance_node_count(const struct NbpdnInstance *inst, size_t *out);

enum NbpdnStatus nbpdn_instance_epsilon(const struct NbpdnInstance *inst, double *out);

// Copy the true signal into `buf` (at least `dim` entries).
enum NbpdnStatus nbpdn_instance_signal(const struct NbpdnInstance *inst, double *buf, size_t len);

// Random connected `degree`-regular network with uniform weights
// including self loops.
enum NbpdnStatus nbpdn_network_generate(size_t nodes,
                                        size_t degree,
                                        uint64_t seed,
                                        struct NbpdnNetwork **out);

// `H = I`: no cooperation.
enum NbpdnStatus nbpdn_network_identity(size_t nodes, struct NbpdnNetwork **out);

void nbpdn_network_free(struct NbpdnNetwork *net);

// Run `algorithm` for `max_iters` outer iterations with default solver
// settings. Pruned variants use the instance's sparsity.
enum NbpdnStatus nbpdn_run(const struct NbpdnInstance *inst,
                           const struct NbpdnNetwork *net,
                           enum NbpdnAlgorithm algorithm,
                           double lambda,
                           size_t max_iters,
                           struct NbpdnTrace **out);

void nbpdn_trace_free(struct NbpdnTrace *trace);

// Number of recorded iterations, `K + 1` (row 0 is the initialization).
enum NbpdnStatus nbpdn_trace_iterations(const struct NbpdnTrace *trace, size_t *out);

// `‖x − x̂_{l,k}‖₂`.
enum NbpdnStatus nbpdn_trace_error(const struct NbpdnTrace *trace, size_t k, size_t l, double *out);

// Final estimate of node `l` into `buf` (at least `dim` entries).
enum NbpdnStatus nbpdn_trace_final_estimate(const struct NbpdnTrace *trace,
                                            size_t l,
                                            double *buf,
                                            size_t len);

// mSENR in dB of a single trace at iteration `k` (`+inf` on exact recovery).
enum NbpdnStatus nbpdn_trace_msenr_db(const struct NbpdnTrace *trace, size_t k, double *out);

// Evaluate every bound constant and validity flag.
enum NbpdnStatus nbpdn_bound_constants(const struct NbpdnBoundInputs *inputs,
                                       struct NbpdnBoundConstants *out);

// Exact `δ_s` of the row-major `m × n` matrix at `data`.
enum NbpdnStatus nbpdn_estimate_ric(const double *data, size_t m, size_t n, size_t s, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NBPDN_H */
