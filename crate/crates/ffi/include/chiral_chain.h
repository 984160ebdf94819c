#ifndef CHIRAL_CHAIN_H
#define CHIRAL_CHAIN_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum CcStatus {
  CC_STATUS_OK = 0,
  CC_STATUS_NULL_POINTER = 1,
  CC_STATUS_DOMAIN = 2,
  CC_STATUS_DIVERGENT = 3,
  CC_STATUS_NON_CONVERGENCE = 4,
  CC_STATUS_CONFIG = 5,
  CC_STATUS_NUMERICAL_INTEGRITY = 6,
  CC_STATUS_RESOLUTION = 7,
  CC_STATUS_FIT = 8,
  CC_STATUS_UNDEFINED_RETENTION = 9,
  CC_STATUS_IO = 10,
  CC_STATUS_BUFFER_TOO_SMALL = 11,
  CC_STATUS_PANIC = 12,
} CcStatus;

// Chain geometry, rates and optional single-site displacement.
typedef struct CcChain CcChain;

// Populations, `P_tot` and `I_tot` on a time grid.
typedef struct CcTrajectory CcTrajectory;

typedef struct CcComplex {
  double re;
  double im;
} CcComplex;

// `J = decay + i·shift`; `shift` is NaN when `shift_divergent` is set.
typedef struct CcKernel {
  double decay;
  double shift;
  bool shift_divergent;
} CcKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Bytes in the last error message of this thread, excluding the NUL.
size_t cc_last_error_length(void);

// Copies the last error message, NUL-terminated and truncated to `len`.
// Returns the number of bytes written excluding the NUL.
//
// # Safety
// `buf` must be valid for `len` bytes or null.
size_t cc_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *cc_version(void);

enum CcStatus cc_bessel_j(uint32_t order, double x, double *value);

enum CcStatus cc_bessel_y(uint32_t order, double x, double *value);

enum CcStatus cc_struve_h(uint32_t order, double x, double *value);

enum CcStatus cc_chiral_fg(double xi,
                           double gamma_left,
                           double gamma_right,
                           struct CcComplex *f,
                           struct CcComplex *g);

enum CcStatus cc_kernel_1d(double xi, struct CcKernel *value);

enum CcStatus cc_kernel_2d(double xi, double alignment, struct CcKernel *value);

enum CcStatus cc_kernel_3d(double xi, double alignment, struct CcKernel *value);

// Uniform chain of `n_atoms` with spacing phase `xi`.
enum CcStatus cc_chain_new(size_t n_atoms,
                           double xi,
                           double gamma_left,
                           double gamma_right,
                           struct CcChain **chain);

// Displace the 1-based `site` by `fraction` of the spacing; replaces any
// earlier displacement.
enum CcStatus cc_chain_displace(struct CcChain *chain, size_t site, double fraction);

void cc_chain_free(struct CcChain *chain);

// Row-major `n × n` coupling matrix in units of the larger rate.
enum CcStatus cc_chain_coupling(const struct CcChain *chain, struct CcComplex *buf, size_t len);

// Propagate the uniform initial state over `times`, which must start at 0
// and increase strictly. Every point is cross-checked between backends.
enum CcStatus cc_propagate(const struct CcChain *chain,
                           const double *times,
                           size_t n_times,
                           struct CcTrajectory **trajectory);

// Long-horizon run to `horizon` on a logarithmic (`log_grid`) or 0.05-step
// linear grid, spot-checked between backends.
enum CcStatus cc_propagate_long(const struct CcChain *chain,
                                double horizon,
                                bool log_grid,
                                struct CcTrajectory **trajectory);

void cc_trajectory_free(struct CcTrajectory *trajectory);

// Number of time points, or 0 for a null handle.
size_t cc_trajectory_len(const struct CcTrajectory *trajectory);

size_t cc_trajectory_atoms(const struct CcTrajectory *trajectory);

bool cc_trajectory_underflow(const struct CcTrajectory *trajectory);

enum CcStatus cc_trajectory_times(const struct CcTrajectory *trajectory, double *buf, size_t len);

enum CcStatus cc_trajectory_total(const struct CcTrajectory *trajectory, double *buf, size_t len);

enum CcStatus cc_trajectory_intensity(const struct CcTrajectory *trajectory,
                                      double *buf,
                                      size_t len);

// Row-major `len × n_atoms` site populations.
enum CcStatus cc_trajectory_populations(const struct CcTrajectory *trajectory,
                                        double *buf,
                                        size_t len);

// `t → ∞` site populations from the uniform state. `approximate` is set
// when the eigenbasis was too ill-conditioned and a long propagation was
// used instead.
enum CcStatus cc_steady_state(const struct CcChain *chain,
                              double *buf,
                              size_t len,
                              bool *approximate);

// Plateau count of `P_tot` with default detector settings.
enum CcStatus cc_count_plateaus(const double *times,
                                const double *p_tot,
                                const double *intensity,
                                size_t len,
                                size_t *count);

// Burst count of `I_tot` with default detector settings.
enum CcStatus cc_count_bursts(const double *times,
                              const double *intensity,
                              size_t len,
                              size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CHIRAL_CHAIN_H */
