#ifndef FRAG_H
#define FRAG_H

/* Generated by cbindgen from frag-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes for every fallible entry point.
typedef enum FragStatus {
  FRAG_STATUS_OK = 0,
  // Malformed spec string, invalid numeric argument, or bad buffer size.
  FRAG_STATUS_INVALID_ARGUMENT = 1,
  // Index, alpha, or x outside its documented range.
  FRAG_STATUS_OUT_OF_RANGE = 2,
  // Operation undefined for this rule (e.g. fully random rate function).
  FRAG_STATUS_UNSUPPORTED = 3,
  // Mismatched object sizes or an empty partition.
  FRAG_STATUS_SIZE_MISMATCH = 4,
  // A required pointer was NULL.
  FRAG_STATUS_NULL_POINTER = 5,
} FragStatus;

// Opaque realized environment.
typedef struct FragEnv FragEnv;

// Opaque log-domain partition.
typedef struct FragLogPartition FragLogPartition;

// Opaque linear-domain partition.
typedef struct FragPartition FragPartition;

// Opaque rate profile (solved Λ/I/x* objects for a measure H).
typedef struct FragProfile FragProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a NUL-terminated static string.
const char *frag_version(void);

// Realize an environment from a rule spec.
//
// # Safety
// `spec` must be a NUL-terminated string; `out` must be a valid pointer.
enum FragStatus frag_env_new(const char *spec, size_t n_max, uint64_t seed, struct FragEnv **out);

// # Safety
// `env` must come from [`frag_env_new`] and not be freed twice.
void frag_env_free(struct FragEnv *env);

// Splitting proportion p_{n,k}, 1 ≤ k ≤ n ≤ n_max.
//
// # Safety
// `env` must be a live handle; `out` must be valid.
enum FragStatus frag_env_proportion(const struct FragEnv *env, size_t n, size_t k, double *out);

// Evolve n steps from the trivial partition.
//
// # Safety
// `env` must be a live handle; `out` must be valid.
enum FragStatus frag_evolve(const struct FragEnv *env, size_t n, struct FragPartition **out);

// # Safety
// `part` must come from [`frag_evolve`] and not be freed twice.
void frag_partition_free(struct FragPartition *part);

// Number of break points.
//
// # Safety
// `part` must be a live handle.
size_t frag_partition_len(const struct FragPartition *part);

// Copy the break points a_{n,1..n} into `buf` (capacity `len` ≥ n).
//
// # Safety
// `buf` must point to at least `len` writable f64 slots.
enum FragStatus frag_partition_copy_points(const struct FragPartition *part,
                                           double *buf,
                                           size_t len);

// Empirical measure of an interval, with explicit closure flags.
//
// # Safety
// `part` must be a live handle; `out` must be valid.
enum FragStatus frag_partition_measure(const struct FragPartition *part,
                                       double lo,
                                       double hi,
                                       bool include_lo,
                                       bool include_hi,
                                       double *out);

// Length of the longest subinterval (mesh), implicit endpoints included.
//
// # Safety
// `part` must be a live handle; `out` must be valid.
enum FragStatus frag_partition_longest_interval(const struct FragPartition *part, double *out);

// Evolve n steps in log domain (underflow-immune).
//
// # Safety
// `env` must be a live handle; `out` must be valid.
enum FragStatus frag_evolve_log(const struct FragEnv *env, size_t n, struct FragLogPartition **out);

// # Safety
// `lp` must come from [`frag_evolve_log`] and not be freed twice.
void frag_log_partition_free(struct FragLogPartition *lp);

// # Safety
// `lp` must be a live handle.
size_t frag_log_partition_len(const struct FragLogPartition *lp);

// Copy log a_{n,1..n} into `buf` (capacity `len` ≥ n). Entries may be -inf.
//
// # Safety
// `buf` must point to at least `len` writable f64 slots.
enum FragStatus frag_log_partition_copy_points(const struct FragLogPartition *lp,
                                               double *buf,
                                               size_t len);

// CDF of the transformed measure at x: (1/n)·#{k : a_{n,k}^{1/n} ≤ x}.
//
// # Safety
// `lp` must be a live handle; `out` must be valid.
enum FragStatus frag_log_partition_transformed_cdf(const struct FragLogPartition *lp,
                                                   double x,
                                                   double *out);

// Finite-n rate estimate -(1/n)·log a_{n,⌊αn⌋}.
//
// # Safety
// `lp` must be a live handle; `out` must be valid.
enum FragStatus frag_log_partition_rate_estimate(const struct FragLogPartition *lp,
                                                 double alpha,
                                                 double *out);

// Law of the walk position x_n: writes n+1 probabilities into `buf`.
//
// # Safety
// `buf` must point to at least `len` writable f64 slots with `len` ≥ n+1.
enum FragStatus frag_walk_distribution(const struct FragEnv *env,
                                       size_t n,
                                       double *buf,
                                       size_t len);

// Terminal values of `replicas` quenched walk trajectories.
//
// # Safety
// `buf` must point to at least `len` writable u32 slots with `len` ≥ replicas.
enum FragStatus frag_simulate_walk(const struct FragEnv *env,
                                   size_t n,
                                   size_t replicas,
                                   uint64_t seed,
                                   uint32_t *buf,
                                   size_t len);

// Stable binomial CDF P(Bin(n,p) ≤ k).
//
// # Safety
// `out` must be valid.
enum FragStatus frag_binomial_cdf(size_t n, double p, int64_t k, double *out);

// Standard normal CDF Φ(t); total on all finite inputs.
double frag_normal_cdf(double t);

// Normal quantile Q(u) for u in (0,1).
//
// # Safety
// `out` must be valid.
enum FragStatus frag_normal_quantile(double u, double *out);

// Build a rate profile from a distribution spec (`point,v=0.5`, `uniform`,
// `twopoint,v=0.2;0.8,w=0.5`, `atoms,t=…,w=…`); continuous laws are
// discretized with `atoms` midpoints.
//
// # Safety
// `spec` must be NUL-terminated; `out` must be valid.
enum FragStatus frag_profile_new(const char *spec, size_t atoms, struct FragProfile **out);

// # Safety
// `profile` must come from [`frag_profile_new`] and not be freed twice.
void frag_profile_free(struct FragProfile *profile);

// # Safety
// `profile` must be a live handle.
double frag_profile_p_bar(const struct FragProfile *profile);

// I(0); +inf when H({1}) > 0.
//
// # Safety
// `profile` must be a live handle.
double frag_profile_i0(const struct FragProfile *profile);

// Support edge x* = e^{-I(0)}.
//
// # Safety
// `profile` must be a live handle.
double frag_profile_x_star(const struct FragProfile *profile);

// Tilted-mean root θ(α) of Λ'(θ) = α.
//
// # Safety
// `profile` must be a live handle; `out` must be valid.
enum FragStatus frag_profile_theta(const struct FragProfile *profile, double alpha, double *out);

// Rate function I(α).
//
// # Safety
// `profile` must be a live handle; `out` must be valid.
enum FragStatus frag_profile_rate(const struct FragProfile *profile, double alpha, double *out);

// Inverse rate α_I(x) on (x*, 1).
//
// # Safety
// `profile` must be a live handle; `out` must be valid.
enum FragStatus frag_profile_alpha_i(const struct FragProfile *profile, double x, double *out);

// CDF of the transformed endpoint limit; total on [0,1].
//
// # Safety
// `profile` must be a live handle.
double frag_profile_tilde_cdf(const struct FragProfile *profile, double x);

// Annealed (binomial KL) rate I_a(α) for mean p̄.
//
// # Safety
// `out` must be valid.
enum FragStatus frag_annealed_rate(double p_bar, double alpha, double *out);

// Annealed dominance envelope F_a(x) on [1-p̄, 1].
//
// # Safety
// `out` must be valid.
enum FragStatus frag_annealed_cdf_bound(double p_bar, double x, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRAG_H */
