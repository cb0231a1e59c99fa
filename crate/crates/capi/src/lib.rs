//! C ABI over `frag-core`: opaque handles, status codes, caller-owned
//! buffers. The generated header lands in `include/frag.h`.
//!
//! Conventions:
//! - Every fallible call returns a [`FragStatus`]; outputs go through
//!   out-pointers that are written only on `FRAG_STATUS_OK`.
//! - Handles come from `*_new`/`frag_evolve*` and must be released with the
//!   matching `*_free`; passing NULL to a free is a no-op.
//! - Rule and distribution specs reuse the CLI mini-grammar
//!   (`const:p=0.5`, `full:dist=uniform`, `point,v=0.5`, …).

use frag_core::error::Error;
use frag_core::fragmenter::{evolve, evolve_log, EmpiricalQuery, LogPartition, Partition};
use frag_core::limits::{annealed_cdf_bound, annealed_rate, AtomicMeasure, RateProfile};
use frag_core::proportions::Environment;
use frag_core::rulespec::{parse_dist_spec, parse_rule_spec};
use frag_core::walk::{binomial_cdf, simulate_walk, walk_distribution};
use std::ffi::{c_char, CStr};

/// Status codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FragStatus {
    Ok = 0,
    /// Malformed spec string, invalid numeric argument, or bad buffer size.
    InvalidArgument = 1,
    /// Index, alpha, or x outside its documented range.
    OutOfRange = 2,
    /// Operation undefined for this rule (e.g. fully random rate function).
    Unsupported = 3,
    /// Mismatched object sizes or an empty partition.
    SizeMismatch = 4,
    /// A required pointer was NULL.
    NullPointer = 5,
}

fn status_of(err: &Error) -> FragStatus {
    match err {
        Error::InvalidProportion { .. }
        | Error::InvalidWeights { .. }
        | Error::RowLengthMismatch { .. }
        | Error::DomainError { .. }
        | Error::BadGrid { .. }
        | Error::Parse(_) => FragStatus::InvalidArgument,
        Error::TableTooSmall { .. }
        | Error::IndexOutOfRange { .. }
        | Error::TooLarge { .. }
        | Error::AlphaOutOfRange { .. }
        | Error::XOutOfRange { .. } => FragStatus::OutOfRange,
        Error::NotStratified | Error::UnsupportedRule { .. } | Error::DegenerateVariance => {
            FragStatus::Unsupported
        }
        Error::EmptyPartition | Error::SizeMismatch { .. } => FragStatus::SizeMismatch,
    }
}

/// Opaque realized environment.
pub struct FragEnv(Environment);
/// Opaque linear-domain partition.
pub struct FragPartition(Partition);
/// Opaque log-domain partition.
pub struct FragLogPartition(LogPartition);
/// Opaque rate profile (solved Λ/I/x* objects for a measure H).
pub struct FragProfile(RateProfile);

/// Library version as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn frag_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn cstr<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Realize an environment from a rule spec.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn frag_env_new(
    spec: *const c_char,
    n_max: usize,
    seed: u64,
    out: *mut *mut FragEnv,
) -> FragStatus {
    if out.is_null() {
        return FragStatus::NullPointer;
    }
    let Some(spec) = cstr(spec) else { return FragStatus::NullPointer };
    let rule = match parse_rule_spec(spec) {
        Ok(rule) => rule,
        Err(e) => return status_of(&e),
    };
    match Environment::new(rule, n_max, seed) {
        Ok(env) => {
            *out = Box::into_raw(Box::new(FragEnv(env)));
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `env` must come from [`frag_env_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn frag_env_free(env: *mut FragEnv) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// Splitting proportion p_{n,k}, 1 ≤ k ≤ n ≤ n_max.
///
/// # Safety
/// `env` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_env_proportion(
    env: *const FragEnv,
    n: usize,
    k: usize,
    out: *mut f64,
) -> FragStatus {
    if env.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    let env = &(*env).0;
    if n < 1 || n > env.n_max() || k < 1 || k > n {
        return FragStatus::OutOfRange;
    }
    *out = env.proportion(n, k);
    FragStatus::Ok
}

/// Evolve n steps from the trivial partition.
///
/// # Safety
/// `env` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_evolve(
    env: *const FragEnv,
    n: usize,
    out: *mut *mut FragPartition,
) -> FragStatus {
    if env.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    match evolve(&(*env).0, n) {
        Ok(part) => {
            *out = Box::into_raw(Box::new(FragPartition(part)));
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `part` must come from [`frag_evolve`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn frag_partition_free(part: *mut FragPartition) {
    if !part.is_null() {
        drop(Box::from_raw(part));
    }
}

/// Number of break points.
///
/// # Safety
/// `part` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn frag_partition_len(part: *const FragPartition) -> usize {
    if part.is_null() {
        return 0;
    }
    (*part).0.n()
}

/// Copy the break points a_{n,1..n} into `buf` (capacity `len` ≥ n).
///
/// # Safety
/// `buf` must point to at least `len` writable f64 slots.
#[no_mangle]
pub unsafe extern "C" fn frag_partition_copy_points(
    part: *const FragPartition,
    buf: *mut f64,
    len: usize,
) -> FragStatus {
    if part.is_null() || buf.is_null() {
        return FragStatus::NullPointer;
    }
    let points = (*part).0.points();
    if len < points.len() {
        return FragStatus::InvalidArgument;
    }
    std::ptr::copy_nonoverlapping(points.as_ptr(), buf, points.len());
    FragStatus::Ok
}

/// Empirical measure of an interval, with explicit closure flags.
///
/// # Safety
/// `part` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_partition_measure(
    part: *const FragPartition,
    lo: f64,
    hi: f64,
    include_lo: bool,
    include_hi: bool,
    out: *mut f64,
) -> FragStatus {
    if part.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    let query = match EmpiricalQuery::new(lo, hi, include_lo, include_hi) {
        Ok(q) => q,
        Err(e) => return status_of(&e),
    };
    match (*part).0.measure_of(query) {
        Ok(v) => {
            *out = v;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Length of the longest subinterval (mesh), implicit endpoints included.
///
/// # Safety
/// `part` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_partition_longest_interval(
    part: *const FragPartition,
    out: *mut f64,
) -> FragStatus {
    if part.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    *out = (*part).0.longest_interval();
    FragStatus::Ok
}

/// Evolve n steps in log domain (underflow-immune).
///
/// # Safety
/// `env` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_evolve_log(
    env: *const FragEnv,
    n: usize,
    out: *mut *mut FragLogPartition,
) -> FragStatus {
    if env.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    match evolve_log(&(*env).0, n) {
        Ok(lp) => {
            *out = Box::into_raw(Box::new(FragLogPartition(lp)));
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `lp` must come from [`frag_evolve_log`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn frag_log_partition_free(lp: *mut FragLogPartition) {
    if !lp.is_null() {
        drop(Box::from_raw(lp));
    }
}

/// # Safety
/// `lp` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn frag_log_partition_len(lp: *const FragLogPartition) -> usize {
    if lp.is_null() {
        return 0;
    }
    (*lp).0.n()
}

/// Copy log a_{n,1..n} into `buf` (capacity `len` ≥ n). Entries may be -inf.
///
/// # Safety
/// `buf` must point to at least `len` writable f64 slots.
#[no_mangle]
pub unsafe extern "C" fn frag_log_partition_copy_points(
    lp: *const FragLogPartition,
    buf: *mut f64,
    len: usize,
) -> FragStatus {
    if lp.is_null() || buf.is_null() {
        return FragStatus::NullPointer;
    }
    let points = (*lp).0.logpoints();
    if len < points.len() {
        return FragStatus::InvalidArgument;
    }
    std::ptr::copy_nonoverlapping(points.as_ptr(), buf, points.len());
    FragStatus::Ok
}

/// CDF of the transformed measure at x: (1/n)·#{k : a_{n,k}^{1/n} ≤ x}.
///
/// # Safety
/// `lp` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_log_partition_transformed_cdf(
    lp: *const FragLogPartition,
    x: f64,
    out: *mut f64,
) -> FragStatus {
    if lp.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    if (*lp).0.n() == 0 {
        return FragStatus::SizeMismatch;
    }
    if !(0.0..=1.0).contains(&x) {
        return FragStatus::OutOfRange;
    }
    *out = (*lp).0.transformed_cdf(x);
    FragStatus::Ok
}

/// Finite-n rate estimate -(1/n)·log a_{n,⌊αn⌋}.
///
/// # Safety
/// `lp` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_log_partition_rate_estimate(
    lp: *const FragLogPartition,
    alpha: f64,
    out: *mut f64,
) -> FragStatus {
    if lp.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    match (*lp).0.rate_estimate(alpha) {
        Ok(v) => {
            *out = v;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Law of the walk position x_n: writes n+1 probabilities into `buf`.
///
/// # Safety
/// `buf` must point to at least `len` writable f64 slots with `len` ≥ n+1.
#[no_mangle]
pub unsafe extern "C" fn frag_walk_distribution(
    env: *const FragEnv,
    n: usize,
    buf: *mut f64,
    len: usize,
) -> FragStatus {
    if env.is_null() || buf.is_null() {
        return FragStatus::NullPointer;
    }
    if len < n + 1 {
        return FragStatus::InvalidArgument;
    }
    match walk_distribution(&(*env).0, n) {
        Ok(dist) => {
            std::ptr::copy_nonoverlapping(dist.probs().as_ptr(), buf, n + 1);
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Terminal values of `replicas` quenched walk trajectories.
///
/// # Safety
/// `buf` must point to at least `len` writable u32 slots with `len` ≥ replicas.
#[no_mangle]
pub unsafe extern "C" fn frag_simulate_walk(
    env: *const FragEnv,
    n: usize,
    replicas: usize,
    seed: u64,
    buf: *mut u32,
    len: usize,
) -> FragStatus {
    if env.is_null() || buf.is_null() {
        return FragStatus::NullPointer;
    }
    if len < replicas {
        return FragStatus::InvalidArgument;
    }
    match simulate_walk(&(*env).0, n, replicas, seed) {
        Ok(sample) => {
            std::ptr::copy_nonoverlapping(sample.values().as_ptr(), buf, replicas);
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Stable binomial CDF P(Bin(n,p) ≤ k).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_binomial_cdf(
    n: usize,
    p: f64,
    k: i64,
    out: *mut f64,
) -> FragStatus {
    if out.is_null() {
        return FragStatus::NullPointer;
    }
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return FragStatus::InvalidArgument;
    }
    *out = binomial_cdf(n, p, k);
    FragStatus::Ok
}

/// Standard normal CDF Φ(t); total on all finite inputs.
#[no_mangle]
pub extern "C" fn frag_normal_cdf(t: f64) -> f64 {
    frag_core::limits::normal_cdf(t)
}

/// Normal quantile Q(u) for u in (0,1).
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_normal_quantile(u: f64, out: *mut f64) -> FragStatus {
    if out.is_null() {
        return FragStatus::NullPointer;
    }
    match frag_core::limits::normal_quantile(u) {
        Ok(q) => {
            *out = q;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Build a rate profile from a distribution spec (`point,v=0.5`, `uniform`,
/// `twopoint,v=0.2;0.8,w=0.5`, `atoms,t=…,w=…`); continuous laws are
/// discretized with `atoms` midpoints.
///
/// # Safety
/// `spec` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_new(
    spec: *const c_char,
    atoms: usize,
    out: *mut *mut FragProfile,
) -> FragStatus {
    if out.is_null() {
        return FragStatus::NullPointer;
    }
    let Some(spec) = cstr(spec) else { return FragStatus::NullPointer };
    let dist = match parse_dist_spec(spec) {
        Ok(d) => d,
        Err(e) => return status_of(&e),
    };
    let measure = match AtomicMeasure::from_distribution(&dist, atoms) {
        Ok(m) => m,
        Err(e) => return status_of(&e),
    };
    match RateProfile::new(measure) {
        Ok(profile) => {
            *out = Box::into_raw(Box::new(FragProfile(profile)));
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `profile` must come from [`frag_profile_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_free(profile: *mut FragProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_p_bar(profile: *const FragProfile) -> f64 {
    if profile.is_null() {
        return f64::NAN;
    }
    (*profile).0.p_bar()
}

/// I(0); +inf when H({1}) > 0.
///
/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_i0(profile: *const FragProfile) -> f64 {
    if profile.is_null() {
        return f64::NAN;
    }
    (*profile).0.i0()
}

/// Support edge x* = e^{-I(0)}.
///
/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_x_star(profile: *const FragProfile) -> f64 {
    if profile.is_null() {
        return f64::NAN;
    }
    (*profile).0.x_star()
}

/// Tilted-mean root θ(α) of Λ'(θ) = α.
///
/// # Safety
/// `profile` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_theta(
    profile: *const FragProfile,
    alpha: f64,
    out: *mut f64,
) -> FragStatus {
    if profile.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    match (*profile).0.theta(alpha) {
        Ok(v) => {
            *out = v;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Rate function I(α).
///
/// # Safety
/// `profile` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_rate(
    profile: *const FragProfile,
    alpha: f64,
    out: *mut f64,
) -> FragStatus {
    if profile.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    match (*profile).0.rate_i(alpha) {
        Ok(v) => {
            *out = v;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Inverse rate α_I(x) on (x*, 1).
///
/// # Safety
/// `profile` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_alpha_i(
    profile: *const FragProfile,
    x: f64,
    out: *mut f64,
) -> FragStatus {
    if profile.is_null() || out.is_null() {
        return FragStatus::NullPointer;
    }
    match (*profile).0.alpha_i(x) {
        Ok(v) => {
            *out = v;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// CDF of the transformed endpoint limit; total on [0,1].
///
/// # Safety
/// `profile` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn frag_profile_tilde_cdf(profile: *const FragProfile, x: f64) -> f64 {
    if profile.is_null() {
        return f64::NAN;
    }
    (*profile).0.tilde_g_cdf(x)
}

/// Annealed (binomial KL) rate I_a(α) for mean p̄.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_annealed_rate(p_bar: f64, alpha: f64, out: *mut f64) -> FragStatus {
    if out.is_null() {
        return FragStatus::NullPointer;
    }
    if !(p_bar > 0.0 && p_bar < 1.0) || !(0.0..=1.0).contains(&alpha) {
        return FragStatus::InvalidArgument;
    }
    *out = annealed_rate(p_bar, alpha);
    FragStatus::Ok
}

/// Annealed dominance envelope F_a(x) on [1-p̄, 1].
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn frag_annealed_cdf_bound(
    p_bar: f64,
    x: f64,
    out: *mut f64,
) -> FragStatus {
    if out.is_null() {
        return FragStatus::NullPointer;
    }
    if !(p_bar > 0.0 && p_bar < 1.0) {
        return FragStatus::InvalidArgument;
    }
    match annealed_cdf_bound(p_bar, x) {
        Ok(v) => {
            *out = v;
            FragStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
