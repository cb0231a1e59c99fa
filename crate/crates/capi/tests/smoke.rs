//! Exercise the C surface the way a foreign binding would: through the
//! extern functions, raw pointers, and status codes.

use frag_capi::*;
use std::ffi::CString;
use std::ptr;

fn spec(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn version_is_nul_terminated() {
    let v = frag_version();
    let s = unsafe { std::ffi::CStr::from_ptr(v) }.to_str().unwrap();
    assert_eq!(s, env!("CARGO_PKG_VERSION"));
}

#[test]
fn evolve_through_handles() {
    unsafe {
        let mut env: *mut FragEnv = ptr::null_mut();
        let st = frag_env_new(spec("const:p=0.5").as_ptr(), 10, 0, &mut env);
        assert_eq!(st, FragStatus::Ok);

        let mut p = 0.0;
        assert_eq!(frag_env_proportion(env, 3, 2, &mut p), FragStatus::Ok);
        assert_eq!(p, 0.5);
        assert_eq!(frag_env_proportion(env, 3, 4, &mut p), FragStatus::OutOfRange);

        let mut part: *mut FragPartition = ptr::null_mut();
        assert_eq!(frag_evolve(env, 2, &mut part), FragStatus::Ok);
        assert_eq!(frag_partition_len(part), 2);
        let mut buf = [0.0f64; 2];
        assert_eq!(frag_partition_copy_points(part, buf.as_mut_ptr(), 2), FragStatus::Ok);
        assert_eq!(buf, [0.25, 0.75]);
        assert_eq!(
            frag_partition_copy_points(part, buf.as_mut_ptr(), 1),
            FragStatus::InvalidArgument
        );

        let mut mass = 0.0;
        assert_eq!(frag_partition_measure(part, 0.0, 0.5, true, true, &mut mass), FragStatus::Ok);
        assert_eq!(mass, 0.5);
        let mut mesh = 0.0;
        assert_eq!(frag_partition_longest_interval(part, &mut mesh), FragStatus::Ok);
        assert_eq!(mesh, 0.5);

        frag_partition_free(part);
        frag_env_free(env);
    }
}

#[test]
fn log_domain_and_walk() {
    unsafe {
        let mut env: *mut FragEnv = ptr::null_mut();
        assert_eq!(
            frag_env_new(spec("full:dist=uniform").as_ptr(), 50, 7, &mut env),
            FragStatus::Ok
        );

        let mut lp: *mut FragLogPartition = ptr::null_mut();
        assert_eq!(frag_evolve_log(env, 50, &mut lp), FragStatus::Ok);
        assert_eq!(frag_log_partition_len(lp), 50);
        let mut cdf = -1.0;
        assert_eq!(frag_log_partition_transformed_cdf(lp, 1.0, &mut cdf), FragStatus::Ok);
        assert_eq!(cdf, 1.0);
        let mut rate = -1.0;
        assert_eq!(frag_log_partition_rate_estimate(lp, 0.3, &mut rate), FragStatus::Ok);
        assert!(rate >= -1e-12);

        let mut probs = vec![0.0f64; 51];
        assert_eq!(frag_walk_distribution(env, 50, probs.as_mut_ptr(), 51), FragStatus::Ok);
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() <= 1e-12);
        assert_eq!(
            frag_walk_distribution(env, 50, probs.as_mut_ptr(), 50),
            FragStatus::InvalidArgument
        );

        let mut vals = vec![0u32; 100];
        assert_eq!(frag_simulate_walk(env, 50, 100, 3, vals.as_mut_ptr(), 100), FragStatus::Ok);
        assert!(vals.iter().all(|&v| v <= 50));

        frag_log_partition_free(lp);
        frag_env_free(env);
    }
}

#[test]
fn rate_profile_round_trip() {
    unsafe {
        let mut profile: *mut FragProfile = ptr::null_mut();
        assert_eq!(
            frag_profile_new(spec("point,v=0.5").as_ptr(), 0, &mut profile),
            FragStatus::Ok
        );
        assert_eq!(frag_profile_p_bar(profile), 0.5);
        assert!((frag_profile_x_star(profile) - 0.5).abs() <= 1e-12);

        let mut rate = 0.0;
        assert_eq!(frag_profile_rate(profile, 0.25, &mut rate), FragStatus::Ok);
        let mut annealed = 0.0;
        assert_eq!(frag_annealed_rate(0.5, 0.25, &mut annealed), FragStatus::Ok);
        assert!((rate - annealed).abs() <= 1e-10);

        let mut alpha = 0.0;
        assert_eq!(frag_profile_alpha_i(profile, (-rate).exp(), &mut alpha), FragStatus::Ok);
        assert!((alpha - 0.25).abs() <= 1e-8);
        assert_eq!(frag_profile_alpha_i(profile, 0.2, &mut alpha), FragStatus::OutOfRange);

        assert!((frag_profile_tilde_cdf(profile, 1.0) - 1.0).abs() <= 1e-15);

        frag_profile_free(profile);
    }
}

#[test]
fn errors_surface_as_statuses() {
    unsafe {
        let mut env: *mut FragEnv = ptr::null_mut();
        assert_eq!(
            frag_env_new(spec("bogus:zzz").as_ptr(), 4, 0, &mut env),
            FragStatus::InvalidArgument
        );
        assert_eq!(
            frag_env_new(spec("const:p=1.5").as_ptr(), 4, 0, &mut env),
            FragStatus::InvalidArgument
        );
        assert_eq!(frag_env_new(ptr::null(), 4, 0, &mut env), FragStatus::NullPointer);

        let mut out = 0.0;
        assert_eq!(frag_binomial_cdf(10, 1.5, 2, &mut out), FragStatus::InvalidArgument);
        assert_eq!(frag_normal_quantile(0.0, &mut out), FragStatus::InvalidArgument);
        assert_eq!(frag_normal_quantile(0.975, &mut out), FragStatus::Ok);
        assert!((out - 1.959963985).abs() <= 1e-8);

        let mut profile: *mut FragProfile = ptr::null_mut();
        assert_eq!(
            frag_profile_new(spec("point,v=1.0").as_ptr(), 0, &mut profile),
            FragStatus::InvalidArgument
        );

        // Freeing NULL is a no-op.
        frag_env_free(ptr::null_mut());
        frag_partition_free(ptr::null_mut());
        frag_log_partition_free(ptr::null_mut());
        frag_profile_free(ptr::null_mut());
    }
}
