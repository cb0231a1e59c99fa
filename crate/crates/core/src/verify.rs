//! Self-verification battery: the oracle identities and structural
//! invariants, runnable as one unit (the `verify` CLI subcommand).

use crate::error::Result;
use crate::fragmenter::{evolve, evolve_inspect, evolve_log};
use crate::limits::{annealed_rate, AtomicMeasure, RateProfile};
use crate::proportions::{Environment, ProportionDistribution, SplittingRule};
use crate::walk::{binomial_cdf, enumerate_paths_oracle, verify_representation, walk_distribution};
use serde::Serialize;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub max_err: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn from_err(name: &str, max_err: f64, tolerance: f64, detail: String) -> Self {
        Self { name: name.to_string(), pass: max_err <= tolerance, max_err, tolerance, detail }
    }
}

/// Battery configuration. `perturb` injects a bias into the oracle
/// comparisons so a failing run can be produced on demand (harness
/// self-test); 0.0 disables it.
#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub max_enum_n: usize,
    pub perturb: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { max_enum_n: 12, perturb: 0.0, seed: 0 }
    }
}

fn regimes(seed: u64) -> Vec<(&'static str, Environment)> {
    let alternating: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 0.3 } else { 0.7 }).collect();
    vec![
        (
            "constant",
            Environment::new(SplittingRule::Constant(0.37), 200, 0).unwrap(),
        ),
        (
            "sequence",
            Environment::new(SplittingRule::DeterministicSequence(alternating), 200, 0).unwrap(),
        ),
        (
            "stratified",
            Environment::new(
                SplittingRule::RandomStratified(ProportionDistribution::Uniform01),
                200,
                seed,
            )
            .unwrap(),
        ),
        (
            "fully-random",
            Environment::new(
                SplittingRule::FullyRandom(ProportionDistribution::Uniform01),
                200,
                seed.wrapping_add(1),
            )
            .unwrap(),
        ),
    ]
}

/// Break points equal the walk CDF in every regime.
fn check_representation(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut max_err: f64 = 0.0;
    for (_, env) in regimes(cfg.seed) {
        let n = 200;
        let mut part = evolve(&env, n)?;
        if cfg.perturb != 0.0 {
            let pts: Vec<f64> = part.points().iter().map(|a| (a + cfg.perturb).min(1.0)).collect();
            part = crate::fragmenter::Partition::from_points(pts)?;
        }
        let dist = walk_distribution(&env, n)?;
        max_err = max_err.max(verify_representation(&part, &dist)?.max_abs_err);
    }
    Ok(CheckResult::from_err(
        "representation_identity",
        max_err,
        1e-11,
        "a_{n,k} vs P(x_n <= k-1), all regimes, n=200".into(),
    ))
}

/// Forward DP equals the exhaustive path sum at small n.
fn check_enumeration(cfg: &VerifyConfig) -> Result<CheckResult> {
    let n = cfg.max_enum_n.min(20);
    let mut max_err: f64 = 0.0;
    for seed in 0..5 {
        let env = Environment::new(
            SplittingRule::FullyRandom(ProportionDistribution::Uniform01),
            n,
            cfg.seed.wrapping_add(seed),
        )?;
        let dp = walk_distribution(&env, n)?;
        let oracle = enumerate_paths_oracle(&env, n)?;
        for (a, b) in dp.probs().iter().zip(oracle.probs()) {
            max_err = max_err.max((a - b + cfg.perturb).abs());
        }
    }
    Ok(CheckResult::from_err(
        "path_enumeration",
        max_err,
        1e-12,
        format!("DP vs 2^n path sum, n={n}, 5 seeds"),
    ))
}

/// Constant-p partitions equal the binomial CDF.
fn check_binomial_reduction(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut max_err: f64 = 0.0;
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let env = Environment::new(SplittingRule::Constant(p), 50, 0)?;
        let part = evolve(&env, 50)?;
        for k in 1..=50usize {
            let expect = binomial_cdf(50, p, k as i64 - 1);
            max_err = max_err.max((part.points()[k - 1] - expect + cfg.perturb).abs());
        }
    }
    Ok(CheckResult::from_err(
        "binomial_reduction",
        max_err,
        1e-12,
        "constant rule vs binomial CDF, p=0.1..0.9, n=50".into(),
    ))
}

/// alpha_I inverts rate_I, and the point-mass rate equals the binomial KL.
fn check_duality(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut max_err: f64 = 0.0;
    for h in [
        AtomicMeasure::dirac(0.5)?,
        AtomicMeasure::from_atoms(vec![(0.2, 0.5), (0.8, 0.5)])?,
    ] {
        let profile = RateProfile::new(h)?;
        let span = profile.p_bar() - profile.alpha_lo();
        for i in 1..=15 {
            let alpha = profile.alpha_lo() + span * (0.05 + 0.88 * i as f64 / 16.0);
            let x = (-profile.rate_i(alpha)?).exp();
            if x <= profile.x_star() || x >= 1.0 {
                continue;
            }
            let back = profile.alpha_i(x)?;
            max_err = max_err.max((back - alpha + cfg.perturb).abs());
        }
    }
    let dirac = RateProfile::new(AtomicMeasure::dirac(0.3)?)?;
    for i in 1..=19 {
        let alpha = i as f64 / 20.0;
        max_err = max_err.max((dirac.rate_i(alpha)? - annealed_rate(0.3, alpha)).abs());
    }
    Ok(CheckResult::from_err(
        "duality_roundtrip",
        max_err,
        1e-8,
        "alpha_I(exp(-I(alpha))) vs alpha; point-mass I vs binomial KL".into(),
    ))
}

/// Sorted points, unit total length, sandwich bounds, log/linear agreement,
/// walk mass conservation. Reports the worst error/tolerance ratio.
fn check_structural(cfg: &VerifyConfig) -> Result<CheckResult> {
    let mut worst_ratio: f64 = 0.0;
    let mut worst = "all invariants held";
    fn note(ratio: f64, what: &'static str, worst_ratio: &mut f64, worst: &mut &'static str) {
        if ratio > *worst_ratio {
            *worst_ratio = ratio;
            *worst = what;
        }
    }
    for (_, env) in regimes(cfg.seed) {
        let n = 200;
        let mut prev: Vec<f64> = Vec::new();
        let mut order_violated = false;
        let part = evolve_inspect(&env, n, |_, pts| {
            for (k, &v) in pts.iter().enumerate() {
                let left = if k == 0 { 0.0 } else { prev[k - 1] };
                let right = if k + 1 == pts.len() { 1.0 } else { prev[k] };
                if !(v >= left && v <= right) || (k > 0 && pts[k - 1] > v) {
                    order_violated = true;
                }
            }
            prev = pts.to_vec();
        })?;
        if order_violated {
            note(f64::INFINITY, "sandwich/sortedness", &mut worst_ratio, &mut worst);
        }
        let len_err = (part.total_length() - 1.0).abs();
        note(len_err / 1e-12, "unit total length", &mut worst_ratio, &mut worst);

        let lp = evolve_log(&env, n)?;
        for (&a, &la) in part.points().iter().zip(lp.logpoints()) {
            if a > 1e-290 {
                let rel = (la.exp() - a).abs() / a;
                note(rel / 1e-10, "log/linear agreement", &mut worst_ratio, &mut worst);
            }
        }

        let dist = walk_distribution(&env, n)?;
        let mass_err = (dist.probs().iter().sum::<f64>() - 1.0).abs();
        note(mass_err / 1e-12, "walk mass conservation", &mut worst_ratio, &mut worst);
    }
    Ok(CheckResult {
        name: "structural_invariants".into(),
        pass: worst_ratio <= 1.0,
        max_err: worst_ratio,
        tolerance: 1.0,
        detail: format!("worst error/tolerance ratio; binding: {worst}"),
    })
}

/// Run the whole battery; all-pass means the oracle identities hold.
pub fn run_battery(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_representation(cfg)?,
        check_enumeration(cfg)?,
        check_binomial_reduction(cfg)?,
        check_duality(cfg)?,
        check_structural(cfg)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_battery_passes() {
        let results = run_battery(&VerifyConfig::default()).unwrap();
        assert_eq!(results.len(), 5);
        for r in &results {
            assert!(r.pass, "{}: max_err {} > {}", r.name, r.max_err, r.tolerance);
        }
    }

    #[test]
    fn perturbed_battery_fails() {
        let cfg = VerifyConfig { perturb: 1e-6, ..Default::default() };
        let results = run_battery(&cfg).unwrap();
        assert!(results.iter().any(|r| !r.pass));
    }

    #[test]
    fn enumeration_bound_is_configurable() {
        let cfg = VerifyConfig { max_enum_n: 8, ..Default::default() };
        let results = run_battery(&cfg).unwrap();
        let enum_check = results.iter().find(|r| r.name == "path_enumeration").unwrap();
        assert!(enum_check.detail.contains("n=8"));
        assert!(enum_check.pass);
    }
}
