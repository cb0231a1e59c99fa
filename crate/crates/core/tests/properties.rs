//! Structural invariants and independent-oracle checks.
//!
//! The oracles here deliberately avoid the production code paths: the
//! binomial CDF is recomputed in exact rational arithmetic, the normal CDF
//! from the erf power series, and the walk law by exhaustive path
//! enumeration.

use frag_core::fragmenter::{evolve, evolve_inspect, evolve_log, EmpiricalQuery, Partition};
use frag_core::limits::{normal_cdf, normal_quantile, AtomicMeasure, RateProfile};
use frag_core::proportions::{Environment, ProportionDistribution, SplittingRule};
use frag_core::rng;
use frag_core::walk::{
    binomial_cdf, enumerate_paths_oracle, verify_representation, walk_distribution,
};
use num_rational::BigRational;
use num_traits::cast::ToPrimitive;
use num_traits::{One, Zero};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Binomial CDF in exact rational arithmetic; `p` enters as the exact dyadic
/// value of the float.
fn exact_binomial_cdf(n: usize, p: f64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let p = BigRational::from_float(p).expect("finite p");
    let q = BigRational::one() - p.clone();
    let mut coeff = BigRational::one(); // C(n, j)
    let mut acc = BigRational::zero();
    for j in 0..=(k as usize).min(n) {
        let term = coeff.clone() * p.pow(j as i32) * q.pow((n - j) as i32);
        acc += term;
        coeff = coeff * BigRational::from_integer((n - j).into())
            / BigRational::from_integer((j + 1).into());
    }
    acc.to_f64().unwrap()
}

/// Φ via the erf power series; accurate to ~1e-16 for |t| ≤ 4.
fn series_normal_cdf(t: f64) -> f64 {
    let x = t / std::f64::consts::SQRT_2;
    assert!(x.abs() <= 4.0, "series oracle domain");
    let mut term = x;
    let mut sum = x;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= -x * x / n as f64;
        let add = term / (2 * n + 1) as f64;
        sum += add;
        if add.abs() < 1e-22 || n > 200 {
            break;
        }
    }
    0.5 + sum / std::f64::consts::PI.sqrt()
}

fn uniform_full(n_max: usize, seed: u64) -> Environment {
    Environment::new(
        SplittingRule::FullyRandom(ProportionDistribution::Uniform01),
        n_max,
        seed,
    )
    .unwrap()
}

fn uniform_strat(n_max: usize, seed: u64) -> Environment {
    Environment::new(
        SplittingRule::RandomStratified(ProportionDistribution::Uniform01),
        n_max,
        seed,
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Oracle agreement
// ---------------------------------------------------------------------------

#[test]
fn binomial_cdf_matches_exact_rational_oracle() {
    let cases = [
        (50usize, 0.3, 10i64),
        (50, 0.3, 25),
        (50, 0.7, 40),
        (40, 0.5, 13),
        (25, 0.11, 2),
        (60, 0.9, 58),
    ];
    for (n, p, k) in cases {
        let got = binomial_cdf(n, p, k);
        let want = exact_binomial_cdf(n, p, k);
        let rel = (got - want).abs() / want;
        assert!(rel <= 1e-13, "n={n} p={p} k={k}: rel err {rel:.3e}");
    }
}

#[test]
fn normal_cdf_matches_series_oracle() {
    for t in [-3.5, -2.0, -1.0, -0.25, 0.0, 0.4, 1.0, 1.386, 1.959963985, 3.0] {
        let got = normal_cdf(t);
        let want = series_normal_cdf(t);
        assert!((got - want).abs() <= 1e-15, "t={t}: {got} vs {want}");
    }
}

#[test]
fn walk_dp_matches_enumeration_on_fifty_environments() {
    for seed in 0..50 {
        let n = 14;
        let env = uniform_full(n, seed);
        let dp = walk_distribution(&env, n).unwrap();
        let oracle = enumerate_paths_oracle(&env, n).unwrap();
        for (a, b) in dp.probs().iter().zip(oracle.probs()) {
            assert!((a - b).abs() <= 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn representation_identity_across_regimes_and_seeds() {
    let n = 500;
    for seed in 0..100u64 {
        let env = match seed % 4 {
            0 => Environment::new(SplittingRule::Constant(0.3), n, 0).unwrap(),
            1 => {
                let seq: Vec<f64> =
                    (0..n).map(|i| if i % 2 == 0 { 0.2 } else { 0.9 }).collect();
                Environment::new(SplittingRule::DeterministicSequence(seq), n, 0).unwrap()
            }
            2 => uniform_strat(n, seed),
            _ => uniform_full(n, seed),
        };
        let part = evolve(&env, n).unwrap();
        let dist = walk_distribution(&env, n).unwrap();
        let rep = verify_representation(&part, &dist).unwrap();
        assert!(rep.max_abs_err <= 1e-11, "seed {seed}: {}", rep.max_abs_err);
    }
}

#[test]
fn walk_mass_conserved_at_every_checkpoint() {
    for seed in [3u64, 17] {
        let env = uniform_full(256, seed);
        for n in [1usize, 2, 4, 16, 64, 256] {
            let dist = walk_distribution(&env, n).unwrap();
            let total: f64 = dist.probs().iter().sum();
            assert!((total - 1.0).abs() <= 1e-12, "n={n}");
            let mut prev = 0.0;
            for k in 0..=n as i64 {
                let c = dist.cdf(k);
                assert!(c >= prev - 1e-15);
                prev = c;
            }
        }
    }
}

#[test]
fn annealed_average_matches_binomial() {
    // Across-environment mean of A_{n,k} estimates the annealed CDF.
    let (n, k, replicas) = (50usize, 20usize, 400u64);
    let mut values = Vec::with_capacity(replicas as usize);
    for seed in 0..replicas {
        let env = uniform_full(n, seed);
        let part = evolve(&env, n).unwrap();
        values.push(part.points()[k - 1]);
    }
    let mean: f64 = values.iter().sum::<f64>() / values.len() as f64;
    let var: f64 =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    let expect = binomial_cdf(n, 0.5, k as i64 - 1);
    let bound = 4.0 * (var / values.len() as f64).sqrt();
    assert!(
        (mean - expect).abs() <= bound,
        "mean {mean} vs {expect}, bound {bound}"
    );
}

// ---------------------------------------------------------------------------
// Partition invariants over many random environments
// ---------------------------------------------------------------------------

#[test]
fn partition_invariants_over_ten_thousand_environments() {
    // n varies over [1, 500]; sortedness, sandwich, and unit length hold
    // after every refine step.
    let mut checked_steps = 0usize;
    for i in 0..10_000u64 {
        let n = 1 + (rng::counter_bits(i, 0xA11CE, 0, 0) % 500) as usize;
        let env = match i % 3 {
            0 => uniform_full(n, i),
            1 => uniform_strat(n, i),
            _ => Environment::new(
                SplittingRule::Constant((i % 11) as f64 / 10.0),
                n,
                0,
            )
            .unwrap(),
        };
        let mut prev: Vec<f64> = Vec::new();
        let mut ok = true;
        let part = evolve_inspect(&env, n, |_, pts| {
            for (k, &v) in pts.iter().enumerate() {
                let left = if k == 0 { 0.0 } else { prev[k - 1] };
                let right = if k + 1 == pts.len() { 1.0 } else { prev[k] };
                if !(v >= left && v <= right) || (k > 0 && pts[k - 1] > v) {
                    ok = false;
                }
            }
            prev = pts.to_vec();
        })
        .unwrap();
        assert!(ok, "env {i}: sandwich or order violated");
        assert!((part.total_length() - 1.0).abs() <= 1e-12, "env {i}");
        checked_steps += n;
    }
    assert!(checked_steps > 1_000_000);
}

#[test]
fn log_and_linear_agree_where_linear_is_representable() {
    for seed in 0..25u64 {
        let env = match seed % 3 {
            0 => uniform_full(200, seed),
            1 => uniform_strat(200, seed),
            _ => Environment::new(SplittingRule::Constant(0.42), 200, 0).unwrap(),
        };
        let part = evolve(&env, 200).unwrap();
        let lp = evolve_log(&env, 200).unwrap();
        for (&a, &la) in part.points().iter().zip(lp.logpoints()) {
            if a > 1e-290 {
                let rel = (la.exp() - a).abs() / a;
                assert!(rel <= 1e-10, "seed {seed}: rel {rel:.3e}");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Rate-function invariants
// ---------------------------------------------------------------------------

#[test]
fn lambda_prime_matches_central_differences() {
    let measures = [
        AtomicMeasure::dirac(0.5).unwrap(),
        AtomicMeasure::from_atoms(vec![(0.1, 0.2), (0.5, 0.5), (0.95, 0.3)]).unwrap(),
        AtomicMeasure::uniform_midpoint(64).unwrap(),
    ];
    let h = 1e-5;
    for m in &measures {
        for i in 0..=60 {
            let theta = -30.0 + i as f64;
            let fd = (m.lambda(theta + h) - m.lambda(theta - h)) / (2.0 * h);
            let exact = m.lambda_prime(theta);
            // 1e-9 absolute floor: the difference quotient cannot resolve
            // derivatives below its own cancellation noise eps·|Λ|/2h.
            let bound = (1e-6 * exact.abs()).max(1e-9);
            assert!(
                (fd - exact).abs() <= bound,
                "theta={theta}: fd {fd} vs {exact}"
            );
        }
    }
}

#[test]
fn rate_function_monotone_and_tilde_cdf_nondecreasing() {
    let profile = RateProfile::new(AtomicMeasure::uniform_midpoint(256).unwrap()).unwrap();
    let mut prev_i = f64::INFINITY;
    for i in 1..60 {
        let alpha = profile.p_bar() * i as f64 / 60.0;
        if alpha <= profile.alpha_lo() {
            continue;
        }
        let r = profile.rate_i(alpha).unwrap();
        assert!(r < prev_i, "I not strictly decreasing at alpha={alpha}");
        prev_i = r;
    }
    let mut prev = -1.0;
    for i in 0..=200 {
        let x = i as f64 / 200.0;
        let v = profile.tilde_g_cdf(x);
        assert!(v >= prev - 1e-12, "tilde CDF decreased at x={x}");
        prev = v;
    }
}

#[test]
fn bulk_masses_are_symmetric_for_symmetric_rule() {
    use frag_core::limits::{bulk_deviation, make_bulk_scaling};
    let n = 10_000;
    let rule = SplittingRule::Constant(0.5);
    let sc = make_bulk_scaling(&rule, n).unwrap();
    let part = evolve(&Environment::new(rule, n, 0).unwrap(), n).unwrap();
    for (x, y) in [(0.2, 0.4), (0.1, 0.45), (0.3, 0.48)] {
        let rows =
            bulk_deviation(&part, &sc, &[(x, y), (1.0 - y, 1.0 - x)]).unwrap();
        let gap = (rows[0].scaled_mass - rows[1].scaled_mass).abs();
        assert!(gap <= 2.0 / sc.sigma_n, "[{x},{y}]: gap {gap}");
    }
}

#[test]
fn endpoint_tails_behave_at_boundaries() {
    let n = 4000;
    let lp = evolve_log(
        &Environment::new(SplittingRule::Constant(0.5), n, 0).unwrap(),
        n,
    )
    .unwrap();
    // Below the support edge x* = 1/2 nothing survives the n-th root.
    assert!(lp.transformed_cdf(0.45) <= 0.01);
    // Near 1 the transformed CDF approaches p̄ = 1/2.
    assert!((lp.transformed_cdf(0.999) - 0.5).abs() <= 0.05);
}

#[test]
fn x_star_never_exceeds_one_minus_mean() {
    for i in 0..200u64 {
        let t1 = rng::unit_open(i, 1, 0, 0);
        let t2 = rng::unit_open(i, 2, 0, 0);
        let w = rng::unit_open(i, 3, 0, 0);
        let h = AtomicMeasure::from_atoms(vec![(t1, w), (t2, 1.0 - w)]).unwrap();
        let profile = match RateProfile::new(h) {
            Ok(p) => p,
            Err(_) => continue,
        };
        assert!(
            profile.x_star() <= 1.0 - profile.p_bar() + 1e-9,
            "x* {} vs 1-p̄ {}",
            profile.x_star(),
            1.0 - profile.p_bar()
        );
    }
}

// ---------------------------------------------------------------------------
// Property tests
// ---------------------------------------------------------------------------

fn atoms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..=1.0, 0.01f64..1.0), 1..8).prop_map(|mut atoms| {
        let total: f64 = atoms.iter().map(|&(_, w)| w).sum();
        for a in &mut atoms {
            a.1 /= total;
        }
        atoms
    })
}

proptest! {
    #[test]
    fn proportions_stay_in_range_and_reproduce(seed in any::<u64>(), n in 1usize..80) {
        let env = uniform_full(n, seed);
        let twin = uniform_full(n, seed);
        for m in 1..=n {
            for k in 1..=m {
                let p = env.proportion(m, k);
                prop_assert!((0.0..=1.0).contains(&p));
                prop_assert_eq!(p.to_bits(), twin.proportion(m, k).to_bits());
            }
        }
    }

    #[test]
    fn stratified_rows_are_k_independent(seed in any::<u64>(), n in 1usize..60) {
        let env = uniform_strat(n, seed);
        for m in 1..=n {
            let first = env.proportion(m, 1);
            for k in 2..=m {
                prop_assert_eq!(env.proportion(m, k).to_bits(), first.to_bits());
            }
        }
    }

    #[test]
    fn atoms_mean_matches_weighted_sum(atoms in atoms_strategy()) {
        let dist = ProportionDistribution::Atoms(atoms.clone());
        prop_assume!(dist.validate().is_ok());
        let expect: f64 = atoms.iter().map(|&(t, w)| t * w).sum();
        let got = dist.mean();
        prop_assert!((got - expect).abs() <= 1e-15 * expect.abs().max(1.0));
    }

    #[test]
    fn lambda_is_convex(atoms in atoms_strategy(),
                        t1 in -40.0f64..40.0,
                        t2 in -40.0f64..40.0,
                        lam in 0.0f64..1.0) {
        let m = AtomicMeasure::from_atoms(atoms).unwrap();
        let mid = lam * t1 + (1.0 - lam) * t2;
        let lhs = m.lambda(mid);
        let rhs = lam * m.lambda(t1) + (1.0 - lam) * m.lambda(t2);
        prop_assert!(lhs <= rhs + 1e-12, "{lhs} > {rhs}");
    }

    #[test]
    fn quantile_inverts_cdf_everywhere(u in 1e-8f64..1.0) {
        prop_assume!(u < 1.0 - 1e-9);
        let q = normal_quantile(u).unwrap();
        prop_assert!((normal_cdf(q) - u).abs() <= 1e-12);
    }

    #[test]
    fn measure_total_and_half_open_additivity(
        points in prop::collection::vec(0.0f64..=1.0, 1..40),
        split in 0.0f64..=1.0,
    ) {
        let mut sorted = points;
        sorted.sort_by(f64::total_cmp);
        let part = Partition::from_points(sorted).unwrap();
        let whole = part.measure_of(EmpiricalQuery::closed(0.0, 1.0).unwrap()).unwrap();
        prop_assert_eq!(whole, 1.0);
        let left = part.measure_of(EmpiricalQuery::half_open(0.0, split).unwrap()).unwrap();
        let right = part.measure_of(EmpiricalQuery::half_open(split, 1.0).unwrap()).unwrap();
        let at_one = part.measure_of(EmpiricalQuery::new(1.0, 1.0, true, true).unwrap()).unwrap();
        prop_assert!((left + right + at_one - whole).abs() <= 1e-15);
    }

    #[test]
    fn duality_round_trip_random_point_mass(p in 0.05f64..0.95, frac in 0.1f64..0.9) {
        let profile = RateProfile::new(AtomicMeasure::dirac(p).unwrap()).unwrap();
        let alpha = p * frac;
        prop_assume!(alpha > 1e-4);
        let x = (-profile.rate_i(alpha).unwrap()).exp();
        prop_assume!(x > profile.x_star() && x < 1.0);
        let back = profile.alpha_i(x).unwrap();
        prop_assert!((back - alpha).abs() <= 1e-8, "alpha {alpha} back {back}");
    }
}
