//! The auxiliary time-inhomogeneous walk x_n.
//!
//! x_0 = 0 and x_n = x_{n-1} + y_{n,x_{n-1}+1}, where y_{n,k} is Bernoulli
//! with success probability p_{n,k}. Its CDF reproduces the break points:
//! a_{n,k} = P(x_n ≤ k-1), which makes the walk an independent oracle for the
//! fragmentation recursion (and vice versa).
//!
//! The forward DP over the probability vector is the production path; the
//! brute-force path enumeration exists only for verification at small n.

use crate::error::{Error, Result};
use crate::fragmenter::Partition;
use crate::proportions::Environment;
use crate::rng;

/// Distribution of x_n over {0, …, n}.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistribution {
    probs: Vec<f64>,
}

impl WalkDistribution {
    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    /// q_{n,j} = P(x_n = j).
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// P(x_n ≤ k); k = -1 gives 0 and k ≥ n gives 1.
    pub fn cdf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        if k as usize >= self.n() {
            return 1.0;
        }
        self.probs[..=(k as usize)].iter().sum()
    }
}

/// P(x_n ≤ k) for a walk distribution.
pub fn walk_cdf(dist: &WalkDistribution, k: i64) -> f64 {
    dist.cdf(k)
}

/// Forward DP for the law of x_n under the given environment.
pub fn walk_distribution(env: &Environment, n: usize) -> Result<WalkDistribution> {
    if n > env.n_max() {
        return Err(Error::IndexOutOfRange { index: n, n: env.n_max() });
    }
    let mut q = Vec::with_capacity(n + 1);
    q.push(1.0);
    let mut row = Vec::with_capacity(n);
    for m in 1..=n {
        env.fill_row(m, &mut row);
        // In place, right to left: q[j] ← q[j]·(1-p_{m,j+1}) + q[j-1]·p_{m,j}.
        q.push(q[m - 1] * row[m - 1]);
        for j in (1..m).rev() {
            q[j] = q[j] * (1.0 - row[j]) + q[j - 1] * row[j - 1];
        }
        q[0] *= 1.0 - row[0];
    }
    Ok(WalkDistribution { probs: q })
}

/// Binomial CDF P(Bin(n,p) ≤ k), computed from log-domain terms summed from
/// the smaller tail so large n cannot overflow or cancel catastrophically.
pub fn binomial_cdf(n: usize, p: f64, k: i64) -> f64 {
    assert!((0.0..=1.0).contains(&p), "p = {p} outside [0,1]");
    if k < 0 {
        return 0.0;
    }
    if k as usize >= n {
        return 1.0;
    }
    let k = k as usize;
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0; // k < n here
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let ln_fact_n = libm::lgamma(n as f64 + 1.0);
    let ln_term = |j: usize| -> f64 {
        ln_fact_n - libm::lgamma(j as f64 + 1.0) - libm::lgamma((n - j) as f64 + 1.0)
            + j as f64 * ln_p
            + (n - j) as f64 * ln_q
    };
    // Sum whichever tail has fewer terms, smallest terms first.
    if 2 * (k + 1) <= n + 1 {
        let mut acc = 0.0;
        for j in 0..=k {
            acc += ln_term(j).exp();
        }
        acc.min(1.0)
    } else {
        let mut acc = 0.0;
        for j in ((k + 1)..=n).rev() {
            acc += ln_term(j).exp();
        }
        (1.0 - acc).clamp(0.0, 1.0)
    }
}

/// Exhaustive 2^n path sum; verification oracle for the DP, n ≤ 20 only.
pub fn enumerate_paths_oracle(env: &Environment, n: usize) -> Result<WalkDistribution> {
    const MAX_N: usize = 20;
    if n > MAX_N {
        return Err(Error::TooLarge { max: MAX_N, got: n });
    }
    if n > env.n_max() {
        return Err(Error::IndexOutOfRange { index: n, n: env.n_max() });
    }
    let mut probs = vec![0.0; n + 1];
    for path in 0u64..(1u64 << n) {
        let mut x = 0usize;
        let mut weight = 1.0;
        for m in 1..=n {
            let p = env.proportion(m, x + 1);
            if (path >> (m - 1)) & 1 == 1 {
                weight *= p;
                x += 1;
            } else {
                weight *= 1.0 - p;
            }
        }
        probs[x] += weight;
    }
    Ok(WalkDistribution { probs })
}

/// Terminal values of R independent quenched trajectories.
#[derive(Debug, Clone)]
pub struct WalkSample {
    n: usize,
    seed: u64,
    values: Vec<u32>,
}

impl WalkSample {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn replicas(&self) -> usize {
        self.values.len()
    }

    /// Empirical CDF at k.
    pub fn empirical_cdf(&self, k: i64) -> f64 {
        if k < 0 {
            return 0.0;
        }
        let count = self.values.iter().filter(|&&v| i64::from(v) <= k).count();
        count as f64 / self.values.len() as f64
    }
}

/// Simulate terminal values of the walk. Step uniforms are keyed by
/// (seed, replica, m), so every trajectory is independent of evaluation order
/// and of the environment stream.
pub fn simulate_walk(env: &Environment, n: usize, replicas: usize, seed: u64) -> Result<WalkSample> {
    if n > env.n_max() {
        return Err(Error::IndexOutOfRange { index: n, n: env.n_max() });
    }
    if replicas == 0 {
        return Err(Error::DomainError { value: 0.0, domain: "replicas ≥ 1" });
    }
    let mut values = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let state = rng::row_state(seed, rng::STREAM_WALK, r as u64);
        let mut x = 0usize;
        for m in 1..=n {
            let u = rng::row_unit(state, m as u64);
            if u <= env.proportion(m, x + 1) {
                x += 1;
            }
        }
        values.push(x as u32);
    }
    Ok(WalkSample { n, seed, values })
}

/// Report from checking a_{n,k} = P(x_n ≤ k-1) across all k.
#[derive(Debug, Clone, Copy)]
pub struct RepresentationReport {
    pub max_abs_err: f64,
}

/// Verify the walk representation of the break points.
pub fn verify_representation(
    part: &Partition,
    dist: &WalkDistribution,
) -> Result<RepresentationReport> {
    if part.n() != dist.n() {
        return Err(Error::SizeMismatch { lhs: part.n(), rhs: dist.n() });
    }
    let mut cum = 0.0;
    let mut max_abs_err: f64 = 0.0;
    for (k, &a) in part.points().iter().enumerate() {
        cum += dist.probs()[k];
        max_abs_err = max_abs_err.max((a - cum).abs());
    }
    Ok(RepresentationReport { max_abs_err })
}
