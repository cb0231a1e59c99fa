//! Break-point evolution for fragmentation with erasure.
//!
//! Step n splits every interval of the previous partition and erases the old
//! break points, leaving a_{n,k} = p_{n,k}·a_{n-1,k-1} + (1-p_{n,k})·a_{n-1,k}
//! with implicit endpoints a_{n,0} = 0 and a_{n,n+1} = 1. Each new point is a
//! convex combination of its bracketing pair, so the points stay sorted and
//! inside [0,1]; we clamp into the bracket to make both facts hold bit-exactly
//! under rounding.
//!
//! The same recursion runs in log domain via log-sum-exp, which keeps points
//! like a_{n,1} = 2^{-n} resolvable long after the linear values underflow.

use crate::error::{Error, Result};
use crate::proportions::Environment;

/// Ordered break points a_{n,1..n} of the n-th partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

/// Break points in log domain: logpoints[k-1] = log a_{n,k} ∈ [-∞, 0].
#[derive(Debug, Clone, PartialEq)]
pub struct LogPartition {
    logpoints: Vec<f64>,
}

/// An interval query against the empirical measure g_n.
///
/// Both closure conventions from the interval-counting question are exposed;
/// `closed` is the canonical one used internally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalQuery {
    pub lo: f64,
    pub hi: f64,
    pub include_lo: bool,
    pub include_hi: bool,
}

impl EmpiricalQuery {
    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, true)
    }

    /// Half-open [lo, hi): additive over adjacent intervals.
    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, true, false)
    }

    pub fn new(lo: f64, hi: f64, include_lo: bool, include_hi: bool) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::BadGrid { reason: format!("interval [{lo}, {hi}] reversed") });
        }
        Ok(Self { lo, hi, include_lo, include_hi })
    }

    fn contains(&self, x: f64) -> bool {
        let above = if self.include_lo { x >= self.lo } else { x > self.lo };
        let below = if self.include_hi { x <= self.hi } else { x < self.hi };
        above && below
    }
}

impl Partition {
    /// The trivial partition P_0 with no break points.
    pub fn trivial() -> Self {
        Self { points: Vec::new() }
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        for (i, &a) in points.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) || a.is_nan() {
                return Err(Error::InvalidProportion { n: points.len(), k: i + 1, value: a });
            }
            if i > 0 && points[i - 1] > a {
                return Err(Error::BadGrid {
                    reason: format!("points not sorted at index {i}"),
                });
            }
        }
        Ok(Self { points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Total length of all subintervals, summed gap by gap (telescopes to 1).
    pub fn total_length(&self) -> f64 {
        let mut prev = 0.0;
        let mut total = 0.0;
        for &a in &self.points {
            total += a - prev;
            prev = a;
        }
        total + (1.0 - prev)
    }

    /// g_n of an interval: break points inside, with multiplicity, over n.
    pub fn measure_of(&self, q: EmpiricalQuery) -> Result<f64> {
        if self.points.is_empty() {
            return Err(Error::EmptyPartition);
        }
        let count = self.points.iter().filter(|&&a| q.contains(a)).count();
        Ok(count as f64 / self.points.len() as f64)
    }

    /// Length ℓ_n of the longest subinterval, implicit endpoints included.
    pub fn longest_interval(&self) -> f64 {
        let mut prev = 0.0;
        let mut best: f64 = 0.0;
        for &a in &self.points {
            best = best.max(a - prev);
            prev = a;
        }
        best.max(1.0 - prev)
    }
}

impl LogPartition {
    pub fn trivial() -> Self {
        Self { logpoints: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.logpoints.len()
    }

    pub fn logpoints(&self) -> &[f64] {
        &self.logpoints
    }

    /// CDF of the transformed measure: (1/n)·#{k : a_{n,k}^{1/n} ≤ x},
    /// evaluated wholly in log domain as log a_{n,k} ≤ n·log x.
    pub fn transformed_cdf(&self, x: f64) -> f64 {
        let n = self.logpoints.len();
        assert!(n >= 1, "transformed_cdf needs n ≥ 1");
        let threshold = (n as f64) * x.ln();
        let count = self.logpoints.iter().filter(|&&la| la <= threshold).count();
        count as f64 / n as f64
    }

    /// Finite-n rate estimate -(1/n)·log a_{n,⌊αn⌋}.
    pub fn rate_estimate(&self, alpha: f64) -> Result<f64> {
        let n = self.logpoints.len();
        let idx = (alpha * n as f64).floor() as usize;
        if idx < 1 || idx > n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
        Ok(-self.logpoints[idx - 1] / n as f64)
    }
}

/// One refinement step: row must hold p_{n,1..n} with n = part.n + 1.
pub fn refine(part: &Partition, row: &[f64]) -> Result<Partition> {
    let n = part.n() + 1;
    if row.len() != n {
        return Err(Error::RowLengthMismatch { expected: n, got: row.len() });
    }
    for (k, &p) in row.iter().enumerate() {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::InvalidProportion { n, k: k + 1, value: p });
        }
    }
    let mut next = Vec::with_capacity(n);
    refine_into(&part.points, row, &mut next);
    Ok(Partition { points: next })
}

/// Core update; assumes row.len() == prev.len() + 1 and entries validated.
fn refine_into(prev: &[f64], row: &[f64], out: &mut Vec<f64>) {
    let n = row.len();
    out.clear();
    out.reserve(n);
    for k in 0..n {
        let left = if k == 0 { 0.0 } else { prev[k - 1] };
        let right = if k == n - 1 { 1.0 } else { prev[k] };
        let p = row[k];
        // Convex combination, clamped into its bracket so sortedness and the
        // sandwich bound survive rounding.
        let v = (p * left + (1.0 - p) * right).clamp(left, right);
        out.push(v);
    }
}

/// Same update in log domain: log a_{n,k} = logaddexp(log p + log L, log(1-p) + log R).
fn refine_log_into(prev: &[f64], row: &[f64], out: &mut Vec<f64>) {
    let n = row.len();
    out.clear();
    out.reserve(n);
    for k in 0..n {
        let log_left = if k == 0 { f64::NEG_INFINITY } else { prev[k - 1] };
        let log_right = if k == n - 1 { 0.0 } else { prev[k] };
        let p = row[k];
        let v = log_add_exp(p.ln() + log_left, (1.0 - p).ln() + log_right);
        out.push(v.clamp(log_left, log_right));
    }
}

/// logaddexp with lawful -∞ handling (p or a proportion of 0 contributes
/// nothing; two empty terms stay -∞).
#[inline]
fn log_add_exp(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Evolve the partition n steps from P_0 under an environment.
pub fn evolve(env: &Environment, n: usize) -> Result<Partition> {
    evolve_inspect(env, n, |_, _| {})
}

/// As [`evolve`], invoking `visit(m, points)` after every step m; lets a
/// caller harvest intermediate partitions without re-running the recursion.
pub fn evolve_inspect(
    env: &Environment,
    n: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<Partition> {
    if n > env.n_max() {
        return Err(Error::IndexOutOfRange { index: n, n: env.n_max() });
    }
    let mut cur = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(n);
    for m in 1..=n {
        env.fill_row(m, &mut row);
        refine_into(&cur, &row, &mut next);
        std::mem::swap(&mut cur, &mut next);
        visit(m, &cur);
    }
    Ok(Partition { points: cur })
}

/// Evolve in log domain; the same mathematical object as [`evolve`], immune
/// to underflow. Proportions of exactly 0 or 1 propagate -∞ lawfully.
pub fn evolve_log(env: &Environment, n: usize) -> Result<LogPartition> {
    evolve_log_inspect(env, n, |_, _| {})
}

pub fn evolve_log_inspect(
    env: &Environment,
    n: usize,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<LogPartition> {
    if n > env.n_max() {
        return Err(Error::IndexOutOfRange { index: n, n: env.n_max() });
    }
    let mut cur = Vec::with_capacity(n);
    let mut next = Vec::with_capacity(n);
    let mut row = Vec::with_capacity(n);
    for m in 1..=n {
        env.fill_row(m, &mut row);
        refine_log_into(&cur, &row, &mut next);
        std::mem::swap(&mut cur, &mut next);
        visit(m, &cur);
    }
    Ok(LogPartition { logpoints: cur })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proportions::SplittingRule;
    use crate::walk::binomial_cdf;

    fn fig1_env() -> Environment {
        let rule = SplittingRule::ExplicitTable(vec![vec![2.0 / 3.0], vec![0.5, 2.0 / 3.0]]);
        Environment::new(rule, 2, 0).unwrap()
    }

    fn constant_env(p: f64, n_max: usize) -> Environment {
        Environment::new(SplittingRule::Constant(p), n_max, 0).unwrap()
    }

    #[test]
    fn figure_worked_example() {
        let p1 = refine(&Partition::trivial(), &[2.0 / 3.0]).unwrap();
        assert!((p1.points()[0] - 1.0 / 3.0).abs() <= 1e-15);

        let p2 = refine(&p1, &[0.5, 2.0 / 3.0]).unwrap();
        assert!((p2.points()[0] - 1.0 / 6.0).abs() <= 1e-15);
        assert!((p2.points()[1] - 5.0 / 9.0).abs() <= 1e-15);

        let evolved = evolve(&fig1_env(), 2).unwrap();
        assert_eq!(evolved.points(), p2.points());
    }

    #[test]
    fn all_ones_row_shifts_with_zero_prepended() {
        let part = Partition::from_points(vec![0.2, 0.5, 0.9]).unwrap();
        let next = refine(&part, &[1.0; 4]).unwrap();
        assert_eq!(next.points(), &[0.0, 0.2, 0.5, 0.9]);
    }

    #[test]
    fn row_length_mismatch_is_reported() {
        let part = Partition::from_points(vec![0.5]).unwrap();
        assert!(matches!(
            refine(&part, &[0.5]),
            Err(Error::RowLengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn constant_half_matches_binomial_cdf_oracle() {
        let part = evolve(&constant_env(0.5, 2), 2).unwrap();
        assert_eq!(part.points(), &[0.25, 0.75]);
        for n in [1usize, 5, 17, 50] {
            let part = evolve(&constant_env(0.5, n), n).unwrap();
            for k in 1..=n {
                let oracle = binomial_cdf(n, 0.5, k as i64 - 1);
                assert!(
                    (part.points()[k - 1] - oracle).abs() <= 1e-12,
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn constant_zero_pins_points_at_one() {
        let part = evolve(&constant_env(0.0, 5), 5).unwrap();
        assert_eq!(part.points(), &[1.0; 5]);
    }

    #[test]
    fn log_and_linear_evolution_agree() {
        let env = fig1_env();
        let lp = evolve_log(&env, 2).unwrap();
        assert!((lp.logpoints()[0] - (1.0f64 / 6.0).ln()).abs() <= 1e-14);
        assert!((lp.logpoints()[1] - (5.0f64 / 9.0).ln()).abs() <= 1e-14);

        let env = constant_env(0.5, 2);
        let lp = evolve_log(&env, 2).unwrap();
        assert!((lp.logpoints()[0].exp() - 0.25).abs() <= 1e-15);
        assert!((lp.logpoints()[1].exp() - 0.75).abs() <= 1e-15);
    }

    #[test]
    fn log_domain_survives_underflow() {
        // a_{n,1} = 2^{-n} for p = 1/2: far below the linear floating range.
        let n = 2000;
        let lp = evolve_log(&constant_env(0.5, n), n).unwrap();
        let expect = -(n as f64) * std::f64::consts::LN_2;
        let got = lp.logpoints()[0];
        assert!(
            (got - expect).abs() <= 1e-9 * expect.abs(),
            "log a_(n,1) = {got}, expected {expect}"
        );
    }

    #[test]
    fn measure_of_counts_points() {
        let p2 = Partition::from_points(vec![1.0 / 6.0, 5.0 / 9.0]).unwrap();
        let half = p2.measure_of(EmpiricalQuery::closed(0.0, 0.5).unwrap()).unwrap();
        assert_eq!(half, 0.5);
        let all = p2.measure_of(EmpiricalQuery::closed(0.0, 1.0).unwrap()).unwrap();
        assert_eq!(all, 1.0);
        assert!(matches!(
            Partition::trivial().measure_of(EmpiricalQuery::closed(0.0, 1.0).unwrap()),
            Err(Error::EmptyPartition)
        ));
    }

    #[test]
    fn measure_of_between_quartiles_matches_binomial_count() {
        let n = 10;
        let part = evolve(&constant_env(0.5, n), n).unwrap();
        let got = part.measure_of(EmpiricalQuery::closed(0.25, 0.75).unwrap()).unwrap();
        let expect = (1..=n)
            .filter(|&k| {
                let c = binomial_cdf(n, 0.5, k as i64 - 1);
                (0.25..=0.75).contains(&c)
            })
            .count() as f64
            / n as f64;
        assert_eq!(got, expect);
    }

    #[test]
    fn closure_conventions_differ_exactly_at_atoms() {
        let part = Partition::from_points(vec![0.25, 0.25, 0.5]).unwrap();
        let closed = part.measure_of(EmpiricalQuery::closed(0.25, 0.5).unwrap()).unwrap();
        let half = part.measure_of(EmpiricalQuery::half_open(0.25, 0.5).unwrap()).unwrap();
        assert_eq!(closed, 1.0);
        assert_eq!(half, 2.0 / 3.0);
    }

    #[test]
    fn half_open_queries_are_additive() {
        let part = evolve(&constant_env(0.3, 40), 40).unwrap();
        let a = part.measure_of(EmpiricalQuery::half_open(0.1, 0.4).unwrap()).unwrap();
        let b = part.measure_of(EmpiricalQuery::half_open(0.4, 0.9).unwrap()).unwrap();
        let ab = part.measure_of(EmpiricalQuery::half_open(0.1, 0.9).unwrap()).unwrap();
        assert_eq!(a + b, ab);
    }

    #[test]
    fn longest_interval_includes_implicit_endpoints() {
        let p2 = Partition::from_points(vec![1.0 / 6.0, 5.0 / 9.0]).unwrap();
        assert!((p2.longest_interval() - 4.0 / 9.0).abs() <= 1e-15);
        assert_eq!(Partition::trivial().longest_interval(), 1.0);
    }

    #[test]
    fn transformed_cdf_boundaries() {
        let lp = evolve_log(&constant_env(0.5, 50), 50).unwrap();
        assert_eq!(lp.transformed_cdf(1.0), 1.0);
        assert_eq!(lp.transformed_cdf(0.0), 0.0);
    }

    #[test]
    fn transformed_cdf_counts_zero_points_at_zero() {
        let lp = evolve_log(&constant_env(1.0, 4), 4).unwrap();
        // p = 1 drives a_{n,k} = a_{n-1,k-1}; a_{n,1..} collapse to 0.
        assert!(lp.transformed_cdf(0.0) > 0.0);
    }

    #[test]
    fn rate_estimate_is_nonnegative_and_matches_kl_at_depth() {
        let n = 4000;
        let lp = evolve_log(&constant_env(0.5, n), n).unwrap();
        let kl_quarter = 0.25 * (0.5f64).ln() + 0.75 * (1.5f64).ln();
        let got = lp.rate_estimate(0.25).unwrap();
        assert!((got - kl_quarter).abs() <= 0.01, "rate {got} vs {kl_quarter}");
        let near_mean = lp.rate_estimate(0.5 - 1e-9).unwrap();
        assert!((-1e-12..=0.01).contains(&near_mean), "rate {near_mean}");
        assert!(matches!(
            lp.rate_estimate(1e-9),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn sandwich_and_sortedness_under_degenerate_rows() {
        let mut part = Partition::trivial();
        let rows: Vec<Vec<f64>> = vec![
            vec![0.0],
            vec![1.0, 0.0],
            vec![0.5, 1.0, 0.5],
            vec![1.0, 1.0, 0.0, 0.0],
        ];
        for row in rows {
            let next = refine(&part, &row).unwrap();
            for (k, &v) in next.points().iter().enumerate() {
                let left = if k == 0 { 0.0 } else { part.points()[k - 1] };
                let right = if k == next.n() - 1 { 1.0 } else { part.points()[k] };
                assert!(v >= left && v <= right);
                if k > 0 {
                    assert!(next.points()[k - 1] <= v);
                }
            }
            part = next;
        }
    }
}
