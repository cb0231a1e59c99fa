//! Splitting-proportion families and their realization as environments.
//!
//! A splitting rule describes how the proportions p_{n,k} are produced; an
//! [`Environment`] is one realization, fully determined by (rule, seed,
//! n_max). Random rules draw through the counter streams in [`crate::rng`],
//! so p_{n,k} is a pure function of (seed, n, k) and two realizations with
//! equal inputs agree bit for bit.

use crate::error::{Error, Result};
use crate::limits::AtomicMeasure;
use crate::rng;

const WEIGHT_TOL: f64 = 1e-12;

/// Law of a single random proportion on [0,1].
#[derive(Debug, Clone, PartialEq)]
pub enum ProportionDistribution {
    /// Degenerate law at `v`.
    PointMass(f64),
    /// Two atoms: `v1` with weight `w1`, `v2` with weight `1 - w1`.
    TwoPoint { v1: f64, v2: f64, w1: f64 },
    /// Continuous uniform on the open interval (0,1). Sampling never returns
    /// an exact endpoint, so E|log P|^p < ∞ holds pathwise.
    Uniform01,
    /// General finite law: atoms (t_i, w_i) with Σ w_i = 1.
    Atoms(Vec<(f64, f64)>),
}

impl ProportionDistribution {
    pub fn validate(&self) -> Result<()> {
        let check_loc = |v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidProportion { n: 0, k: 0, value: v });
            }
            Ok(())
        };
        match self {
            Self::PointMass(v) => check_loc(*v),
            Self::TwoPoint { v1, v2, w1 } => {
                check_loc(*v1)?;
                check_loc(*v2)?;
                if !(0.0..=1.0).contains(w1) {
                    return Err(Error::InvalidWeights {
                        reason: format!("two-point weight {w1} outside [0,1]"),
                    });
                }
                Ok(())
            }
            Self::Uniform01 => Ok(()),
            Self::Atoms(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidWeights { reason: "no atoms".into() });
                }
                let mut total = 0.0;
                for &(t, w) in atoms {
                    check_loc(t)?;
                    if w < 0.0 {
                        return Err(Error::InvalidWeights {
                            reason: format!("negative weight {w} at {t}"),
                        });
                    }
                    total += w;
                }
                if (total - 1.0).abs() > WEIGHT_TOL {
                    return Err(Error::InvalidWeights {
                        reason: format!("weights sum to {total}, expected 1"),
                    });
                }
                Ok(())
            }
        }
    }

    /// Exact mean E(P).
    pub fn mean(&self) -> f64 {
        match self {
            Self::PointMass(v) => *v,
            Self::TwoPoint { v1, v2, w1 } => w1 * v1 + (1.0 - w1) * v2,
            Self::Uniform01 => 0.5,
            Self::Atoms(atoms) => atoms.iter().map(|&(t, w)| t * w).sum(),
        }
    }

    /// Exact E(P(1-P)), the per-step variance contribution.
    pub fn mean_p_one_minus_p(&self) -> f64 {
        match self {
            Self::PointMass(v) => v * (1.0 - v),
            Self::TwoPoint { v1, v2, w1 } => {
                w1 * v1 * (1.0 - v1) + (1.0 - w1) * v2 * (1.0 - v2)
            }
            Self::Uniform01 => 1.0 / 6.0,
            Self::Atoms(atoms) => atoms.iter().map(|&(t, w)| w * t * (1.0 - t)).sum(),
        }
    }

    /// Generalized inverse CDF, used to map counter uniforms to proportions.
    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u < 1.0);
        match self {
            Self::PointMass(v) => *v,
            Self::TwoPoint { v1, v2, w1 } => {
                if u <= *w1 {
                    *v1
                } else {
                    *v2
                }
            }
            Self::Uniform01 => u,
            Self::Atoms(atoms) => {
                let mut cum = 0.0;
                for &(t, w) in atoms {
                    cum += w;
                    if u <= cum {
                        return t;
                    }
                }
                atoms[atoms.len() - 1].0
            }
        }
    }
}

/// Exact mean of a proportion law.
pub fn mean_proportion(dist: &ProportionDistribution) -> f64 {
    dist.mean()
}

/// How the triangular family p_{n,k} (1 ≤ k ≤ n) is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum SplittingRule {
    /// p_{n,k} = p for all n, k.
    Constant(f64),
    /// Stratified deterministic sequence: p_{n,k} = seq[n-1].
    DeterministicSequence(Vec<f64>),
    /// Stratified i.i.d. draws: P_{n,k} = P_n ~ dist.
    RandomStratified(ProportionDistribution),
    /// i.i.d. draws over the whole triangle: P_{n,k} ~ dist.
    FullyRandom(ProportionDistribution),
    /// Explicit triangular table, rows 1..=n_rows; row n holds p_{n,1..n}.
    ExplicitTable(Vec<Vec<f64>>),
}

impl SplittingRule {
    pub fn validate(&self) -> Result<()> {
        let check = |n: usize, k: usize, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::InvalidProportion { n, k, value: v });
            }
            Ok(())
        };
        match self {
            Self::Constant(p) => check(1, 1, *p),
            Self::DeterministicSequence(seq) => {
                for (i, &p) in seq.iter().enumerate() {
                    check(i + 1, 1, p)?;
                }
                Ok(())
            }
            Self::RandomStratified(d) | Self::FullyRandom(d) => d.validate(),
            Self::ExplicitTable(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != i + 1 {
                        return Err(Error::RowLengthMismatch { expected: i + 1, got: row.len() });
                    }
                    for (j, &p) in row.iter().enumerate() {
                        check(i + 1, j + 1, p)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// Whether proportions are k-independent at every step.
    pub fn is_stratified(&self) -> bool {
        match self {
            Self::Constant(_) | Self::DeterministicSequence(_) | Self::RandomStratified(_) => true,
            Self::FullyRandom(_) => false,
            Self::ExplicitTable(rows) => rows
                .iter()
                .all(|row| row.iter().all(|&p| p.to_bits() == row[0].to_bits())),
        }
    }

    /// σ_n² for the auxiliary walk at time n: Σ p_m(1-p_m) for deterministic
    /// stratified rules, n·E(P(1-P)) for random stratified, n·p̄(1-p̄) for
    /// fully random.
    pub fn step_variance_param(&self, n: usize) -> Result<f64> {
        match self {
            Self::Constant(p) => Ok(n as f64 * p * (1.0 - p)),
            Self::DeterministicSequence(seq) => {
                if seq.len() < n {
                    return Err(Error::TableTooSmall { have: seq.len(), need: n });
                }
                Ok(seq[..n].iter().map(|&p| p * (1.0 - p)).sum())
            }
            Self::RandomStratified(d) => Ok(n as f64 * d.mean_p_one_minus_p()),
            Self::FullyRandom(d) => {
                let pbar = d.mean();
                Ok(n as f64 * pbar * (1.0 - pbar))
            }
            Self::ExplicitTable(rows) => {
                if !self.is_stratified() {
                    return Err(Error::UnsupportedRule {
                        reason: "step variance needs a stratified rule".into(),
                    });
                }
                if rows.len() < n {
                    return Err(Error::TableTooSmall { have: rows.len(), need: n });
                }
                Ok(rows[..n].iter().map(|row| row[0] * (1.0 - row[0])).sum())
            }
        }
    }

    /// Walk centering m_n: Σ p_m for deterministic rules, n·p̄ for random ones.
    pub fn centering(&self, n: usize) -> Result<f64> {
        match self {
            Self::Constant(p) => Ok(n as f64 * p),
            Self::DeterministicSequence(seq) => {
                if seq.len() < n {
                    return Err(Error::TableTooSmall { have: seq.len(), need: n });
                }
                Ok(seq[..n].iter().sum())
            }
            Self::RandomStratified(d) | Self::FullyRandom(d) => Ok(n as f64 * d.mean()),
            Self::ExplicitTable(rows) => {
                if !self.is_stratified() {
                    return Err(Error::UnsupportedRule {
                        reason: "centering needs a stratified rule".into(),
                    });
                }
                if rows.len() < n {
                    return Err(Error::TableTooSmall { have: rows.len(), need: n });
                }
                Ok(rows[..n].iter().map(|row| row[0]).sum())
            }
        }
    }
}

/// One realized family of splitting proportions, 1 ≤ k ≤ n ≤ n_max.
///
/// Immutable after construction; p_{n,k} for random rules is a pure function
/// of (seed, n, k), so reads are safe to share and independent of evaluation
/// order. Deterministic rules ignore the seed.
#[derive(Debug, Clone)]
pub struct Environment {
    rule: SplittingRule,
    n_max: usize,
    seed: u64,
}

/// Realize an environment from a rule. Fails fast on invalid proportions or
/// tables too small for `n_max`.
pub fn realize_environment(rule: SplittingRule, n_max: usize, seed: u64) -> Result<Environment> {
    Environment::new(rule, n_max, seed)
}

impl Environment {
    pub fn new(rule: SplittingRule, n_max: usize, seed: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::DomainError { value: 0.0, domain: "n_max ≥ 1" });
        }
        rule.validate()?;
        match &rule {
            SplittingRule::DeterministicSequence(seq) if seq.len() < n_max => {
                return Err(Error::TableTooSmall { have: seq.len(), need: n_max });
            }
            SplittingRule::ExplicitTable(rows) if rows.len() < n_max => {
                return Err(Error::TableTooSmall { have: rows.len(), need: n_max });
            }
            _ => {}
        }
        Ok(Self { rule, n_max, seed })
    }

    pub fn rule(&self) -> &SplittingRule {
        &self.rule
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// p_{n,k} with 1 ≤ k ≤ n ≤ n_max.
    pub fn proportion(&self, n: usize, k: usize) -> f64 {
        assert!(n >= 1 && n <= self.n_max && k >= 1 && k <= n, "(n,k)=({n},{k})");
        match &self.rule {
            SplittingRule::Constant(p) => *p,
            SplittingRule::DeterministicSequence(seq) => seq[n - 1],
            SplittingRule::RandomStratified(d) => {
                d.quantile(rng::unit_open(self.seed, rng::STREAM_ENV, n as u64, 0))
            }
            SplittingRule::FullyRandom(d) => {
                d.quantile(rng::unit_open(self.seed, rng::STREAM_ENV, n as u64, k as u64))
            }
            SplittingRule::ExplicitTable(rows) => rows[n - 1][k - 1],
        }
    }

    /// Fill `row` with p_{n,1..n}; `row` is resized to length n. Equivalent
    /// to n accessor calls but hashes the row coordinate once.
    pub fn fill_row(&self, n: usize, row: &mut Vec<f64>) {
        assert!(n >= 1 && n <= self.n_max);
        row.clear();
        match &self.rule {
            SplittingRule::Constant(p) => row.resize(n, *p),
            SplittingRule::DeterministicSequence(seq) => row.resize(n, seq[n - 1]),
            SplittingRule::RandomStratified(d) => {
                let p = d.quantile(rng::unit_open(self.seed, rng::STREAM_ENV, n as u64, 0));
                row.resize(n, p);
            }
            SplittingRule::FullyRandom(d) => {
                let state = rng::row_state(self.seed, rng::STREAM_ENV, n as u64);
                row.extend((1..=n).map(|k| d.quantile(rng::row_unit(state, k as u64))));
            }
            SplittingRule::ExplicitTable(rows) => row.extend_from_slice(&rows[n - 1]),
        }
    }

    /// Empirical measure (1/n) Σ_{m≤n} δ_{p_m} of a stratified rule's first n
    /// proportions, atoms merged at equal locations.
    pub fn empirical_proportion_measure(&self, n: usize) -> Result<AtomicMeasure> {
        if !self.rule.is_stratified() {
            return Err(Error::NotStratified);
        }
        if n == 0 || n > self.n_max {
            return Err(Error::IndexOutOfRange { index: n, n: self.n_max });
        }
        let w = 1.0 / n as f64;
        let atoms: Vec<(f64, f64)> = (1..=n).map(|m| (self.proportion(m, 1), w)).collect();
        AtomicMeasure::from_atoms(atoms)
    }
}
