//! Numerical limit theory: normal CDF/quantile, bulk vague-convergence
//! diagnostics, and the large-deviation rate calculus.
//!
//! The endpoint limits are driven by the scaled cumulant generating function
//! of the walk steps against a probability measure H on [0,1],
//!
//! ```text
//! Λ(θ) = ∫ log(1 - t + t·e^θ) H(dt),
//! ```
//!
//! whose Fenchel–Legendre conjugate I(α) = α·θ(α) - Λ(θ(α)) is the decay rate
//! of a_{n,⌊αn⌋}^{1/n}. θ(α) is the unique root of Λ'(θ) = α, I(0) gives the
//! support edge x* = e^{-I(0)}, and the inverse α_I(x) of I is the CDF of the
//! transformed limit on (x*, 1).

use crate::error::{Error, Result};
use crate::fragmenter::{EmpiricalQuery, LogPartition, Partition};
use crate::proportions::{ProportionDistribution, SplittingRule};

/// Log-domain safe range for θ: e^θ neither overflows nor goes subnormal.
const THETA_MAX: f64 = 745.0;
const WEIGHT_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Standard normal CDF and quantile
// ---------------------------------------------------------------------------

/// Standard normal distribution function Φ, via the complementary error
/// function (absolute accuracy near machine precision on the whole line).
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// Standard normal density φ.
pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Quantile function Q = Φ⁻¹ on (0,1): rational initial guess refined by one
/// Halley step against [`normal_cdf`], giving |Φ(Q(u)) - u| at the 1e-15
/// level.
pub fn normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::DomainError { value: u, domain: "(0,1)" });
    }
    let x = quantile_rational_guess(u);
    // Halley refinement: e = Φ(x) - u, step = e√(2π)e^{x²/2}.
    let e = normal_cdf(x) - u;
    let t = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - t / (1.0 + 0.5 * x * t))
}

/// Acklam-style rational approximation to Φ⁻¹ (relative error ~1e-9).
fn quantile_rational_guess(u: f64) -> f64 {
    const A: [f64; 6] = [
        -39.696_830_286_653_77,
        220.946_098_424_520_9,
        -275.928_510_446_968_95,
        138.357_751_867_269,
        -30.664_798_066_147_16,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -54.476_098_798_224_06,
        161.585_836_858_040_9,
        -155.698_979_859_886_66,
        66.801_311_887_719_72,
        -13.280_681_552_885_72,
    ];
    const C: [f64; 6] = [
        -0.007_784_894_002_430_293,
        -0.322_396_458_041_136_4,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        0.007_784_695_709_041_462,
        0.322_467_129_070_039_8,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const U_LOW: f64 = 0.024_25;

    if u < U_LOW {
        let q = (-2.0 * u.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if u <= 1.0 - U_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - u).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

// ---------------------------------------------------------------------------
// Atomic measures
// ---------------------------------------------------------------------------

/// Discrete probability measure on [0,1] with strictly increasing atom
/// locations; the single integral representation used by Λ, Λ', and I(0).
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    /// Build from (location, weight) pairs: sorts, merges equal locations,
    /// drops zero weights, and requires total weight 1 within 1e-12.
    pub fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidWeights { reason: "no atoms".into() });
        }
        for &(t, w) in &atoms {
            if !(0.0..=1.0).contains(&t) || t.is_nan() {
                return Err(Error::InvalidProportion { n: 0, k: 0, value: t });
            }
            if w < 0.0 || w.is_nan() {
                return Err(Error::InvalidWeights {
                    reason: format!("weight {w} at {t}"),
                });
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (t, w) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == t => last.1 += w,
                _ => merged.push((t, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0.0);
        let total: f64 = merged.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidWeights {
                reason: format!("total weight {total}"),
            });
        }
        Ok(Self { atoms: merged })
    }

    /// Unit mass at a single point.
    pub fn dirac(t: f64) -> Result<Self> {
        Self::from_atoms(vec![(t, 1.0)])
    }

    /// Midpoint discretization of Uniform(0,1) with m atoms. The log(1-t)
    /// singularity at t=1 leaves an O(log m / m) bias in I(0).
    pub fn uniform_midpoint(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidWeights { reason: "zero atoms".into() });
        }
        let w = 1.0 / m as f64;
        Self::from_atoms((0..m).map(|i| ((i as f64 + 0.5) * w, w)).collect())
    }

    /// Represent a proportion law as an atomic measure; continuous laws are
    /// discretized with `uniform_atoms` midpoints.
    pub fn from_distribution(dist: &ProportionDistribution, uniform_atoms: usize) -> Result<Self> {
        dist.validate()?;
        match dist {
            ProportionDistribution::PointMass(v) => Self::dirac(*v),
            ProportionDistribution::TwoPoint { v1, v2, w1 } => {
                Self::from_atoms(vec![(*v1, *w1), (*v2, 1.0 - *w1)])
            }
            ProportionDistribution::Uniform01 => Self::uniform_midpoint(uniform_atoms),
            ProportionDistribution::Atoms(atoms) => Self::from_atoms(atoms.clone()),
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mass_at(&self, t: f64) -> f64 {
        self.atoms
            .iter()
            .find(|&&(loc, _)| loc == t)
            .map_or(0.0, |&(_, w)| w)
    }

    /// Mean p̄ = ∫ t H(dt).
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(t, w)| t * w).sum()
    }

    /// Λ(θ) = ∫ log(1 - t + t·e^θ) H(dt), in forms stable over the whole
    /// bracketing range: atoms at 0 contribute nothing, atoms at 1 contribute
    /// θ·w exactly.
    pub fn lambda(&self, theta: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(t, w)| {
                if t == 0.0 {
                    0.0
                } else if t == 1.0 {
                    w * theta
                } else if theta <= 0.0 {
                    w * (t * theta.exp_m1()).ln_1p()
                } else {
                    w * (theta + (t + (1.0 - t) * (-theta).exp()).ln())
                }
            })
            .sum()
    }

    /// Λ'(θ) = ∫ t·e^θ / (1 - t + t·e^θ) H(dt); strictly increasing in θ
    /// whenever H charges (0,1), with range (H({1}), 1 - H({0})).
    pub fn lambda_prime(&self, theta: f64) -> f64 {
        self.atoms.iter().map(|&(t, w)| w * atom_ratio(t, theta)).sum()
    }

    /// Λ''(θ) = ∫ r(1-r) H(dt) with r the integrand of Λ'.
    pub fn lambda_second(&self, theta: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(t, w)| {
                let r = atom_ratio(t, theta);
                w * r * (1.0 - r)
            })
            .sum()
    }
}

/// t·e^θ / (1 - t + t·e^θ), branch-stable for |θ| up to the bracket limits.
#[inline]
fn atom_ratio(t: f64, theta: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t == 1.0 {
        1.0
    } else if theta <= 0.0 {
        let te = t * theta.exp();
        te / (1.0 - t + te)
    } else {
        t / (t + (1.0 - t) * (-theta).exp())
    }
}

pub fn lambda(h: &AtomicMeasure, theta: f64) -> f64 {
    h.lambda(theta)
}

pub fn lambda_prime(h: &AtomicMeasure, theta: f64) -> f64 {
    h.lambda_prime(theta)
}

/// Solve Λ'(θ) = α for the unique θ: monotone bracketing on the log-safe
/// range, bisection, then a short Newton polish. The residual |Λ'(θ) - α|
/// lands at the 1e-13 level for interior α.
pub fn solve_theta(h: &AtomicMeasure, alpha: f64) -> Result<f64> {
    let lo_mass = h.mass_at(1.0);
    let hi_mass = 1.0 - h.mass_at(0.0);
    if !(alpha > lo_mass && alpha < hi_mass) {
        return Err(Error::AlphaOutOfRange { alpha, lo: lo_mass, hi: hi_mass });
    }
    let (mut lo, mut hi) = (-THETA_MAX, THETA_MAX);
    if h.lambda_prime(lo) > alpha || h.lambda_prime(hi) < alpha {
        // α attainable only beyond the numeric bracket.
        return Err(Error::AlphaOutOfRange { alpha, lo: lo_mass, hi: hi_mass });
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if h.lambda_prime(mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    let mut theta = 0.5 * (lo + hi);
    for _ in 0..3 {
        let g = h.lambda_prime(theta) - alpha;
        let d = h.lambda_second(theta);
        if d <= 0.0 {
            break;
        }
        let next = theta - g / d;
        if !next.is_finite() || next < lo - 1.0 || next > hi + 1.0 {
            break;
        }
        theta = next;
    }
    Ok(theta)
}

/// I(0) = -∫ log(1-t) H(dt) and the support edge x* = e^{-I(0)}.
/// An atom at 1 forces I(0) = ∞ and x* = 0.
pub fn rate_i0_and_xstar(h: &AtomicMeasure) -> (f64, f64) {
    if h.mass_at(1.0) > 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let i0: f64 = -h
        .atoms()
        .iter()
        .map(|&(t, w)| if t == 0.0 { 0.0 } else { w * (-t).ln_1p() })
        .sum::<f64>();
    (i0, (-i0).exp())
}

// ---------------------------------------------------------------------------
// Rate profile
// ---------------------------------------------------------------------------

/// Solved rate-function objects for a measure H: p̄, I(0), x*, the solvable
/// floor H({1}), and evaluators for θ(α), I(α), α_I(x), and the transformed
/// limit CDF.
#[derive(Debug, Clone)]
pub struct RateProfile {
    h: AtomicMeasure,
    p_bar: f64,
    i0: f64,
    x_star: f64,
    alpha_lo: f64,
    alpha_hi: f64,
    /// sup I over the solvable domain: I(alpha_lo⁺). Equals i0 when H({1})=0.
    i_sup: f64,
}

impl RateProfile {
    pub fn new(h: AtomicMeasure) -> Result<Self> {
        let edge = h.mass_at(0.0) + h.mass_at(1.0);
        if edge >= 1.0 {
            return Err(Error::InvalidWeights {
                reason: "H must charge the open interval (0,1)".into(),
            });
        }
        let p_bar = h.mean();
        let (i0, x_star) = rate_i0_and_xstar(&h);
        let alpha_lo = h.mass_at(1.0);
        let alpha_hi = 1.0 - h.mass_at(0.0);
        // I at the solvable floor: -Σ_{t<1} w log(1-t), finite even when an
        // atom at 1 pushes I(0) itself to ∞.
        let i_sup = if alpha_lo > 0.0 {
            -h.atoms()
                .iter()
                .filter(|&&(t, _)| t < 1.0)
                .map(|&(t, w)| if t == 0.0 { 0.0 } else { w * (-t).ln_1p() })
                .sum::<f64>()
        } else {
            i0
        };
        Ok(Self { h, p_bar, i0, x_star, alpha_lo, alpha_hi, i_sup })
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.h
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    pub fn x_star(&self) -> f64 {
        self.x_star
    }

    pub fn alpha_lo(&self) -> f64 {
        self.alpha_lo
    }

    pub fn alpha_hi(&self) -> f64 {
        self.alpha_hi
    }

    pub fn theta(&self, alpha: f64) -> Result<f64> {
        solve_theta(&self.h, alpha)
    }

    /// I(α) = α·θ(α) - Λ(θ(α)), the Fenchel–Legendre value at α.
    pub fn rate_i(&self, alpha: f64) -> Result<f64> {
        let theta = self.theta(alpha)?;
        Ok((alpha * theta - self.h.lambda(theta)).max(0.0))
    }

    /// I and α as functions of the dual variable θ (one Λ pass).
    fn rate_at_theta(&self, theta: f64) -> (f64, f64) {
        let alpha = self.h.lambda_prime(theta);
        (alpha * theta - self.h.lambda(theta), alpha)
    }

    /// α_I(x): the unique α with I(α) = log(1/x), for x in (x*, 1).
    ///
    /// Bisection runs on the dual variable θ ∈ [-745, 0], where
    /// I(θ) = θΛ'(θ) - Λ(θ) is monotone; α = Λ'(θ) is read off at the root.
    pub fn alpha_i(&self, x: f64) -> Result<f64> {
        if !(x > self.x_star && x < 1.0) {
            return Err(Error::XOutOfRange { x, lo: self.x_star, hi: 1.0 });
        }
        let target = (1.0 / x).ln();
        if target > self.i_sup {
            // Only reachable when H({1}) > 0 (x* = 0): I is +∞ below the
            // floor, the transformed limit has an atom at 0 instead.
            return Err(Error::XOutOfRange { x, lo: (-self.i_sup).exp(), hi: 1.0 });
        }
        let (mut lo, mut hi) = (-THETA_MAX, 0.0);
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            let (i_mid, _) = self.rate_at_theta(mid);
            if i_mid > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = 0.5 * (lo + hi);
        Ok(self.rate_at_theta(theta).1)
    }

    /// CDF of the transformed endpoint limit: 0 on [0, x*], α_I on (x*, 1),
    /// and 1 at x = 1 (the atom 1-p̄ closes the mass).
    pub fn tilde_g_cdf(&self, x: f64) -> f64 {
        if x >= 1.0 {
            return 1.0;
        }
        if x <= self.x_star || x <= 0.0 {
            return 0.0;
        }
        match self.alpha_i(x) {
            Ok(alpha) => alpha,
            // Below the solvable floor with H({1}) > 0: mass alpha_lo sits in
            // points decaying super-exponentially, an atom of tilde-g at 0.
            Err(_) => self.alpha_lo,
        }
    }
}

// ---------------------------------------------------------------------------
// Annealed (binomial) rate and bound
// ---------------------------------------------------------------------------

/// Annealed rate I_a(α) = α log(α/p̄) + (1-α) log((1-α)/(1-p̄)), with the
/// 0·log 0 = 0 convention. This is the binary KL divergence.
pub fn annealed_rate(p_bar: f64, alpha: f64) -> f64 {
    assert!(p_bar > 0.0 && p_bar < 1.0, "p_bar = {p_bar}");
    assert!((0.0..=1.0).contains(&alpha), "alpha = {alpha}");
    let left = if alpha == 0.0 { 0.0 } else { alpha * (alpha / p_bar).ln() };
    let right = if alpha == 1.0 {
        0.0
    } else {
        (1.0 - alpha) * ((1.0 - alpha) / (1.0 - p_bar)).ln()
    };
    (left + right).max(0.0)
}

/// Annealed dominance envelope F_a(x) = α_a(x)/p̄ on [1-p̄, 1], where α_a
/// inverts I_a over [0, p̄].
pub fn annealed_cdf_bound(p_bar: f64, x: f64) -> Result<f64> {
    assert!(p_bar > 0.0 && p_bar < 1.0, "p_bar = {p_bar}");
    let x_star_a = 1.0 - p_bar;
    if !(x >= x_star_a && x <= 1.0) {
        return Err(Error::XOutOfRange { x, lo: x_star_a, hi: 1.0 });
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let target = (1.0 / x).ln();
    let (mut lo, mut hi) = (0.0, p_bar);
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if annealed_rate(p_bar, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / p_bar)
}

// ---------------------------------------------------------------------------
// Bulk diagnostics
// ---------------------------------------------------------------------------

/// Centering and spread for the bulk CLT window: m_n and σ_n with
/// σ_n² = step_variance_param(rule, n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkScaling {
    pub m_n: f64,
    pub sigma_n: f64,
}

/// Regime-correct bulk scaling for a rule at time n.
pub fn make_bulk_scaling(rule: &SplittingRule, n: usize) -> Result<BulkScaling> {
    let m_n = rule.centering(n)?;
    let var = rule.step_variance_param(n)?;
    if var <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok(BulkScaling { m_n, sigma_n: var.sqrt() })
}

/// One row of the bulk vague-convergence table.
#[derive(Debug, Clone, Copy)]
pub struct BulkRow {
    pub x: f64,
    pub y: f64,
    pub scaled_mass: f64,
    pub limit: f64,
    pub abs_err: f64,
}

/// Compare n·g_n([x,y])/σ_n against the vague limit Q(y) - Q(x) on a grid of
/// interior intervals, counting with closed intervals.
pub fn bulk_deviation(
    part: &Partition,
    sc: &BulkScaling,
    grid: &[(f64, f64)],
) -> Result<Vec<BulkRow>> {
    bulk_deviation_with_convention(part, sc, grid, false)
}

/// As [`bulk_deviation`], with `half_open` switching the counting convention
/// to [x, y).
pub fn bulk_deviation_with_convention(
    part: &Partition,
    sc: &BulkScaling,
    grid: &[(f64, f64)],
    half_open: bool,
) -> Result<Vec<BulkRow>> {
    let n = part.n();
    if n == 0 {
        return Err(Error::EmptyPartition);
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &(x, y) in grid {
        if !(x > 0.0 && y < 1.0 && x <= y) {
            return Err(Error::BadGrid {
                reason: format!("interval [{x}, {y}] must sit strictly inside (0,1)"),
            });
        }
        let query = if half_open {
            EmpiricalQuery::half_open(x, y)?
        } else {
            EmpiricalQuery::closed(x, y)?
        };
        let mass = part.measure_of(query)?;
        let scaled_mass = n as f64 * mass / sc.sigma_n;
        let limit = if x == y {
            0.0
        } else {
            normal_quantile(y)? - normal_quantile(x)?
        };
        rows.push(BulkRow { x, y, scaled_mass, limit, abs_err: (scaled_mass - limit).abs() });
    }
    Ok(rows)
}

/// One row of the endpoint (transformed-measure) table.
#[derive(Debug, Clone, Copy)]
pub struct EndpointRow {
    pub x: f64,
    pub empirical: f64,
    pub limit: f64,
    pub abs_err: f64,
}

/// Compare the empirical transformed CDF against the limit CDF tilde-g on a
/// grid of points in (0,1).
pub fn endpoint_deviation(
    lp: &LogPartition,
    profile: &RateProfile,
    xs: &[f64],
) -> Result<Vec<EndpointRow>> {
    if lp.n() == 0 {
        return Err(Error::EmptyPartition);
    }
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::BadGrid { reason: format!("x = {x} outside (0,1)") });
        }
        let empirical = lp.transformed_cdf(x);
        let limit = profile.tilde_g_cdf(x);
        rows.push(EndpointRow { x, empirical, limit, abs_err: (empirical - limit).abs() });
    }
    Ok(rows)
}
