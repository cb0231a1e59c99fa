//! CSV rendering for the experiment outputs.
//!
//! Numbers print with 17 significant digits so every 64-bit float round-trips
//! losslessly; identical inputs therefore yield byte-identical files.

use crate::fragmenter::{LogPartition, Partition};
use crate::limits::{BulkRow, EndpointRow};
use crate::walk::{WalkDistribution, WalkSample};

/// Lossless decimal rendering of an f64 (17 significant digits).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Partition dump `k,a,log_a`; linear and log evolutions must describe the
/// same environment and step.
pub fn partition_csv(part: &Partition, lp: &LogPartition) -> String {
    assert_eq!(part.n(), lp.n(), "linear/log partitions out of step");
    let mut out = String::from("k,a,log_a\n");
    for (i, (&a, &la)) in part.points().iter().zip(lp.logpoints()).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, fmt17(a), fmt17(la)));
    }
    out
}

/// Walk distribution dump `k,prob,cdf`.
pub fn walk_csv(dist: &WalkDistribution) -> String {
    let mut out = String::from("k,prob,cdf\n");
    let mut cum = 0.0;
    for (k, &q) in dist.probs().iter().enumerate() {
        cum += q;
        out.push_str(&format!("{},{},{}\n", k, fmt17(q), fmt17(cum)));
    }
    out
}

/// Walk sample dump `replica,x_n`.
pub fn samples_csv(sample: &WalkSample) -> String {
    let mut out = String::from("replica,x_n\n");
    for (r, &v) in sample.values().iter().enumerate() {
        out.push_str(&format!("{r},{v}\n"));
    }
    out
}

/// Bulk table `x,y,scaled_mass,limit,abs_err`.
pub fn bulk_csv(rows: &[BulkRow]) -> String {
    let mut out = String::from("x,y,scaled_mass,limit,abs_err\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(r.x),
            fmt17(r.y),
            fmt17(r.scaled_mass),
            fmt17(r.limit),
            fmt17(r.abs_err)
        ));
    }
    out
}

/// Endpoint table `x,empirical,limit,abs_err`.
pub fn endpoint_csv(rows: &[EndpointRow]) -> String {
    let mut out = String::from("x,empirical,limit,abs_err\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(r.x),
            fmt17(r.empirical),
            fmt17(r.limit),
            fmt17(r.abs_err)
        ));
    }
    out
}

/// Empirical-only endpoint table `x,empirical,annealed_bound` for rules whose
/// exact limit is unavailable.
pub fn endpoint_empirical_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("x,empirical,annealed_bound\n");
    for &(x, emp, bound) in rows {
        out.push_str(&format!("{},{},{}\n", fmt17(x), fmt17(emp), fmt17(bound)));
    }
    out
}

/// Rate-function dump `alpha,theta,I`.
pub fn rate_csv(rows: &[(f64, f64, f64)]) -> String {
    let mut out = String::from("alpha,theta,I\n");
    for &(alpha, theta, i) in rows {
        out.push_str(&format!("{},{},{}\n", fmt17(alpha), fmt17(theta), fmt17(i)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fragmenter::{evolve, evolve_log};
    use crate::proportions::{Environment, SplittingRule};

    #[test]
    fn fmt17_round_trips() {
        for v in [0.25, 1.0 / 3.0, 5.0 / 9.0, 1e-300, 0.1 + 0.2] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn partition_csv_layout() {
        let env = Environment::new(SplittingRule::Constant(0.5), 2, 0).unwrap();
        let part = evolve(&env, 2).unwrap();
        let lp = evolve_log(&env, 2).unwrap();
        let csv = partition_csv(&part, &lp);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,a,log_a");
        assert!(lines[1].starts_with("1,2.5"));
        assert!(lines[2].starts_with("2,7.5"));
        assert_eq!(lines.len(), 3);
    }
}
