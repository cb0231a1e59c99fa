//! Text mini-grammar for rules and proportion laws.
//!
//! ```text
//! const:p=0.5
//! seq:file=PATH                        one proportion per line
//! strat:dist=uniform
//! strat:dist=twopoint,v=0.2;0.8,w=0.5
//! full:dist=uniform
//! table:file=PATH                      CSV rows n,k,p
//! ```
//!
//! Distribution specs (after `dist=`): `uniform`, `point,v=0.5`,
//! `twopoint,v=A;B,w=W1`, `atoms,t=T1;T2;…,w=W1;W2;…`.

use crate::error::{Error, Result};
use crate::proportions::{ProportionDistribution, SplittingRule};
use std::path::Path;

fn parse_err(reason: impl Into<String>) -> Error {
    Error::Parse(reason.into())
}

/// Parse a rule spec; `seq:` and `table:` specs read their files here.
pub fn parse_rule_spec(spec: &str) -> Result<SplittingRule> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| parse_err(format!("rule `{spec}` missing `kind:` prefix")))?;
    match kind {
        "const" => {
            let p = parse_kv(rest, "p")?;
            Ok(SplittingRule::Constant(parse_f64(p)?))
        }
        "seq" => {
            let path = parse_kv(rest, "file")?;
            Ok(SplittingRule::DeterministicSequence(read_sequence_file(
                Path::new(path),
            )?))
        }
        "strat" => Ok(SplittingRule::RandomStratified(parse_dist_spec(strip_dist(rest)?)?)),
        "full" => Ok(SplittingRule::FullyRandom(parse_dist_spec(strip_dist(rest)?)?)),
        "table" => {
            let path = parse_kv(rest, "file")?;
            Ok(SplittingRule::ExplicitTable(read_table_file(Path::new(path))?))
        }
        other => Err(parse_err(format!("unknown rule kind `{other}`"))),
    }
}

fn strip_dist(rest: &str) -> Result<&str> {
    rest.strip_prefix("dist=")
        .ok_or_else(|| parse_err(format!("expected `dist=…`, got `{rest}`")))
}

/// Parse a distribution spec such as `uniform` or `twopoint,v=0.2;0.8,w=0.5`.
pub fn parse_dist_spec(spec: &str) -> Result<ProportionDistribution> {
    let mut parts = spec.split(',');
    let name = parts.next().unwrap_or_default();
    let mut v: Option<&str> = None;
    let mut w: Option<&str> = None;
    let mut t: Option<&str> = None;
    for part in parts {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, got `{part}`")))?;
        match key {
            "v" => v = Some(value),
            "w" => w = Some(value),
            "t" => t = Some(value),
            other => return Err(parse_err(format!("unknown distribution key `{other}`"))),
        }
    }
    let dist = match name {
        "uniform" => ProportionDistribution::Uniform01,
        "point" => {
            let v = v.ok_or_else(|| parse_err("point needs v="))?;
            ProportionDistribution::PointMass(parse_f64(v)?)
        }
        "twopoint" => {
            let vs = parse_list(v.ok_or_else(|| parse_err("twopoint needs v=A;B"))?)?;
            if vs.len() != 2 {
                return Err(parse_err("twopoint needs exactly two values"));
            }
            let w1 = parse_f64(w.ok_or_else(|| parse_err("twopoint needs w="))?)?;
            ProportionDistribution::TwoPoint { v1: vs[0], v2: vs[1], w1 }
        }
        "atoms" => {
            let ts = parse_list(t.ok_or_else(|| parse_err("atoms needs t=…"))?)?;
            let ws = parse_list(w.ok_or_else(|| parse_err("atoms needs w=…"))?)?;
            if ts.len() != ws.len() {
                return Err(parse_err("atoms: t and w lists differ in length"));
            }
            ProportionDistribution::Atoms(ts.into_iter().zip(ws).collect())
        }
        other => return Err(parse_err(format!("unknown distribution `{other}`"))),
    };
    dist.validate()?;
    Ok(dist)
}

fn parse_kv<'a>(rest: &'a str, key: &str) -> Result<&'a str> {
    let (k, v) = rest
        .split_once('=')
        .ok_or_else(|| parse_err(format!("expected {key}=…, got `{rest}`")))?;
    if k != key {
        return Err(parse_err(format!("expected key `{key}`, got `{k}`")));
    }
    Ok(v)
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| parse_err(format!("`{s}` is not a number")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(';').map(parse_f64).collect()
}

/// One proportion per line; blank lines and `#` comments skipped.
pub fn read_sequence_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    parse_sequence_text(&text)
}

pub fn parse_sequence_text(text: &str) -> Result<Vec<f64>> {
    let mut seq = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        seq.push(parse_f64(line)?);
    }
    if seq.is_empty() {
        return Err(parse_err("sequence file holds no proportions"));
    }
    Ok(seq)
}

/// CSV rows `n,k,p` (header optional); every (n,k) with k ≤ n ≤ max-n must be
/// present exactly once.
pub fn read_table_file(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    parse_table_text(&text)
}

pub fn parse_table_text(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(format!("line {}: expected n,k,p", lineno + 1)));
        }
        if lineno == 0 && fields[0].parse::<usize>().is_err() {
            continue; // header
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(format!("line {}: bad n", lineno + 1)))?;
        let k: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(format!("line {}: bad k", lineno + 1)))?;
        let p = parse_f64(fields[2])?;
        if n == 0 || k == 0 || k > n {
            return Err(parse_err(format!("line {}: (n,k)=({n},{k}) outside triangle", lineno + 1)));
        }
        entries.push((n, k, p));
    }
    let n_max = entries.iter().map(|&(n, _, _)| n).max().ok_or_else(|| parse_err("empty table"))?;
    let mut rows: Vec<Vec<f64>> = (1..=n_max).map(|n| vec![f64::NAN; n]).collect();
    for (n, k, p) in entries {
        if !rows[n - 1][k - 1].is_nan() {
            return Err(parse_err(format!("duplicate entry (n,k)=({n},{k})")));
        }
        rows[n - 1][k - 1] = p;
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p.is_nan() {
                return Err(parse_err(format!("table missing entry (n,k)=({},{})", i + 1, j + 1)));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn const_rule() {
        match parse_rule_spec("const:p=0.5").unwrap() {
            SplittingRule::Constant(p) => assert_eq!(p, 0.5),
            other => panic!("{other:?}"),
        }
        assert!(parse_rule_spec("const:q=0.5").is_err());
        assert!(parse_rule_spec("const").is_err());
    }

    #[test]
    fn dist_specs() {
        assert_eq!(parse_dist_spec("uniform").unwrap(), ProportionDistribution::Uniform01);
        assert_eq!(
            parse_dist_spec("twopoint,v=0.2;0.8,w=0.5").unwrap(),
            ProportionDistribution::TwoPoint { v1: 0.2, v2: 0.8, w1: 0.5 }
        );
        assert_eq!(
            parse_dist_spec("point,v=0.3").unwrap(),
            ProportionDistribution::PointMass(0.3)
        );
        assert_eq!(
            parse_dist_spec("atoms,t=0.2;0.8,w=0.25;0.75").unwrap(),
            ProportionDistribution::Atoms(vec![(0.2, 0.25), (0.8, 0.75)])
        );
        assert!(parse_dist_spec("beta,a=1").is_err());
        assert!(parse_dist_spec("atoms,t=0.2,w=0.5;0.5").is_err());
    }

    #[test]
    fn strat_and_full() {
        assert!(matches!(
            parse_rule_spec("strat:dist=uniform").unwrap(),
            SplittingRule::RandomStratified(ProportionDistribution::Uniform01)
        ));
        assert!(matches!(
            parse_rule_spec("full:dist=uniform").unwrap(),
            SplittingRule::FullyRandom(ProportionDistribution::Uniform01)
        ));
    }

    #[test]
    fn sequence_text() {
        let seq = parse_sequence_text("0.3\n# comment\n\n0.7\n0.5\n").unwrap();
        assert_eq!(seq, vec![0.3, 0.7, 0.5]);
        assert!(parse_sequence_text("\n# nothing\n").is_err());
    }

    #[test]
    fn table_text_with_header() {
        let table = parse_table_text("n,k,p\n1,1,0.6666666666666666\n2,1,0.5\n2,2,0.6666666666666666\n").unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table[0], vec![0.6666666666666666]);
        assert_eq!(table[1], vec![0.5, 0.6666666666666666]);
    }

    #[test]
    fn table_text_rejects_holes_and_duplicates() {
        assert!(parse_table_text("1,1,0.5\n2,2,0.5\n").is_err());
        assert!(parse_table_text("1,1,0.5\n1,1,0.6\n").is_err());
        assert!(parse_table_text("1,2,0.5\n").is_err());
    }
}
