//! The `frag` experiment driver for the fragmentation-with-erasure toolkit.
//!
//! Every subcommand is a reproducible pipeline: the same (command, flags,
//! seed) yields byte-identical CSV, and each output file gets a JSON metadata
//! sidecar sufficient to reproduce it.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid input.

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use frag_core::fragmenter::{evolve, evolve_log};
use frag_core::limits::{
    annealed_cdf_bound, bulk_deviation_with_convention, endpoint_deviation, make_bulk_scaling,
    AtomicMeasure, RateProfile,
};
use frag_core::proportions::{Environment, SplittingRule};
use frag_core::report;
use frag_core::rulespec::parse_rule_spec;
use frag_core::verify::{run_battery, VerifyConfig};
use frag_core::walk::{simulate_walk, walk_distribution};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "frag", version, about = "fragmentation-with-erasure simulator and limit diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Rule spec: const:p=0.5 | seq:file=PATH | strat:dist=uniform |
    /// strat:dist=twopoint,v=0.2;0.8,w=0.5 | full:dist=uniform | table:file=PATH
    #[arg(long, global = true)]
    rule: Option<String>,

    /// Number of fragmentation steps.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Seed for random rules and simulations (deterministic rules ignore it).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo replica count (walk sampling).
    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// Output CSV path; stdout when omitted. Files get a .meta.json sidecar.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// JSON config file mirroring these flags; explicit flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Atom count for discretizing continuous proportion laws.
    #[arg(long, global = true)]
    atoms: Option<usize>,

    /// Count interval masses with closed intervals [x,y] (default).
    #[arg(long, global = true, conflicts_with = "half_open")]
    closed: bool,

    /// Count interval masses with half-open intervals [x,y).
    #[arg(long, global = true)]
    half_open: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve the partition and dump break points (k,a,log_a).
    Fragment,
    /// Bulk CLT diagnostics: n·g_n([x,y])/σ_n against Q(y)-Q(x).
    Bulk {
        /// Interval grid `x1:y1,x2:y2,…` strictly inside (0,1).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Endpoint diagnostics: transformed CDF against the tilde-g limit.
    Endpoint {
        /// Evaluation points `0.55,0.6,…` or a range `lo:hi:step`.
        #[arg(long)]
        xs: Option<String>,
        /// Require the exact limit column (errors for fully random rules).
        #[arg(long)]
        exact: bool,
    },
    /// Rate-function dump alpha,theta,I with p̄, I(0), x* metadata.
    Rate {
        /// Alpha grid `a1,a2,…` or `lo:hi:step`; defaults to 50 points
        /// spanning the solvable domain.
        #[arg(long)]
        alphas: Option<String>,
        /// Skip out-of-range grid entries instead of failing.
        #[arg(long)]
        skip_out_of_range: bool,
    },
    /// Walk distribution (k,prob,cdf), or terminal samples with --replicas.
    Walk,
    /// Run the oracle battery; exit 0 iff every check passes.
    Verify {
        /// Inject a bias into oracle comparisons (harness self-test).
        #[arg(long)]
        perturb: Option<f64>,
        /// Upper bound for path-enumeration checks (hard cap 20).
        #[arg(long)]
        max_enum_n: Option<usize>,
    },
}

/// JSON config: mirrors the global flags 1:1; flag values win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    rule: Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    replicas: Option<usize>,
    out: Option<PathBuf>,
    atoms: Option<usize>,
    half_open: Option<bool>,
    grid: Option<String>,
    xs: Option<String>,
    alphas: Option<String>,
    exact: Option<bool>,
    skip_out_of_range: Option<bool>,
    perturb: Option<f64>,
    max_enum_n: Option<usize>,
}

/// Fully resolved run configuration, echoed into the metadata sidecar.
#[derive(Debug)]
struct Resolved {
    rule: Option<String>,
    n: Option<usize>,
    seed: u64,
    replicas: usize,
    out: Option<PathBuf>,
    atoms: usize,
    half_open: bool,
    grid: Option<String>,
    xs: Option<String>,
    alphas: Option<String>,
    exact: bool,
    skip_out_of_range: bool,
    perturb: f64,
    max_enum_n: usize,
}

#[derive(Debug, Serialize)]
struct Metadata<'a> {
    command: &'a str,
    version: &'a str,
    rule: Option<&'a str>,
    n: Option<usize>,
    seed: u64,
    replicas: Option<usize>,
    atoms: usize,
    convention: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xs: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_bar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_star: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    skipped_alphas: Vec<f64>,
    rows: usize,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn resolve(cli: &Cli) -> anyhow::Result<Resolved> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    let (grid, xs, alphas, exact, skip, perturb, max_enum_n) = match &cli.command {
        Command::Bulk { grid } => (grid.clone(), None, None, false, false, None, None),
        Command::Endpoint { xs, exact } => (None, xs.clone(), None, *exact, false, None, None),
        Command::Rate { alphas, skip_out_of_range } => {
            (None, None, alphas.clone(), false, *skip_out_of_range, None, None)
        }
        Command::Verify { perturb, max_enum_n } => {
            (None, None, None, false, false, *perturb, *max_enum_n)
        }
        _ => (None, None, None, false, false, None, None),
    };
    Ok(Resolved {
        rule: cli.rule.clone().or(file.rule),
        n: cli.n.or(file.n),
        seed: cli.seed.or(file.seed).unwrap_or(0),
        replicas: cli.replicas.or(file.replicas).unwrap_or(0),
        out: cli.out.clone().or(file.out),
        atoms: cli.atoms.or(file.atoms).unwrap_or(4096),
        half_open: if cli.half_open {
            true
        } else if cli.closed {
            false
        } else {
            file.half_open.unwrap_or(false)
        },
        grid: grid.or(file.grid),
        xs: xs.or(file.xs),
        alphas: alphas.or(file.alphas),
        exact: exact || file.exact.unwrap_or(false),
        skip_out_of_range: skip || file.skip_out_of_range.unwrap_or(false),
        perturb: perturb.or(file.perturb).unwrap_or(0.0),
        max_enum_n: max_enum_n.or(file.max_enum_n).unwrap_or(12),
    })
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    let cfg = resolve(&cli)?;
    match &cli.command {
        Command::Fragment => cmd_fragment(&cfg),
        Command::Bulk { .. } => cmd_bulk(&cfg),
        Command::Endpoint { .. } => cmd_endpoint(&cfg),
        Command::Rate { .. } => cmd_rate(&cfg),
        Command::Walk => cmd_walk(&cfg),
        Command::Verify { .. } => cmd_verify(&cfg),
    }
}

fn require_rule(cfg: &Resolved) -> anyhow::Result<SplittingRule> {
    let spec = cfg.rule.as_deref().ok_or_else(|| anyhow!("--rule is required"))?;
    Ok(parse_rule_spec(spec)?)
}

fn require_n(cfg: &Resolved) -> anyhow::Result<usize> {
    match cfg.n {
        Some(n) if n >= 1 => Ok(n),
        Some(_) => bail!("n must be ≥ 1"),
        None => bail!("--n is required"),
    }
}

fn convention(cfg: &Resolved) -> &'static str {
    if cfg.half_open {
        "half-open"
    } else {
        "closed"
    }
}

/// Write CSV to `out` (plus sidecar) or to stdout.
fn emit(cfg: &Resolved, csv: &str, meta: &Metadata) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            let sidecar = sidecar_path(path);
            let json = serde_json::to_string_pretty(meta)?;
            std::fs::write(&sidecar, json)
                .with_context(|| format!("writing {}", sidecar.display()))?;
            eprintln!("wrote {} ({} rows) + {}", path.display(), meta.rows, sidecar.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn base_meta<'a>(cfg: &'a Resolved, command: &'a str, rows: usize) -> Metadata<'a> {
    Metadata {
        command,
        version: env!("CARGO_PKG_VERSION"),
        rule: cfg.rule.as_deref(),
        n: cfg.n,
        seed: cfg.seed,
        replicas: if cfg.replicas > 0 { Some(cfg.replicas) } else { None },
        atoms: cfg.atoms,
        convention: convention(cfg),
        grid: cfg.grid.as_deref(),
        xs: cfg.xs.as_deref(),
        alphas: cfg.alphas.as_deref(),
        p_bar: None,
        i0: None,
        x_star: None,
        skipped_alphas: Vec::new(),
        rows,
    }
}

fn cmd_fragment(cfg: &Resolved) -> anyhow::Result<i32> {
    let rule = require_rule(cfg)?;
    let n = require_n(cfg)?;
    let env = Environment::new(rule, n, cfg.seed)?;
    let part = evolve(&env, n)?;
    let lp = evolve_log(&env, n)?;
    let csv = report::partition_csv(&part, &lp);
    emit(cfg, &csv, &base_meta(cfg, "fragment", n))?;
    Ok(0)
}

fn cmd_walk(cfg: &Resolved) -> anyhow::Result<i32> {
    let rule = require_rule(cfg)?;
    let n = require_n(cfg)?;
    let env = Environment::new(rule, n, cfg.seed)?;
    let csv = if cfg.replicas > 0 {
        let sample = simulate_walk(&env, n, cfg.replicas, cfg.seed)?;
        report::samples_csv(&sample)
    } else {
        let dist = walk_distribution(&env, n)?;
        report::walk_csv(&dist)
    };
    let rows = if cfg.replicas > 0 { cfg.replicas } else { n + 1 };
    emit(cfg, &csv, &base_meta(cfg, "walk", rows))?;
    Ok(0)
}

fn cmd_bulk(cfg: &Resolved) -> anyhow::Result<i32> {
    let rule = require_rule(cfg)?;
    let n = require_n(cfg)?;
    let grid_spec = cfg.grid.clone().unwrap_or_else(|| "0.25:0.75".to_string());
    let grid = parse_pair_grid(&grid_spec)?;
    let scaling = make_bulk_scaling(&rule, n)?;
    let env = Environment::new(rule, n, cfg.seed)?;
    let part = evolve(&env, n)?;
    let rows = bulk_deviation_with_convention(&part, &scaling, &grid, cfg.half_open)?;
    let csv = report::bulk_csv(&rows);
    let mut meta = base_meta(cfg, "bulk", rows.len());
    meta.grid = Some(&grid_spec);
    emit(cfg, &csv, &meta)?;
    Ok(0)
}

/// Limit measure H for a rule, when one is tractable: the proportion law for
/// stratified rules, the empirical measure of the realized sequence for
/// deterministic ones, none for fully random.
fn tractable_h(
    rule: &SplittingRule,
    env: &Environment,
    n: usize,
    atoms: usize,
) -> anyhow::Result<Option<AtomicMeasure>> {
    let h = match rule {
        SplittingRule::Constant(p) => Some(AtomicMeasure::dirac(*p)?),
        SplittingRule::RandomStratified(d) => Some(AtomicMeasure::from_distribution(d, atoms)?),
        SplittingRule::DeterministicSequence(_) | SplittingRule::ExplicitTable(_) => {
            Some(env.empirical_proportion_measure(n)?)
        }
        SplittingRule::FullyRandom(_) => None,
    };
    Ok(h)
}

fn cmd_endpoint(cfg: &Resolved) -> anyhow::Result<i32> {
    let rule = require_rule(cfg)?;
    let n = require_n(cfg)?;
    let xs_spec = cfg.xs.clone().unwrap_or_else(|| "0.55:0.95:0.05".to_string());
    let xs = parse_x_grid(&xs_spec)?;
    let env = Environment::new(rule.clone(), n, cfg.seed)?;
    let lp = evolve_log(&env, n)?;
    let h = tractable_h(&rule, &env, n, cfg.atoms)?;

    let (csv, p_bar, i0, x_star, rows_len) = match h {
        Some(h) => {
            let profile = RateProfile::new(h)?;
            let rows = endpoint_deviation(&lp, &profile, &xs)?;
            (
                report::endpoint_csv(&rows),
                profile.p_bar(),
                profile.i0(),
                profile.x_star(),
                rows.len(),
            )
        }
        None => {
            if cfg.exact {
                bail!(
                    "exact endpoint limit is unavailable for fully random rules; \
                     rerun without --exact for the empirical + annealed-bound table"
                );
            }
            let p_bar = match &rule {
                SplittingRule::FullyRandom(d) => d.mean(),
                _ => unreachable!("tractable_h is None only for fully random rules"),
            };
            let mut rows = Vec::with_capacity(xs.len());
            for &x in &xs {
                if !(x > 0.0 && x < 1.0) {
                    bail!("x = {x} outside (0,1)");
                }
                let bound =
                    if x >= 1.0 - p_bar { annealed_cdf_bound(p_bar, x)? } else { 0.0 };
                rows.push((x, lp.transformed_cdf(x), bound));
            }
            (report::endpoint_empirical_csv(&rows), p_bar, f64::NAN, f64::NAN, rows.len())
        }
    };
    let mut meta = base_meta(cfg, "endpoint", rows_len);
    meta.xs = Some(&xs_spec);
    meta.p_bar = Some(p_bar);
    if i0.is_finite() {
        meta.i0 = Some(i0);
    }
    if x_star.is_finite() {
        meta.x_star = Some(x_star);
    }
    emit(cfg, &csv, &meta)?;
    Ok(0)
}

fn cmd_rate(cfg: &Resolved) -> anyhow::Result<i32> {
    let rule = require_rule(cfg)?;
    if matches!(rule, SplittingRule::FullyRandom(_)) {
        bail!(
            "the quenched rate function of a fully random rule has no computable \
             closed form; use a stratified rule, or `endpoint` for the annealed bound"
        );
    }
    // Sequence/table rules realize their empirical measure over n steps.
    let n = match cfg.n {
        Some(n) if n >= 1 => n,
        Some(_) => bail!("n must be ≥ 1"),
        None => 1000,
    };
    let horizon = match &rule {
        SplittingRule::DeterministicSequence(seq) => n.min(seq.len()),
        SplittingRule::ExplicitTable(rows) => n.min(rows.len()),
        _ => n,
    };
    let env = Environment::new(rule.clone(), horizon, cfg.seed)?;
    let h = tractable_h(&rule, &env, horizon, cfg.atoms)?
        .expect("stratified and tabular rules always yield a measure");
    let profile = RateProfile::new(h)?;

    let alphas = match &cfg.alphas {
        Some(spec) => parse_x_grid(spec)?,
        None => {
            let lo = profile.alpha_lo();
            let span = profile.p_bar() - lo;
            (0..50).map(|i| lo + span * (i as f64 + 0.5) / 50.0).collect()
        }
    };
    let mut rows = Vec::with_capacity(alphas.len());
    let mut skipped = Vec::new();
    for &alpha in &alphas {
        match profile.theta(alpha) {
            Ok(theta) => {
                let i = profile.rate_i(alpha)?;
                rows.push((alpha, theta, i));
            }
            Err(_) if cfg.skip_out_of_range => skipped.push(alpha),
            Err(e) => return Err(e.into()),
        }
    }
    let csv = report::rate_csv(&rows);
    let alphas_echo = cfg.alphas.clone().unwrap_or_else(|| "auto:50".to_string());
    let mut meta = base_meta(cfg, "rate", rows.len());
    meta.alphas = Some(&alphas_echo);
    meta.p_bar = Some(profile.p_bar());
    meta.i0 = profile.i0().is_finite().then(|| profile.i0());
    meta.x_star = Some(profile.x_star());
    meta.skipped_alphas = skipped;
    emit(cfg, &csv, &meta)?;
    Ok(0)
}

fn cmd_verify(cfg: &Resolved) -> anyhow::Result<i32> {
    if cfg.max_enum_n > 20 {
        bail!("max-enum-n is capped at 20 (2^n paths)");
    }
    let vcfg = VerifyConfig { max_enum_n: cfg.max_enum_n, perturb: cfg.perturb, seed: cfg.seed };
    let results = run_battery(&vcfg)?;
    for r in &results {
        eprintln!(
            "{} {} (max_err {:.3e}, tol {:.3e}) - {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.max_err,
            r.tolerance,
            r.detail
        );
    }
    let json = serde_json::to_string_pretty(&results)?;
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &json).with_context(|| format!("writing {}", path.display()))?;
        }
        None => println!("{json}"),
    }
    Ok(if results.iter().all(|r| r.pass) { 0 } else { 1 })
}

/// `x1:y1,x2:y2,…` → interval pairs.
fn parse_pair_grid(spec: &str) -> anyhow::Result<Vec<(f64, f64)>> {
    let mut grid = Vec::new();
    for part in spec.split(',') {
        let (x, y) =
            part.split_once(':').ok_or_else(|| anyhow!("grid entry `{part}` is not x:y"))?;
        grid.push((parse_num(x)?, parse_num(y)?));
    }
    Ok(grid)
}

/// Either a comma list `a,b,c` or an inclusive range `lo:hi:step`.
fn parse_x_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("range `{spec}` is not lo:hi:step");
        }
        let (lo, hi, step) = (parse_num(parts[0])?, parse_num(parts[1])?, parse_num(parts[2])?);
        if step <= 0.0 || hi < lo {
            bail!("bad range `{spec}`");
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        Ok((0..=count).map(|i| lo + i as f64 * step).collect())
    } else {
        spec.split(',').map(parse_num).collect()
    }
}

fn parse_num(s: &str) -> anyhow::Result<f64> {
    s.trim().parse::<f64>().map_err(|_| anyhow!("`{s}` is not a number"))
}
