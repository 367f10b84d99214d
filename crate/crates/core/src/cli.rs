//! The `coded-cache` command line: region curves, comparison curves and the
//! full verification run.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::combinatorics::{pattern_sets, representative_demands, DemandVector, PatternSet, DEFAULT_PATTERN_CAP};
use crate::error::{Error, Result};
use crate::field::Gf2m;
use crate::rational::{int, to_decimal, to_exact_string, Rational};
use crate::region::{
    convex_closure, min_rate_for_memory, region_boundary, verify_tian_chen_points, verify_yu_points,
    MembershipWitness, RegionCurve, RegionSpec,
};
use crate::scheme::{
    check_hidden_connection, check_reconstruction, check_redundancy_reduction, check_separation_independence,
    verify_end_to_end, verify_single_pattern, EndToEndReport, SinglePatternReport,
};
use crate::tradeoff::{known_scheme_points, KnownScheme, TradeoffPoint};

pub const SCHEMA: &str = "v1";
pub const THREADS_ENV: &str = "CODED_CACHE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "coded-cache", version, about = "Exact memory-rate regions and bit-exact scheme verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lower boundary of the region for each t and their convex closure.
    Region(RunConfig),
    /// Known-scheme curves next to the region closure.
    Curves(RunConfig),
    /// Membership, structural and end-to-end decoding checks.
    Verify(RunConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TSelection {
    All,
    One(usize),
}

fn parse_t(s: &str) -> std::result::Result<TSelection, String> {
    if s == "all" {
        return Ok(TSelection::All);
    }
    s.parse().map(TSelection::One).map_err(|_| format!("expected an integer or \"all\", got {s:?}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Args, Clone, Debug)]
pub struct RunConfig {
    /// Number of files.
    #[arg(long)]
    pub n: usize,
    /// Number of users.
    #[arg(long)]
    pub k: usize,
    /// Placement parameter, or "all".
    #[arg(long, default_value = "all", value_parser = parse_t)]
    pub t: TSelection,
    /// Number of equal memory steps on [0, N] at which the rate is sampled.
    #[arg(long, default_value_t = 12)]
    pub grid: usize,
    /// Largest number of pattern sets enumerated per demand.
    #[arg(long, default_value_t = DEFAULT_PATTERN_CAP)]
    pub pattern_cap: usize,
    /// Degree m of the symbol field GF(2^m).
    #[arg(long, default_value_t = 128)]
    pub m: u32,
    /// Seed for the random file contents.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory to write output files into; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 || self.k == 0 {
            return Err(Error::InvalidConfig("N and K must be at least 1".into()));
        }
        if self.k > 16 {
            return Err(Error::InvalidConfig(format!("K={} is beyond desk scale (at most 16)", self.k)));
        }
        if let TSelection::One(t) = self.t {
            if t > self.k {
                return Err(Error::InvalidConfig(format!("t={t} exceeds K={}", self.k)));
            }
        }
        Ok(())
    }

    fn ts(&self) -> Vec<usize> {
        match self.t {
            TSelection::All => (0..=self.k).collect(),
            TSelection::One(t) => vec![t],
        }
    }

    fn t_json(&self) -> Value {
        match self.t {
            TSelection::All => json!("all"),
            TSelection::One(t) => json!(t),
        }
    }
}

/// A command's result: one JSON document and one CSV table.
pub struct Output {
    pub name: &'static str,
    pub json: Value,
    pub csv: String,
}

fn point_json(p: &TradeoffPoint) -> Value {
    json!({
        "M": to_exact_string(&p.memory),
        "R": to_exact_string(&p.rate),
        "M_decimal": to_decimal(&p.memory),
        "R_decimal": to_decimal(&p.rate),
    })
}

fn points_json(points: &[TradeoffPoint]) -> Value {
    Value::Array(points.iter().map(point_json).collect())
}

fn csv_rows(csv: &mut String, series: &str, points: &[TradeoffPoint]) {
    for p in points {
        writeln!(csv, "{series},{},{}", to_decimal(&p.memory), to_decimal(&p.rate)).unwrap();
    }
}

fn boundaries(config: &RunConfig) -> Result<Vec<(usize, RegionCurve)>> {
    config
        .ts()
        .into_par_iter()
        .map(|t| Ok((t, region_boundary(&RegionSpec::build(config.n, config.k, t, config.pattern_cap)?)?)))
        .collect()
}

fn samples(config: &RunConfig, curve: &RegionCurve) -> Vec<(Rational, Option<Rational>)> {
    if config.grid == 0 {
        return Vec::new();
    }
    (0..=config.grid)
        .map(|i| {
            let m = int((config.n * i) as i64) / int(config.grid as i64);
            let r = curve.rate_at(&m);
            (m, r)
        })
        .collect()
}

pub fn cmd_region(config: &RunConfig) -> Result<Output> {
    config.validate()?;
    let curves = boundaries(config)?;
    let mut csv = String::from("series,M,R\n");
    let mut curves_json = Vec::new();
    for (t, c) in &curves {
        curves_json.push(json!({ "t": t, "vertices": points_json(&c.vertices) }));
        csv_rows(&mut csv, &format!("t={t}"), &c.vertices);
    }
    let mut doc = json!({
        "schema": SCHEMA,
        "command": "region",
        "N": config.n,
        "K": config.k,
        "t": config.t_json(),
        "curves": curves_json,
    });
    let base = match config.t {
        TSelection::All => {
            let closure = convex_closure(&curves.iter().map(|(_, c)| c.clone()).collect::<Vec<_>>());
            doc["closure"] = json!({ "vertices": points_json(&closure.vertices) });
            csv_rows(&mut csv, "closure", &closure.vertices);
            closure
        }
        TSelection::One(_) => curves[0].1.clone(),
    };
    let sampled = samples(config, &base);
    doc["samples"] = Value::Array(
        sampled
            .iter()
            .map(|(m, r)| match r {
                Some(r) => point_json(&TradeoffPoint::new(m.clone(), r.clone())),
                None => json!({ "M": to_exact_string(m), "M_decimal": to_decimal(m), "R": Value::Null }),
            })
            .collect(),
    );
    let feasible: Vec<TradeoffPoint> =
        sampled.into_iter().filter_map(|(m, r)| r.map(|r| TradeoffPoint::new(m, r))).collect();
    csv_rows(&mut csv, "sample", &feasible);
    Ok(Output { name: "region", json: doc, csv })
}

pub fn cmd_curves(config: &RunConfig) -> Result<Output> {
    config.validate()?;
    let mut series = Vec::new();
    let mut notes = Vec::new();
    let mut csv = String::from("series,M,R\n");
    for scheme in KnownScheme::ALL {
        match known_scheme_points(scheme, config.n, config.k) {
            Ok(points) => {
                csv_rows(&mut csv, scheme.label(), &points);
                series.push(json!({
                    "label": scheme.label(),
                    "dominated": scheme.is_dominated(),
                    "points": points_json(&points),
                }));
            }
            Err(e @ Error::Regime { .. }) => notes.push(json!(format!("{}: omitted, {e}", scheme.label()))),
            Err(e) => return Err(e),
        }
    }
    let curves = boundaries(config)?;
    let (label, region) = match config.t {
        TSelection::All => {
            ("region".to_string(), convex_closure(&curves.into_iter().map(|(_, c)| c).collect::<Vec<_>>()))
        }
        TSelection::One(t) => (format!("region_t{t}"), curves.into_iter().next().unwrap().1),
    };
    csv_rows(&mut csv, &label, &region.vertices);
    series.push(json!({ "label": label, "dominated": false, "points": points_json(&region.vertices) }));
    let doc = json!({
        "schema": SCHEMA,
        "command": "curves",
        "N": config.n,
        "K": config.k,
        "t": config.t_json(),
        "series": series,
        "notes": notes,
    });
    Ok(Output { name: "curves", json: doc, csv })
}

/// True for errors caused by the requested configuration rather than by a
/// failed check.
pub fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::InvalidConfig(_)
            | Error::FieldTooSmall { .. }
            | Error::UnsupportedField(_)
            | Error::EnumerationOverflow { .. }
    )
}

struct Checks {
    entries: Vec<Value>,
    first_failure: Option<Value>,
}

impl Checks {
    /// Records a check outcome; configuration errors abort the run.
    fn record<T>(&mut self, name: &str, t: Option<usize>, outcome: Result<T>, detail: impl FnOnce(&T) -> Value) -> Result<Option<T>> {
        match outcome {
            Ok(v) => {
                self.entries.push(json!({ "name": name, "t": t, "status": "PASS", "detail": detail(&v) }));
                Ok(Some(v))
            }
            Err(e) if is_config_error(&e) => Err(e),
            Err(e) => {
                let entry = json!({ "name": name, "t": t, "status": "FAIL", "error": e.to_string() });
                if self.first_failure.is_none() {
                    self.first_failure = Some(entry.clone());
                }
                self.entries.push(entry);
                Ok(None)
            }
        }
    }
}

fn witnesses_json(ws: &[MembershipWitness]) -> Value {
    Value::Array(
        ws.iter()
            .map(|w| {
                json!({
                    "t": w.t,
                    "point": point_json(&w.point),
                    "lp_rate": to_exact_string(&w.lp_rate),
                    "weights": w.weights.iter().map(|(d, ps)| json!({
                        "demand": d.to_string(),
                        "patterns": ps.iter().map(|(p, a)| json!({"pattern": p.to_string(), "alpha": to_exact_string(a)})).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn run_json(report: &EndToEndReport, vertex: &TradeoffPoint) -> Value {
    json!({
        "t": report.t,
        "vertex": point_json(vertex),
        "r": report.plan.r,
        "m": report.degree,
        "seed": report.seed,
        "info_symbols": report.info_symbols,
        "parities_per_user": report.parities,
        "plan": report.plan.entries.iter().map(|e| json!({
            "demand": e.demand.to_string(),
            "counts": e.counts.iter().map(|(p, c)| json!({"pattern": p.to_string(), "instances": c})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "demands": report.demands.iter().map(|d| json!({
            "demand": d.demand.to_string(),
            "transmissions": d.transmissions,
            "expected": d.expected_transmissions,
            "users": d.users.iter().map(|u| json!({"user": u.user, "collected": u.collected, "rank": u.rank})).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "achieved": point_json(&TradeoffPoint::new(report.memory.clone(), report.rate.clone())),
    })
}

fn single_json(t: usize, pattern: &PatternSet, r: &SinglePatternReport) -> Value {
    json!({
        "t": t,
        "demand": r.demand.to_string(),
        "pattern": pattern.to_string(),
        "info_symbols": r.info_symbols,
        "parities_per_user": r.parities,
        "transmissions": r.run.transmissions,
    })
}

/// Runs every check; the boolean is the overall verdict.
pub fn cmd_verify(config: &RunConfig) -> Result<(Output, bool)> {
    config.validate()?;
    let field = Gf2m::new(config.m)?;
    let (n, k, cap) = (config.n, config.k, config.pattern_cap);
    let ts = config.ts();
    let mut checks = Checks { entries: Vec::new(), first_failure: None };
    let mut notes = Vec::new();

    let keep = |ws: Vec<MembershipWitness>| ws.into_iter().filter(|w| ts.contains(&w.t)).collect::<Vec<_>>();
    checks.record("yu_membership", None, verify_yu_points(n, k, cap).map(keep), |w| witnesses_json(w))?;
    match verify_tian_chen_points(n, k, cap) {
        Err(e @ Error::Regime { .. }) => notes.push(json!(format!("tian_chen_membership skipped: {e}"))),
        outcome => {
            checks.record("tian_chen_membership", None, outcome.map(keep), |w| witnesses_json(w))?;
        }
    }

    let demands = representative_demands(n, k);
    for &t in &ts {
        for d in &demands {
            checks.record("redundancy_reduction", Some(t), check_redundancy_reduction(d, t), |r| {
                json!({ "demand": d.to_string(), "configurations": r.configurations })
            })?;
            let patterns = pattern_sets(d, t, cap)?;
            let coded: Vec<&PatternSet> = patterns.iter().filter(|p| !p.is_uncoded).collect();
            let outcome: Result<usize> = coded
                .par_iter()
                .map(|p| {
                    check_separation_independence(d, t, p)?;
                    check_reconstruction(d, t, p)?;
                    Ok(())
                })
                .collect::<Result<Vec<()>>>()
                .map(|v| v.len());
            checks.record("separation_independence", Some(t), outcome, |c| {
                json!({ "demand": d.to_string(), "pattern_sets": c })
            })?;
        }
    }

    if (n, k) == (3, 4) && ts.contains(&2) {
        let d = DemandVector::new(3, vec![1, 1, 2, 3])?;
        checks.record("hidden_connection", Some(2), check_hidden_connection(&d, 2), |r| {
            json!({
                "demand": d.to_string(),
                "pieces": r.pieces,
                "segment_occurrences": r.segment_occurrences,
                "distinct": r.distinct,
                "singleton_delivery": r.singleton_delivery,
            })
        })?;
    }

    let mut runs = Vec::new();
    let mut singles = Vec::new();
    for &t in &ts {
        let spec = RegionSpec::build(n, k, t, cap)?;
        let curve = match checks.record("boundary", Some(t), region_boundary(&spec), |c| points_json(&c.vertices))? {
            Some(c) => c,
            None => continue,
        };
        let mut seen: BTreeSet<(DemandVector, PatternSet)> = BTreeSet::new();
        for vertex in &curve.vertices {
            let cert = match checks.record("vertex_certificate", Some(t), min_rate_for_memory(&spec, &vertex.memory), |_| json!(point_json(vertex)))? {
                Some(c) => c,
                None => continue,
            };
            let alphas: Vec<_> = cert.demands.iter().map(|c| (c.demand.clone(), c.weights.clone())).collect();
            if let Some(report) = checks.record("end_to_end", Some(t), verify_end_to_end(n, k, t, &alphas, field, config.seed), |r| {
                json!({ "vertex": point_json(vertex), "r": r.plan.r, "achieved": point_json(&TradeoffPoint::new(r.memory.clone(), r.rate.clone())) })
            })? {
                if report.rate != vertex.rate || report.memory > vertex.memory {
                    let err = Error::VerificationFailure(format!(
                        "achieved ({}, {}) does not meet vertex {vertex}",
                        report.memory, report.rate
                    ));
                    checks.record::<()>("end_to_end", Some(t), Err(err), |_| Value::Null)?;
                }
                runs.push(run_json(&report, vertex));
            }
            for (d, weights) in &alphas {
                for (p, _) in weights {
                    if !seen.insert((d.clone(), p.clone())) {
                        continue;
                    }
                    if let Some(r) = checks.record("single_pattern", Some(t), verify_single_pattern(d, t, p, field, config.seed), |_| Value::Null)? {
                        singles.push(single_json(t, p, &r));
                    }
                }
            }
        }
    }

    let pass = checks.first_failure.is_none();
    let mut csv = String::from("name,t,status\n");
    for c in &checks.entries {
        let t = c["t"].as_u64().map(|t| t.to_string()).unwrap_or_default();
        writeln!(csv, "{},{},{}", c["name"].as_str().unwrap(), t, c["status"].as_str().unwrap()).unwrap();
    }
    let doc = json!({
        "schema": SCHEMA,
        "command": "verify",
        "N": n,
        "K": k,
        "t": config.t_json(),
        "m": config.m,
        "seed": config.seed,
        "pattern_cap": cap,
        "verdict": if pass { "PASS" } else { "FAIL" },
        "first_failure": checks.first_failure,
        "checks": checks.entries,
        "runs": runs,
        "single_pattern_runs": singles,
        "notes": notes,
    });
    Ok((Output { name: "verify", json: doc, csv }, pass))
}

fn emit(config: &RunConfig, out: &Output) -> std::io::Result<()> {
    let json_text = serde_json::to_string_pretty(&out.json).expect("JSON values serialize") + "\n";
    let want_json = config.format != Format::Csv;
    let want_csv = config.format != Format::Json;
    match &config.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            if want_json {
                std::fs::write(dir.join(format!("{}.json", out.name)), &json_text)?;
            }
            if want_csv {
                std::fs::write(dir.join(format!("{}.csv", out.name)), &out.csv)?;
            }
        }
        None => {
            if want_json {
                print!("{json_text}");
            }
            if want_csv {
                print!("{}", out.csv);
            }
        }
    }
    Ok(())
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // fails only if a pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Exit codes: 0 on success, 1 when a check fails, 2 for configuration errors.
pub fn main_with_args(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads();
    let (config, result) = match &cli.command {
        Command::Region(c) => (c, cmd_region(c).map(|o| (o, true))),
        Command::Curves(c) => (c, cmd_curves(c).map(|o| (o, true))),
        Command::Verify(c) => (c, cmd_verify(c)),
    };
    match result {
        Ok((out, pass)) => {
            if let Err(e) = emit(config, &out) {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            if pass {
                0
            } else {
                if let Some(f) = out.json.get("first_failure") {
                    eprintln!("verification failed: {f}");
                }
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                2
            } else {
                1
            }
        }
    }
}
