//! `hw`: witness runs, `a_p` tables, field scans and tower bookkeeping.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

use hw_cli::{emit_report, read_curve_file, run_witness, ApCache, Config};
use hw_core::ec::{known, CurveQ};
use hw_core::galois_tower::{index_bound_bruteforce, tower_structure, MAX_GROUP_ORDER};
use hw_core::searcher::{self, SearchParams};

#[derive(Parser)]
#[command(name = "hw", version, about = "Heegner point and ring class tower witnesses for elliptic curves over Q")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full pipeline and write one JSON report per curve.
    Witness {
        #[arg(long)]
        curves: PathBuf,
        /// Only run the curve with this label.
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print `p a_p` for primes up to a bound.
    Ap {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        pmax: u64,
        /// Curve file to look the label up in (built-in curves otherwise).
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Find the auxiliary imaginary quadratic field.
    ScanK {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 500)]
        bound: u64,
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Degrees of the tower and the index bound for `r` generators.
    Tower {
        #[arg(long)]
        q: u64,
        /// Comma separated primes.
        #[arg(long, value_delimiter = ',')]
        primes: Vec<u64>,
        #[arg(long, default_value_t = 0)]
        r: u32,
    },
}

fn lookup(label: &str, file: Option<&PathBuf>) -> anyhow::Result<CurveQ> {
    if let Some(f) = file {
        return read_curve_file(f)?
            .into_iter()
            .find(|c| c.label() == Some(label))
            .ok_or_else(|| anyhow!("no curve {label} in {}", f.display()));
    }
    known::by_label(label).ok_or_else(|| anyhow!("unknown curve {label}; pass --curves FILE"))
}

fn witness(
    curves: PathBuf,
    label: Option<String>,
    depth: Option<usize>,
    out: PathBuf,
    config: Option<PathBuf>,
) -> anyhow::Result<bool> {
    let mut cfg = match &config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(d) = depth {
        cfg.depth = d;
    }
    cfg.validate()?;
    let mut list = read_curve_file(&curves)?;
    if let Some(l) = &label {
        list.retain(|c| c.label() == Some(l.as_str()));
        if list.is_empty() {
            bail!("no curve {l} in {}", curves.display());
        }
    }
    let cache = match ApCache::open(&cfg.resolved_cache_dir()) {
        Ok(c) => Some(c),
        Err(e) => {
            log::warn!("running without a_p cache: {e:#}");
            None
        }
    };
    let reports: Vec<_> = list.par_iter().map(|c| run_witness(c, &cfg, cache.as_ref())).collect();
    let mut all = true;
    for r in &reports {
        let path = out.join(format!("{}.json", r.curve.label));
        emit_report(r, &path)?;
        let status = if r.passed { "PASS" } else { "FAIL" };
        let why = r.failure.as_deref().unwrap_or("");
        println!("{status} {} {} {why}", r.curve.label, path.display());
        all &= r.passed;
    }
    Ok(all)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Witness { curves, label, depth, out, config } => witness(curves, label, depth, out, config),
        Cmd::Ap { curve, pmax, curves } => {
            let c = lookup(&curve, curves.as_ref())?;
            let cfg = Config::default();
            let cache = ApCache::open(&cfg.resolved_cache_dir())?;
            for p in hw_core::arith::primes_up_to(pmax) {
                println!("{p} {}", cache.get_or_compute(&c, p)?);
            }
            Ok(true)
        }
        Cmd::ScanK { curve, bound, curves } => {
            let c = lookup(&curve, curves.as_ref())?;
            let params = SearchParams { scan_bound: bound, ..SearchParams::default() };
            let res = searcher::find_k(&c, &params, None).context("field search")?;
            println!("{}", serde_json::to_string_pretty(&res)?);
            Ok(res.accepted())
        }
        Cmd::Tower { q, primes, r } => {
            let t = tower_structure(q, &primes)?;
            let n = primes.len() as u32;
            let small = (q as u128).checked_pow(n).is_some_and(|o| o <= MAX_GROUP_ORDER as u128);
            let bound = if small { Some(index_bound_bruteforce(q, n, r.min(n))?) } else { None };
            let out = serde_json::json!({ "tower": t, "index_bound": bound });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(bound.is_none_or(|b| b.bound_holds))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
