//! Seeded solver cross-checks persisted as JSON lines.
//!
//! A suite is a comma-separated list of `key=value` pairs, for example
//! `class=2cnf,n=10,k=3,seeds=0..100`. Recognized keys: `class`, `n`, `k`,
//! `seeds` (`a..b`, end exclusive), `atoms`, `backdoor`, `width`,
//! `prefix` and `algos` (`+`-separated solver tags, default the class's
//! backdoor solver and `brute`).

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qbd_core::backdoor::{partition, BaseClass};
use qbd_core::oracle::DEFAULT_CAP;
use qbd_core::reductions::{gen_random, GenParams, PrefixPattern};
use qbd_core::special::{dispatch, Algorithm, DispatchConfig};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long)]
    suite: String,
    /// Records are appended; the file is created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, env = "QBD_THREADS", default_value_t = 0)]
    threads: usize,
    #[arg(long, env = "QBD_BRUTE_CAP", default_value_t = DEFAULT_CAP)]
    brute_cap: usize,
}

/// One solver run on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub instance: String,
    pub seed: u64,
    pub algorithm: String,
    pub value: bool,
    pub k: usize,
    pub n: usize,
    pub branch_nodes: u64,
    pub leaves: u64,
    pub wall_ms: f64,
}

struct Suite {
    params: GenParams,
    seeds: std::ops::Range<u64>,
    algorithms: Vec<Algorithm>,
}

fn parse_suite(spec: &str) -> Result<Suite> {
    let mut params = GenParams::default();
    let mut seeds = 0..10;
    let mut algorithms = None;
    for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = pair
            .split_once('=')
            .with_context(|| format!("expected key=value, got '{pair}'"))?;
        let num = || {
            value
                .parse::<usize>()
                .with_context(|| format!("bad number for {key}: '{value}'"))
        };
        match key {
            "class" => params.class = value.parse::<BaseClass>()?,
            "n" => params.n = num()?,
            "k" => params.k = num()?,
            "atoms" => params.tractable_atoms = num()?,
            "backdoor" => params.backdoor_clauses = num()?,
            "width" => params.max_width = num()?,
            "prefix" => params.prefix = crate::prefix_pattern(value)?,
            "seeds" => {
                let (a, b) = value
                    .split_once("..")
                    .with_context(|| format!("seeds must be a..b, got '{value}'"))?;
                seeds = a.parse()?..b.parse()?;
            }
            "algos" => {
                algorithms = Some(
                    value
                        .split('+')
                        .map(str::parse)
                        .collect::<qbd_core::Result<Vec<Algorithm>>>()?,
                );
            }
            _ => bail!("unknown suite key '{key}'"),
        }
    }
    let algorithms = match algorithms {
        Some(a) => a,
        None => {
            let mut a: Vec<Algorithm> = Algorithm::for_class(params.class).into_iter().collect();
            a.push(Algorithm::BruteForce);
            a
        }
    };
    Ok(Suite {
        params,
        seeds,
        algorithms,
    })
}

pub fn bench(args: BenchArgs) -> Result<u8> {
    let suite = parse_suite(&args.suite)?;
    let cfg = DispatchConfig {
        brute_cap: args.brute_cap,
        fallback: false,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build()?;
    let p = &suite.params;
    let prefix = match p.prefix {
        PrefixPattern::Alternating => "alt".to_string(),
        PrefixPattern::Existential => "ex".to_string(),
        PrefixPattern::Random { forall } => format!("p{forall}"),
    };
    let tag = format!(
        "{}-n{}-k{}-a{}-b{}-w{}-{prefix}",
        p.class, p.n, p.k, p.tractable_atoms, p.backdoor_clauses, p.max_width
    );
    let runs: Vec<Result<Vec<BenchRecord>>> = pool.install(|| {
        suite
            .seeds
            .clone()
            .into_par_iter()
            .map(|seed| {
                let f = gen_random(&suite.params, seed)?;
                let mut records = Vec::with_capacity(suite.algorithms.len());
                for &algorithm in &suite.algorithms {
                    let target = match algorithm.class() {
                        Some(c) if Some(c) != f.base_class => partition(&f, c)?,
                        _ => f.clone(),
                    };
                    let start = Instant::now();
                    let v = dispatch(&target, Some(algorithm), &cfg)
                        .with_context(|| format!("{algorithm} on {tag} seed {seed}"))?;
                    records.push(BenchRecord {
                        instance: format!("{tag}-s{seed}"),
                        seed,
                        algorithm: algorithm.to_string(),
                        value: v.value,
                        k: target.k(),
                        n: f.num_vars(),
                        branch_nodes: v.stats.branch_nodes,
                        leaves: v.stats.leaves,
                        wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    });
                }
                Ok(records)
            })
            .collect()
    });

    // The only writer: records go out in seed order after the pool is done.
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&args.out)
        .with_context(|| format!("opening {}", args.out.display()))?;
    let mut sink = BufWriter::new(file);
    let mut written = 0;
    for run in runs {
        for r in run? {
            serde_json::to_writer(&mut sink, &r)?;
            sink.write_all(b"\n")?;
            written += 1;
        }
    }
    sink.flush()?;
    println!("{written} records appended to {}", args.out.display());
    Ok(0)
}

#[derive(Default)]
struct Tally {
    runs: usize,
    agree: usize,
    within_budget: usize,
    max_leaves: u64,
}

pub fn verify(path: &Path) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut by_instance: BTreeMap<String, Vec<BenchRecord>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: BenchRecord = serde_json::from_str(line).with_context(|| format!("line {}", i + 1))?;
        by_instance.entry(r.instance.clone()).or_default().push(r);
    }

    let mut tallies: BTreeMap<String, Tally> = BTreeMap::new();
    let mut disagreements = Vec::new();
    let mut overruns = Vec::new();
    for (instance, records) in &by_instance {
        let trues = records.iter().filter(|r| r.value).count();
        let majority = 2 * trues >= records.len();
        let split = trues != 0 && trues != records.len();
        if split {
            disagreements.push(instance.clone());
        }
        for r in records {
            let t = tallies.entry(r.algorithm.clone()).or_default();
            t.runs += 1;
            t.agree += usize::from(!split || r.value == majority);
            t.max_leaves = t.max_leaves.max(r.leaves);
            let budgeted = r.algorithm != Algorithm::BruteForce.to_string();
            let ok = !budgeted || r.k >= 64 || r.leaves <= 1u64 << r.k;
            t.within_budget += usize::from(ok);
            if !ok {
                overruns.push(format!("{instance} {}: {} leaves for k={}", r.algorithm, r.leaves, r.k));
            }
        }
    }

    println!(
        "{:<12} {:>6} {:>6} {:>10} {:>10}",
        "algorithm", "runs", "agree", "in-budget", "max-leaves"
    );
    for (name, t) in &tallies {
        println!(
            "{name:<12} {:>6} {:>6} {:>10} {:>10}",
            t.runs, t.agree, t.within_budget, t.max_leaves
        );
    }
    println!(
        "instances {}, disagreements {}, budget overruns {}",
        by_instance.len(),
        disagreements.len(),
        overruns.len()
    );
    for d in &disagreements {
        println!("disagreement: {d}");
    }
    for o in &overruns {
        println!("overrun: {o}");
    }
    Ok(if disagreements.is_empty() && overruns.is_empty() {
        0
    } else {
        1
    })
}
