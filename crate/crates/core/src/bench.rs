//! Ratio and runtime benchmark: generate, solve, compare with brute force.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{brute_optimum, BaselineError};
use crate::generate::{generate, Family, GenerateConfig, GenerateError, MetricKind};
use crate::instance::InstanceError;
use crate::pcm::ExactSolver;
use crate::solve::{solve_with, SolveError, SolveOptions};

/// Largest ratio an exact run may report.
pub const RATIO_LIMIT: f64 = 3.0 + 1e-9;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("size bounds need 1 <= facilities <= {max_f} and 1 <= customers, got {facilities} and {customers}")]
    Bounds {
        facilities: usize,
        customers: usize,
        max_f: usize,
    },
    #[error("seed {seed}: {source}")]
    Generate { seed: u64, source: GenerateError },
    #[error("seed {seed}: {source}")]
    Instance { seed: u64, source: InstanceError },
    #[error("seed {seed}: {source}")]
    Solve { seed: u64, source: SolveError },
    #[error("seed {seed}: {source}")]
    Baseline { seed: u64, source: BaselineError },
    #[error("could not start the worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Instances per family.
    pub count: usize,
    pub families: Vec<Family>,
    pub max_facilities: usize,
    pub max_customers: usize,
    /// Instance `i` of every family uses seed `seed + i`.
    pub seed: u64,
    pub metric: MetricKind,
    pub budget: Option<usize>,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub seed: u64,
    pub family: Family,
    pub facilities: usize,
    pub customers: usize,
    pub m: usize,
    pub brute_radius: f64,
    pub algorithm_radius: f64,
    /// `algorithm_radius / brute_radius`; 1 when both are 0.
    pub ratio: f64,
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Sorted by family, then seed.
    pub rows: Vec<BenchRow>,
    pub max_ratio: BTreeMap<Family, f64>,
}

impl BenchReport {
    pub fn within_limit(&self) -> bool {
        self.rows.iter().all(|r| r.ratio <= RATIO_LIMIT)
    }

    /// One JSON object per row.
    pub fn json_lines(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("rows serialize") + "\n")
            .collect()
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<17} {:>6} {:>3} {:>3} {:>3} {:>10} {:>10} {:>6} {:>6} {:>9}",
            "family", "seed", "|F|", "|C|", "m", "brute", "algorithm", "ratio", "iters", "ms"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<17} {:>6} {:>3} {:>3} {:>3} {:>10.4} {:>10.4} {:>6.3} {:>6} {:>9.3}",
                r.family.name(),
                r.seed,
                r.facilities,
                r.customers,
                r.m,
                r.brute_radius,
                r.algorithm_radius,
                r.ratio,
                r.iterations,
                r.wall_ms
            );
        }
        for (family, ratio) in &self.max_ratio {
            let _ = writeln!(out, "max ratio {:<17} {ratio:.4}", family.name());
        }
        out
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    let cap = crate::baseline::BRUTE_FACILITY_CAP;
    if cfg.max_facilities == 0 || cfg.max_facilities > cap || cfg.max_customers == 0 {
        return Err(BenchError::Bounds {
            facilities: cfg.max_facilities,
            customers: cfg.max_customers,
            max_f: cap,
        });
    }
    let jobs: Vec<(Family, u64)> = cfg
        .families
        .iter()
        .flat_map(|&family| (0..cfg.count as u64).map(move |i| (family, cfg.seed.wrapping_add(i))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let mut rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(family, seed)| bench_one(cfg, family, seed))
            .collect::<Result<Vec<_>, _>>()
    })?;
    rows.sort_by_key(|r| (r.family, r.seed));
    let mut max_ratio = BTreeMap::new();
    for r in &rows {
        let entry = max_ratio.entry(r.family).or_insert(0.0f64);
        *entry = entry.max(r.ratio);
    }
    Ok(BenchReport { rows, max_ratio })
}

/// Sizes drawn from the seed: `2..=max` each, capped by the bounds.
fn sizes(cfg: &BenchConfig, seed: u64) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let nf = rng.gen_range(1.max(cfg.max_facilities.min(2))..=cfg.max_facilities);
    let nc = rng.gen_range(1.max(cfg.max_customers.min(2))..=cfg.max_customers);
    (nf, nc)
}

fn bench_one(cfg: &BenchConfig, family: Family, seed: u64) -> Result<BenchRow, BenchError> {
    let (facilities, customers) = sizes(cfg, seed);
    let gen = GenerateConfig {
        family,
        facilities,
        customers,
        m: None,
        seed,
        metric: cfg.metric,
    };
    let file = generate(&gen).map_err(|source| BenchError::Generate { seed, source })?;
    let inst = file
        .into_instance(false)
        .map_err(|source| BenchError::Instance { seed, source })?
        .instance;
    let start = Instant::now();
    let options = SolveOptions {
        budget: cfg.budget,
        ..SolveOptions::default()
    };
    let run = solve_with(&inst, &ExactSolver::new(inst.constraint.clone()), &options)
        .map_err(|source| BenchError::Solve { seed, source })?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let brute = brute_optimum(&inst).map_err(|source| BenchError::Baseline { seed, source })?;
    let algorithm_radius = run.solution.radius;
    let ratio = match (algorithm_radius, brute.radius) {
        (a, b) if b > 0.0 => a / b,
        (a, _) if a == 0.0 => 1.0,
        _ => f64::INFINITY,
    };
    Ok(BenchRow {
        seed,
        family,
        facilities,
        customers,
        m: inst.m,
        brute_radius: brute.radius,
        algorithm_radius,
        ratio,
        iterations: run.solution.iterations,
        wall_ms,
    })
}
