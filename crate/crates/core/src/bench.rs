//! Benchmark harness: runs the MST program over generated graph families,
//! checks every run against the union-find reference, and fits log-log
//! slopes to the timing trend.
//!
//! Wall time covers program execution only (matching and rewriting);
//! generation, validation and result checking sit outside the timed
//! region. Points run sequentially so timings stay free of contention.

use std::fmt::Write as _;

use thiserror::Error;

use crate::gen::{GenError, GraphClass, WeightedGraphSpec};
use crate::interp::ExecOptions;
use crate::mst::{blue_edges_as_input_ids, mst_boruvka_loaded, run_mst_with, validate_end_state, MstError};
use crate::oracle::{oracle_mst_weight, verify_spanning_tree, OracleError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("program run failed on {class} k={k} seed={seed}: {source}")]
    Run {
        class: GraphClass,
        k: u32,
        seed: u64,
        source: MstError,
    },
    #[error("slope fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("slope fit needs strictly increasing sizes and positive times")]
    BadPoints,
}

/// One timing measurement.
#[derive(Debug, Clone)]
pub struct BenchRecord {
    pub class: GraphClass,
    pub k: u32,
    pub nodes: usize,
    pub edges: usize,
    pub seed: u64,
    pub wall_time_s: f64,
    pub oracle_weight: i64,
    pub program_weight: i64,
    pub checks_passed: bool,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub classes: Vec<GraphClass>,
    pub sizes: Vec<u32>,
    pub reps: u32,
    pub seed: u64,
    pub step_limit: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            classes: vec![GraphClass::Grid],
            sizes: vec![8, 16, 32],
            reps: 20,
            seed: 1,
            step_limit: ExecOptions::default().step_limit,
        }
    }
}

/// Derives a per-point weight seed; splitmix-style so neighbouring
/// (k, rep) pairs decorrelate.
fn derive_seed(base: u64, class: GraphClass, k: u32, rep: u32) -> u64 {
    let tag = match class {
        GraphClass::Grid => 1u64,
        GraphClass::FixedWheel => 2,
        GraphClass::Wheel => 3,
    };
    let mut z = base
        .wrapping_add(tag.wrapping_mul(0x9E3779B97F4A7C15))
        .wrapping_add((k as u64) << 32)
        .wrapping_add(rep as u64);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Runs the whole grid of benchmark points. Each rep draws a fresh weight
/// distribution; every run is checked against the reference MST weight,
/// the spanning-tree verifier and the end-state validator.
pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    let program = mst_boruvka_loaded();
    let mut records = Vec::new();
    for &class in &config.classes {
        for &k in &config.sizes {
            // One untimed warmup run per point so the first timed rep does
            // not pay allocator growth and cache cold-start.
            {
                let seed = derive_seed(config.seed, class, k, u32::MAX);
                let input = WeightedGraphSpec::new(class, k, seed).generate()?;
                let options = ExecOptions {
                    seed: None,
                    step_limit: config.step_limit,
                };
                let _ = run_mst_with(&program, &input, &options);
            }
            for rep in 0..config.reps {
                let seed = derive_seed(config.seed, class, k, rep);
                let input = WeightedGraphSpec::new(class, k, seed).generate()?;
                let oracle_weight = oracle_mst_weight(&input)?;
                let options = ExecOptions {
                    seed: None,
                    step_limit: config.step_limit,
                };
                let result =
                    run_mst_with(&program, &input, &options).map_err(|source| BenchError::Run {
                        class,
                        k,
                        seed,
                        source,
                    })?;
                let spanning = blue_edges_as_input_ids(&input, &result)
                    .is_some_and(|ids| verify_spanning_tree(&input, &ids));
                let checks_passed = spanning
                    && validate_end_state(&input, &result.graph).is_empty()
                    && result.total_weight == oracle_weight;
                records.push(BenchRecord {
                    class,
                    k,
                    nodes: input.node_count(),
                    edges: input.edge_count(),
                    seed,
                    wall_time_s: result.stats.wall.as_secs_f64(),
                    oracle_weight,
                    program_weight: result.total_weight,
                    checks_passed,
                });
            }
        }
    }
    Ok(records)
}

/// CSV with the per-record columns, one line per record.
pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out =
        String::from("class,k,nodes,edges,seed,wall_time_s,oracle_weight,program_weight,checks_passed\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{},{},{}",
            r.class, r.k, r.nodes, r.edges, r.seed, r.wall_time_s, r.oracle_weight,
            r.program_weight, r.checks_passed
        );
    }
    out
}

/// Mean/min/max per (class, k).
#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub class: GraphClass,
    pub k: u32,
    pub nodes: usize,
    pub reps: usize,
    pub mean_s: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub all_passed: bool,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<BenchSummary> {
    let mut out: Vec<BenchSummary> = Vec::new();
    for r in records {
        match out.iter_mut().find(|s| s.class == r.class && s.k == r.k) {
            Some(s) => {
                s.reps += 1;
                s.mean_s += r.wall_time_s;
                s.min_s = s.min_s.min(r.wall_time_s);
                s.max_s = s.max_s.max(r.wall_time_s);
                s.all_passed &= r.checks_passed;
            }
            None => out.push(BenchSummary {
                class: r.class,
                k: r.k,
                nodes: r.nodes,
                reps: 1,
                mean_s: r.wall_time_s,
                min_s: r.wall_time_s,
                max_s: r.wall_time_s,
                all_passed: r.checks_passed,
            }),
        }
    }
    for s in &mut out {
        s.mean_s /= s.reps as f64;
    }
    out
}

/// Least-squares slope of log(time) against log(size).
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<f64, BenchError> {
    if points.len() < 3 {
        return Err(BenchError::TooFewPoints(points.len()));
    }
    for w in points.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(BenchError::BadPoints);
        }
    }
    if points.iter().any(|&(n, t)| n <= 0.0 || t <= 0.0) {
        return Err(BenchError::BadPoints);
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(n, t)| (n.ln(), t.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    Ok(cov / var)
}

/// Slope of one class's mean time against node count.
pub fn class_slope(records: &[BenchRecord], class: GraphClass) -> Result<f64, BenchError> {
    let mut points: Vec<(f64, f64)> = summarize(records)
        .into_iter()
        .filter(|s| s.class == class)
        .map(|s| (s.nodes as f64, s.mean_s))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    fit_loglog_slope(&points)
}
