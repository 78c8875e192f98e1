//! Command-line front end for the engine: generate benchmark inputs, run
//! the spanning-tree program on a host graph, verify a result against the
//! union-find reference, and run the timing benchmark.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use graft_core::bench::{class_slope, run_benchmark, summarize, to_csv, BenchConfig};
use graft_core::gen::{GraphClass, WeightedGraphSpec};
use graft_core::interp::{execute_traced, ExecOptions, PhasePoint};
use graft_core::mst::{mst_boruvka_loaded, run_mst_with, validate_end_state};
use graft_core::oracle::oracle_mst_weight;
use graft_core::text::{parse_host, print_host};

#[derive(Parser)]
#[command(name = "graft", about = "Rooted graph rewriting: spanning-tree program and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a weighted input graph and write it as host-graph text.
    Gen {
        /// grid, fixedwheel or wheel
        #[arg(long)]
        class: GraphClass,
        /// Size parameter (grid side, spoke length, spoke count).
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (.host).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the spanning-tree program on a host graph.
    Run {
        #[arg(long)]
        input: PathBuf,
        /// Shuffles match order; omit for the deterministic default.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the result graph here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print a phase-by-phase summary trace.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = 10_000_000)]
        step_limit: u64,
    },
    /// Check a result graph against its input.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        result: PathBuf,
    },
    /// Time the program over generated graph families and check every run.
    Bench {
        /// Comma-separated classes, e.g. grid,wheel.
        #[arg(long, value_delimiter = ',', required = true)]
        classes: Vec<GraphClass>,
        /// Comma-separated size parameters, shared by all classes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<u32>,
        #[arg(long, default_value_t = 20)]
        reps: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write per-run records as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Fit and print a log-log slope per class.
        #[arg(long)]
        slopes: bool,
        #[arg(long, default_value_t = 10_000_000)]
        step_limit: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen { class, k, seed, out } => {
            let graph = WeightedGraphSpec::new(class, k, seed).generate()?;
            fs::write(&out, print_host(&graph) + "\n")
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{class} k={k} seed={seed}: {} nodes, {} edges -> {}",
                graph.node_count(),
                graph.edge_count(),
                out.display()
            );
        }
        Command::Run { input, seed, out, trace, step_limit } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let graph = parse_host(&text)?;
            let program = mst_boruvka_loaded();
            let options = ExecOptions { seed, step_limit };
            if trace {
                let (_, _, events) = execute_traced(
                    &program,
                    &graph,
                    &options,
                    &["Preprocess", "Body", "GrowForest"],
                );
                for e in events {
                    let point = match e.point {
                        PhasePoint::Entry => "entry",
                        PhasePoint::Exit => "exit",
                    };
                    let cursor = e
                        .summary
                        .cursor_label
                        .map(|l| format!("{l}"))
                        .unwrap_or_else(|| "-".into());
                    println!(
                        "{:<12} {:<5} nodes={} edges={} trees={}",
                        e.phase, point, e.summary.nodes, e.summary.edges, cursor
                    );
                }
            }
            let result = run_mst_with(&program, &graph, &options)?;
            println!(
                "spanning tree: {} edges, total weight {}",
                result.mst_edge_ids.len(),
                result.total_weight
            );
            println!(
                "applications: {}, match attempts: {}, wall: {:.6}s",
                result.stats.applications,
                result.stats.match_attempts,
                result.stats.wall.as_secs_f64()
            );
            if let Some(out) = out {
                fs::write(&out, print_host(&result.graph) + "\n")
                    .with_context(|| format!("writing {}", out.display()))?;
                println!("result graph -> {}", out.display());
            }
        }
        Command::Verify { input, result } => {
            let input_graph = parse_host(
                &fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?,
            )?;
            let result_graph = parse_host(
                &fs::read_to_string(&result)
                    .with_context(|| format!("reading {}", result.display()))?,
            )?;
            let oracle = oracle_mst_weight(&input_graph)?;
            let violations = validate_end_state(&input_graph, &result_graph);
            let blue_weight: i64 = result_graph
                .edges()
                .filter(|e| e.mark == graft_core::host::EdgeMark::Blue)
                .map(|e| e.label.as_int().unwrap_or(0))
                .sum();
            println!("reference minimum weight: {oracle}");
            println!("result blue weight:       {blue_weight}");
            for v in &violations {
                println!("violation: {v}");
            }
            if violations.is_empty() && blue_weight == oracle {
                println!("OK: minimum spanning tree with a clean end state");
            } else {
                bail!("verification failed");
            }
        }
        Command::Bench { classes, sizes, reps, seed, csv, slopes, step_limit } => {
            let config = BenchConfig {
                classes: classes.clone(),
                sizes,
                reps,
                seed,
                step_limit,
            };
            let records = run_benchmark(&config)?;
            println!("class       k      nodes   reps  mean_s     min_s      max_s      checks");
            for s in summarize(&records) {
                println!(
                    "{:<10} {:<6} {:<7} {:<5} {:<10.6} {:<10.6} {:<10.6} {}",
                    s.class.to_string(),
                    s.k,
                    s.nodes,
                    s.reps,
                    s.mean_s,
                    s.min_s,
                    s.max_s,
                    if s.all_passed { "pass" } else { "FAIL" }
                );
            }
            if let Some(path) = csv {
                fs::write(&path, to_csv(&records))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("records -> {}", path.display());
            }
            if slopes {
                for class in &classes {
                    match class_slope(&records, *class) {
                        Ok(slope) => println!("{class} log-log slope: {slope:.3}"),
                        Err(e) => println!("{class} log-log slope: {e}"),
                    }
                }
            }
            if records.iter().any(|r| !r.checks_passed) {
                bail!("some runs failed their checks");
            }
        }
    }
    Ok(())
}

