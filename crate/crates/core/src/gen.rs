//! Weighted input-graph generators: square grids, fixed degree wheels
//! (16 subdivided spokes) and unbounded degree wheels. Nodes are
//! unlabelled and unmarked; edge weights are drawn uniformly from
//! [1, 1000] and orientations are random, matching the programs' reading
//! of inputs as undirected.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::host::{EdgeMark, HostGraph, Label, NodeMark};

pub const DEFAULT_WEIGHT_RANGE: (i64, i64) = (1, 1000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphClass {
    Grid,
    FixedWheel,
    Wheel,
}

impl fmt::Display for GraphClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphClass::Grid => "grid",
            GraphClass::FixedWheel => "fixedwheel",
            GraphClass::Wheel => "wheel",
        })
    }
}

impl FromStr for GraphClass {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, GenError> {
        match s {
            "grid" => Ok(GraphClass::Grid),
            "fixedwheel" => Ok(GraphClass::FixedWheel),
            "wheel" => Ok(GraphClass::Wheel),
            other => Err(GenError::UnknownClass(other.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown graph class {0:?} (expected grid, fixedwheel or wheel)")]
    UnknownClass(String),
    #[error("size parameter must be at least {min} for {class}, got {k}")]
    SizeTooSmall { class: &'static str, min: u32, k: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraphSpec {
    pub class: GraphClass,
    pub k: u32,
    pub seed: u64,
    pub weight_range: (i64, i64),
}

impl WeightedGraphSpec {
    pub fn new(class: GraphClass, k: u32, seed: u64) -> Self {
        WeightedGraphSpec {
            class,
            k,
            seed,
            weight_range: DEFAULT_WEIGHT_RANGE,
        }
    }

    pub fn generate(&self) -> Result<HostGraph, GenError> {
        match self.class {
            GraphClass::Grid => gen_grid_with(self.k, self.seed, self.weight_range),
            GraphClass::FixedWheel => gen_fixed_wheel_with(self.k, self.seed, self.weight_range),
            GraphClass::Wheel => gen_wheel_with(self.k, self.seed, self.weight_range),
        }
    }
}

struct Builder {
    rng: ChaCha8Rng,
    range: (i64, i64),
    edges: Vec<(usize, usize, Label, EdgeMark)>,
}

impl Builder {
    fn new(seed: u64, range: (i64, i64)) -> Self {
        Builder {
            rng: ChaCha8Rng::seed_from_u64(seed),
            range,
            edges: Vec::new(),
        }
    }

    /// Adds an undirected edge with random weight and orientation.
    fn edge(&mut self, a: usize, b: usize) {
        let wt = self.rng.random_range(self.range.0..=self.range.1);
        let (src, tgt) = if self.rng.random_bool(0.5) { (a, b) } else { (b, a) };
        self.edges
            .push((src, tgt, Label::int(wt), EdgeMark::None));
    }

    fn build(self, n: usize) -> HostGraph {
        let nodes = vec![(Label::empty(), NodeMark::None, false); n];
        HostGraph::build(&nodes, &self.edges).expect("generator endpoints in range")
    }
}

/// k x k grid, k^2 nodes and 2k(k-1) edges, max degree 4.
pub fn gen_grid(k: u32, seed: u64) -> Result<HostGraph, GenError> {
    gen_grid_with(k, seed, DEFAULT_WEIGHT_RANGE)
}

fn gen_grid_with(k: u32, seed: u64, range: (i64, i64)) -> Result<HostGraph, GenError> {
    if k < 1 {
        return Err(GenError::SizeTooSmall { class: "grid", min: 1, k });
    }
    let k = k as usize;
    let mut b = Builder::new(seed, range);
    let at = |row: usize, col: usize| row * k + col;
    for row in 0..k {
        for col in 0..k {
            if col + 1 < k {
                b.edge(at(row, col), at(row, col + 1));
            }
            if row + 1 < k {
                b.edge(at(row, col), at(row + 1, col));
            }
        }
    }
    Ok(b.build(k * k))
}

/// Wheel with 16 spokes, each a path of k edges from the hub to a rim
/// node; rim nodes form a 16-cycle. 16k+1 nodes, 16k+16 edges, hub degree
/// 16, everything else at most 4.
pub fn gen_fixed_wheel(k: u32, seed: u64) -> Result<HostGraph, GenError> {
    gen_fixed_wheel_with(k, seed, DEFAULT_WEIGHT_RANGE)
}

fn gen_fixed_wheel_with(k: u32, seed: u64, range: (i64, i64)) -> Result<HostGraph, GenError> {
    if k < 1 {
        return Err(GenError::SizeTooSmall { class: "fixedwheel", min: 1, k });
    }
    let k = k as usize;
    const SPOKES: usize = 16;
    let mut b = Builder::new(seed, range);
    // Node layout: hub, then per spoke its k-1 internal nodes, then the 16
    // rim nodes.
    let hub = 0;
    let internal = |s: usize, i: usize| 1 + s * (k - 1) + i;
    let rim = |s: usize| 1 + SPOKES * (k - 1) + s;
    for s in 0..SPOKES {
        let mut prev = hub;
        for i in 0..k - 1 {
            b.edge(prev, internal(s, i));
            prev = internal(s, i);
        }
        b.edge(prev, rim(s));
    }
    for s in 0..SPOKES {
        b.edge(rim(s), rim((s + 1) % SPOKES));
    }
    Ok(b.build(1 + SPOKES * (k - 1) + SPOKES))
}

/// Wheel with k spokes: hub plus k rim nodes, k spokes and a k-cycle rim;
/// hub degree k grows with the graph.
pub fn gen_wheel(k: u32, seed: u64) -> Result<HostGraph, GenError> {
    gen_wheel_with(k, seed, DEFAULT_WEIGHT_RANGE)
}

fn gen_wheel_with(k: u32, seed: u64, range: (i64, i64)) -> Result<HostGraph, GenError> {
    if k < 3 {
        return Err(GenError::SizeTooSmall { class: "wheel", min: 3, k });
    }
    let k = k as usize;
    let mut b = Builder::new(seed, range);
    for s in 0..k {
        b.edge(0, 1 + s);
    }
    for s in 0..k {
        b.edge(1 + s, 1 + (s + 1) % k);
    }
    Ok(b.build(k + 1))
}
