//! Helpers shared by the integration tests: a random small-graph
//! generator biased towards the program's label and mark vocabulary, and
//! graph-distance utilities for the matcher locality checks.

// Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use graft_core::host::{Atom, EdgeMark, HostGraph, Label, NodeId, NodeMark};
use graft_core::matcher::CompiledInstance;
use graft_core::rule::RootPattern;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_label(rng: &mut ChaCha8Rng) -> Label {
    match rng.random_range(0..8) {
        0..=2 => Label::empty(),
        3 | 4 => Label::int(rng.random_range(0..5)),
        5 => Label(vec![Atom::Int(rng.random_range(0..5)), Atom::Int(0)]),
        6 => Label::int(1),
        _ => Label(vec![Atom::Str("s".into())]),
    }
}

/// Marks weighted towards the program's dominant colours so rule
/// left-hand sides get exercised often.
pub fn random_node_mark(rng: &mut ChaCha8Rng) -> NodeMark {
    match rng.random_range(0..10) {
        0..=3 => NodeMark::Red,
        4..=6 => NodeMark::Grey,
        7 => NodeMark::Blue,
        8 => NodeMark::None,
        _ => NodeMark::Green,
    }
}

pub fn random_edge_mark(rng: &mut ChaCha8Rng) -> EdgeMark {
    match rng.random_range(0..10) {
        0..=3 => EdgeMark::None,
        4 | 5 => EdgeMark::Green,
        6 | 7 => EdgeMark::Dashed,
        8 => EdgeMark::Red,
        _ => EdgeMark::Blue,
    }
}

/// A random host graph with at most `max_nodes` nodes and `max_edges`
/// edges; loops and parallel edges occur, roots are common enough to
/// anchor most rules.
pub fn random_host(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize) -> HostGraph {
    let n = rng.random_range(0..=max_nodes);
    let mut g = HostGraph::new();
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        let label = random_label(rng);
        let mark = random_node_mark(rng);
        let root = rng.random_bool(0.4);
        ids.push(g.add_node(label, mark, root));
    }
    if n > 0 {
        let m = rng.random_range(0..=max_edges);
        for _ in 0..m {
            let a = ids[rng.random_range(0..n)];
            let b = ids[rng.random_range(0..n)];
            let label = random_label(rng);
            let mark = random_edge_mark(rng);
            g.add_edge(a, b, label, mark).unwrap();
        }
    }
    g
}

/// Undirected BFS distances from `start`; usize::MAX marks unreachable.
pub fn distances(graph: &HostGraph, start: NodeId) -> Vec<(NodeId, usize)> {
    let mut dist: Vec<(NodeId, usize)> = graph
        .nodes()
        .map(|node| (node.id, usize::MAX))
        .collect();
    let at = |dist: &Vec<(NodeId, usize)>, v: NodeId| {
        dist.iter().position(|(id, _)| *id == v).unwrap()
    };
    let start_idx = at(&dist, start);
    dist[start_idx].1 = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let d = dist[at(&dist, v)].1;
        let mut neighbours = Vec::new();
        for e in graph.incident_edges(v, graft_core::host::Direction::Either).unwrap() {
            let edge = graph.edge(e).unwrap();
            neighbours.push(if edge.source == v { edge.target } else { edge.source });
        }
        for w in neighbours {
            let wi = at(&dist, w);
            if dist[wi].1 == usize::MAX {
                dist[wi].1 = d + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// The instance's left-hand-side diameter: the longest undirected
/// shortest path within any one component.
pub fn lhs_diameter(ci: &CompiledInstance) -> usize {
    let n = ci.instance.lhs_nodes.len();
    if n == 0 {
        return 0;
    }
    let mut d = vec![vec![usize::MAX / 2; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in &ci.instance.lhs_edges {
        d[e.src][e.tgt] = 1;
        d[e.tgt][e.src] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let through = d[i][k] + d[k][j];
                if through < d[i][j] {
                    d[i][j] = through;
                }
            }
        }
    }
    let mut diam = 0;
    for row in &d {
        for &v in row {
            if v < usize::MAX / 2 && v > diam {
                diam = v;
            }
        }
    }
    diam
}

/// True when the instance anchors at a root (at least one mandatory-root
/// lhs node).
pub fn is_anchored(ci: &CompiledInstance) -> bool {
    ci.instance
        .lhs_nodes
        .iter()
        .any(|n| n.root == RootPattern::Yes)
}
