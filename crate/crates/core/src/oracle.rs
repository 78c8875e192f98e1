//! Reference MST computation used to check the graph program: Boruvka
//! phases over an edge array with union-find (weighted union, no path
//! compression), plus a spanning-tree verifier.

use thiserror::Error;

use crate::host::HostGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("input graph is not connected")]
    Disconnected,
    #[error("edge {0} does not carry a single integer label")]
    BadEdgeLabel(String),
}

/// Union-find with weighted union; `find` walks the id chain without
/// compressing paths.
pub struct UnionFind {
    id: Vec<usize>,
    sz: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            id: (0..n).collect(),
            sz: vec![1; n],
        }
    }

    pub fn find(&self, x: usize) -> usize {
        let mut i = x;
        while i != self.id[i] {
            i = self.id[i];
        }
        i
    }

    pub fn connected(&self, p: usize, q: usize) -> bool {
        self.find(p) == self.find(q)
    }

    /// Returns false when p and q were already in the same set.
    pub fn union(&mut self, p: usize, q: usize) -> bool {
        let i = self.find(p);
        let j = self.find(q);
        if i == j {
            return false;
        }
        if self.sz[i] < self.sz[j] {
            self.id[i] = j;
            self.sz[j] += self.sz[i];
        } else {
            self.id[j] = i;
            self.sz[i] += self.sz[j];
        }
        true
    }
}

#[derive(Debug, Clone, Copy)]
struct WEdge {
    v: usize,
    w: usize,
    wt: i64,
}

/// Boruvka phases over an edge array: per phase, find each component's
/// nearest edge via `find`, union the chosen ones, and compact the edge
/// array to the still-useful edges. Loops never survive the first
/// compaction (their endpoints share a component).
fn boruvka_mst(n: usize, edges: &[(usize, usize, i64)]) -> Vec<(usize, usize, i64)> {
    let mut a: Vec<WEdge> = edges
        .iter()
        .map(|&(v, w, wt)| WEdge { v, w, wt })
        .collect();
    let mut mst = Vec::new();
    let mut uf = UnionFind::new(n);
    let mut e = a.len();
    while e != 0 {
        let mut nn: Vec<Option<WEdge>> = vec![None; n];
        let mut kept = 0;
        for h in 0..e {
            let i = uf.find(a[h].v);
            let j = uf.find(a[h].w);
            if i == j {
                continue;
            }
            if nn[i].map_or(true, |best| a[h].wt < best.wt) {
                nn[i] = Some(a[h]);
            }
            if nn[j].map_or(true, |best| a[h].wt < best.wt) {
                nn[j] = Some(a[h]);
            }
            a[kept] = a[h];
            kept += 1;
        }
        for best in nn.into_iter().flatten() {
            if !uf.connected(best.v, best.w) {
                uf.union(best.v, best.w);
                mst.push((best.v, best.w, best.wt));
            }
        }
        e = kept;
    }
    mst
}

fn weighted_edges(graph: &HostGraph) -> Result<(usize, Vec<(usize, usize, i64)>), OracleError> {
    // Map possibly non-contiguous node ids onto dense indices.
    let ids: Vec<u32> = graph.nodes().map(|n| n.id.0).collect();
    let dense = |id: u32| ids.iter().position(|&x| x == id).expect("endpoint exists");
    let mut edges = Vec::with_capacity(graph.edge_count());
    for e in graph.edges() {
        let wt = e
            .label
            .as_int()
            .ok_or_else(|| OracleError::BadEdgeLabel(e.id.to_string()))?;
        edges.push((dense(e.source.0), dense(e.target.0), wt));
    }
    Ok((ids.len(), edges))
}

/// Total weight of a minimum spanning tree of `graph`.
pub fn oracle_mst_weight(graph: &HostGraph) -> Result<i64, OracleError> {
    let (n, edges) = weighted_edges(graph)?;
    if n == 0 {
        return Err(OracleError::Disconnected);
    }
    let mst = boruvka_mst(n, &edges);
    if mst.len() != n - 1 {
        return Err(OracleError::Disconnected);
    }
    Ok(mst.iter().map(|&(_, _, wt)| wt).sum())
}

/// The minimum spanning tree's edges as (dense source, dense target,
/// weight); used where edge sets (not just weights) are compared.
pub fn oracle_mst_edges(graph: &HostGraph) -> Result<Vec<(usize, usize, i64)>, OracleError> {
    let (n, edges) = weighted_edges(graph)?;
    if n == 0 {
        return Err(OracleError::Disconnected);
    }
    let mst = boruvka_mst(n, &edges);
    if mst.len() != n - 1 {
        return Err(OracleError::Disconnected);
    }
    Ok(mst)
}

pub fn is_connected(graph: &HostGraph) -> bool {
    let n = graph.node_count();
    if n == 0 {
        return false;
    }
    let ids: Vec<u32> = graph.nodes().map(|x| x.id.0).collect();
    let dense = |id: u32| ids.iter().position(|&x| x == id).expect("endpoint exists");
    let mut uf = UnionFind::new(n);
    let mut components = n;
    for e in graph.edges() {
        if uf.union(dense(e.source.0), dense(e.target.0)) {
            components -= 1;
        }
    }
    components == 1
}

/// True iff the given edges of `input` form a spanning tree: exactly
/// n - 1 edges, no cycle, every node covered.
pub fn verify_spanning_tree(input: &HostGraph, tree_edges: &[crate::host::EdgeId]) -> bool {
    let n = input.node_count();
    if n == 0 || tree_edges.len() != n - 1 {
        return false;
    }
    let ids: Vec<u32> = input.nodes().map(|x| x.id.0).collect();
    let dense = |id: u32| ids.iter().position(|&x| x == id);
    let mut uf = UnionFind::new(n);
    for &eid in tree_edges {
        let Some(e) = input.edge(eid) else {
            return false;
        };
        let (Some(v), Some(w)) = (dense(e.source.0), dense(e.target.0)) else {
            return false;
        };
        if !uf.union(v, w) {
            return false;
        }
    }
    // n - 1 acyclic edges connect everything.
    true
}
