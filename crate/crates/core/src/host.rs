//! Host graphs: directed labelled multigraphs with marks, root flags and
//! an undo journal for snapshot/restore.
//!
//! Node and edge ids are never reused within one graph's lifetime, so ids
//! stay meaningful across mutations and in test traces. Adjacency lists and
//! the root registry iterate in insertion order, which keeps runs
//! deterministic. Parallel edges and loops are allowed; a loop contributes 2
//! to its node's degree and is traversable in both orientations.

use std::fmt;

use thiserror::Error;

/// A single label entry: an integer or a character string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Int(i64),
    Str(String),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(i) => write!(f, "{i}"),
            Atom::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// A list label. The empty list is the "unlabelled" label.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Label(pub Vec<Atom>);

impl Label {
    pub fn empty() -> Self {
        Label(Vec::new())
    }

    pub fn int(value: i64) -> Self {
        Label(vec![Atom::Int(value)])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The label's single integer atom, if it has exactly one and it is an int.
    pub fn as_int(&self) -> Option<i64> {
        match self.0.as_slice() {
            [Atom::Int(i)] => Some(*i),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "empty");
        }
        for (i, atom) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{atom}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeMark {
    None,
    Red,
    Green,
    Blue,
    Grey,
}

impl NodeMark {
    pub const ALL: [NodeMark; 5] = [
        NodeMark::None,
        NodeMark::Red,
        NodeMark::Green,
        NodeMark::Blue,
        NodeMark::Grey,
    ];

    pub(crate) fn index(self) -> usize {
        match self {
            NodeMark::None => 0,
            NodeMark::Red => 1,
            NodeMark::Green => 2,
            NodeMark::Blue => 3,
            NodeMark::Grey => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeMark {
    None,
    Red,
    Green,
    Blue,
    Dashed,
}

impl EdgeMark {
    pub const ALL: [EdgeMark; 5] = [
        EdgeMark::None,
        EdgeMark::Red,
        EdgeMark::Green,
        EdgeMark::Blue,
        EdgeMark::Dashed,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostNode {
    pub id: NodeId,
    pub label: Label,
    pub mark: NodeMark,
    pub root: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HostEdge {
    pub id: EdgeId,
    pub source: NodeId,
    pub target: NodeId,
    pub label: Label,
    pub mark: EdgeMark,
}

impl HostEdge {
    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Traversal direction for [`HostGraph::incident_edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    Either,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("node {0} still has incident edges")]
    NodeHasEdges(NodeId),
    #[error("edge endpoint index {0} out of range ({1} nodes declared)")]
    EndpointOutOfRange(usize, usize),
    #[error("stale snapshot token (invalidated by an earlier restore)")]
    StaleSnapshot,
}

/// Per-node incident edge lists. Loops are kept separately so that a loop
/// counts twice towards the degree but is stored once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Adjacency {
    out: Vec<EdgeId>,
    inc: Vec<EdgeId>,
    loops: Vec<EdgeId>,
}

/// One inverse operation on the undo journal.
#[derive(Debug, Clone)]
enum UndoOp {
    AddedNode(NodeId),
    RemovedNode {
        node: HostNode,
        registry_pos: Option<usize>,
    },
    AddedEdge(EdgeId),
    RemovedEdge {
        edge: HostEdge,
        src_pos: usize,
        tgt_pos: usize,
    },
    SetNodeLabel(NodeId, Label),
    SetEdgeLabel(EdgeId, Label),
    SetNodeMark {
        node: NodeId,
        mark: NodeMark,
        registry_pos: Option<usize>,
    },
    SetEdgeMark(EdgeId, EdgeMark),
    SetRoot {
        node: NodeId,
        root: bool,
        registry_pos: Option<usize>,
    },
}

/// Token returned by [`HostGraph::snapshot`]; consumed by `restore`/`release`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SnapshotToken {
    serial: u64,
    journal_len: usize,
}

/// A directed labelled multigraph with marks, root flags, and an O(1)
/// root registry bucketed by node mark.
#[derive(Debug, Clone, Default)]
pub struct HostGraph {
    nodes: Vec<Option<HostNode>>,
    edges: Vec<Option<HostEdge>>,
    adj: Vec<Adjacency>,
    node_count: usize,
    edge_count: usize,
    roots: [Vec<NodeId>; 5],
    journal: Vec<UndoOp>,
    snap_stack: Vec<SnapshotToken>,
    snap_serial: u64,
}

impl HostGraph {
    pub fn new() -> Self {
        HostGraph::default()
    }

    /// Builds a graph from declarations. Edge endpoints index the declared
    /// nodes; ids are assigned in declaration order.
    pub fn build(
        nodes: &[(Label, NodeMark, bool)],
        edges: &[(usize, usize, Label, EdgeMark)],
    ) -> Result<Self, GraphError> {
        let mut g = HostGraph::new();
        let mut ids = Vec::with_capacity(nodes.len());
        for (label, mark, root) in nodes {
            ids.push(g.add_node(label.clone(), *mark, *root));
        }
        for (src, tgt, label, mark) in edges {
            let s = *ids
                .get(*src)
                .ok_or(GraphError::EndpointOutOfRange(*src, nodes.len()))?;
            let t = *ids
                .get(*tgt)
                .ok_or(GraphError::EndpointOutOfRange(*tgt, nodes.len()))?;
            g.add_edge(s, t, label.clone(), *mark)?;
        }
        g.clear_history();
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn node(&self, id: NodeId) -> Option<&HostNode> {
        self.nodes.get(id.0 as usize).and_then(|n| n.as_ref())
    }

    pub fn edge(&self, id: EdgeId) -> Option<&HostEdge> {
        self.edges.get(id.0 as usize).and_then(|e| e.as_ref())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &HostNode> {
        self.nodes.iter().filter_map(|n| n.as_ref())
    }

    pub fn edges(&self) -> impl Iterator<Item = &HostEdge> {
        self.edges.iter().filter_map(|e| e.as_ref())
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.node(id).is_some()
    }

    fn adj(&self, id: NodeId) -> &Adjacency {
        &self.adj[id.0 as usize]
    }

    /// degree(v) = in + out + 2 * loops.
    pub fn degree(&self, id: NodeId) -> usize {
        let a = self.adj(id);
        a.out.len() + a.inc.len() + 2 * a.loops.len()
    }

    /// Incident edges of `v` in insertion order. With `Either`, loops appear
    /// once per traversal orientation (i.e. twice).
    pub fn incident_edges(
        &self,
        v: NodeId,
        direction: Direction,
    ) -> Result<Vec<EdgeId>, GraphError> {
        if !self.contains_node(v) {
            return Err(GraphError::UnknownNode(v));
        }
        let a = self.adj(v);
        let mut out = Vec::new();
        match direction {
            Direction::Out => {
                out.extend_from_slice(&a.out);
                out.extend_from_slice(&a.loops);
            }
            Direction::In => {
                out.extend_from_slice(&a.inc);
                out.extend_from_slice(&a.loops);
            }
            Direction::Either => {
                out.extend_from_slice(&a.out);
                out.extend_from_slice(&a.inc);
                for l in &a.loops {
                    out.push(*l);
                    out.push(*l);
                }
            }
        }
        Ok(out)
    }

    /// Non-loop out-edges of `v` in insertion order.
    pub(crate) fn out_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.adj(v).out
    }

    /// Non-loop in-edges of `v` in insertion order.
    pub(crate) fn in_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.adj(v).inc
    }

    pub(crate) fn loop_edges(&self, v: NodeId) -> &[EdgeId] {
        &self.adj(v).loops
    }

    /// Root nodes with the given mark, in registry (insertion) order.
    /// Runs in time proportional to the answer, not the graph.
    pub fn roots_by_mark(&self, mark: NodeMark) -> &[NodeId] {
        &self.roots[mark.index()]
    }

    /// All root nodes, bucket by bucket.
    pub fn all_roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.roots.iter().flatten().copied()
    }

    pub fn root_count(&self) -> usize {
        self.roots.iter().map(|b| b.len()).sum()
    }

    pub fn add_node(&mut self, label: Label, mark: NodeMark, root: bool) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Some(HostNode {
            id,
            label,
            mark,
            root,
        }));
        self.adj.push(Adjacency::default());
        self.node_count += 1;
        if root {
            self.roots[mark.index()].push(id);
        }
        self.journal.push(UndoOp::AddedNode(id));
        id
    }

    pub fn add_edge(
        &mut self,
        source: NodeId,
        target: NodeId,
        label: Label,
        mark: EdgeMark,
    ) -> Result<EdgeId, GraphError> {
        if !self.contains_node(source) {
            return Err(GraphError::UnknownNode(source));
        }
        if !self.contains_node(target) {
            return Err(GraphError::UnknownNode(target));
        }
        let id = EdgeId(self.edges.len() as u32);
        self.edges.push(Some(HostEdge {
            id,
            source,
            target,
            label,
            mark,
        }));
        self.edge_count += 1;
        if source == target {
            self.adj[source.0 as usize].loops.push(id);
        } else {
            self.adj[source.0 as usize].out.push(id);
            self.adj[target.0 as usize].inc.push(id);
        }
        self.journal.push(UndoOp::AddedEdge(id));
        Ok(id)
    }

    /// Removes an isolated node. Deleting a node that still has incident
    /// edges is an error; the matcher enforces the dangling condition before
    /// ever asking for a deletion.
    pub fn remove_node(&mut self, id: NodeId) -> Result<(), GraphError> {
        let node = self.node(id).ok_or(GraphError::UnknownNode(id))?.clone();
        let a = self.adj(id);
        if !a.out.is_empty() || !a.inc.is_empty() || !a.loops.is_empty() {
            return Err(GraphError::NodeHasEdges(id));
        }
        let mut registry_pos = None;
        if node.root {
            let bucket = &mut self.roots[node.mark.index()];
            let pos = bucket.iter().position(|&n| n == id).expect("registry");
            bucket.remove(pos);
            registry_pos = Some(pos);
        }
        self.nodes[id.0 as usize] = None;
        self.node_count -= 1;
        self.journal.push(UndoOp::RemovedNode { node, registry_pos });
        Ok(())
    }

    pub fn remove_edge(&mut self, id: EdgeId) -> Result<(), GraphError> {
        let edge = self
            .edges
            .get_mut(id.0 as usize)
            .and_then(|e| e.take())
            .ok_or(GraphError::UnknownEdge(id))?;
        let (src_pos, tgt_pos);
        if edge.is_loop() {
            let loops = &mut self.adj[edge.source.0 as usize].loops;
            src_pos = loops.iter().position(|&e| e == id).expect("adjacency");
            loops.remove(src_pos);
            tgt_pos = src_pos;
        } else {
            let out = &mut self.adj[edge.source.0 as usize].out;
            src_pos = out.iter().position(|&e| e == id).expect("adjacency");
            out.remove(src_pos);
            let inc = &mut self.adj[edge.target.0 as usize].inc;
            tgt_pos = inc.iter().position(|&e| e == id).expect("adjacency");
            inc.remove(tgt_pos);
        }
        self.edge_count -= 1;
        self.journal.push(UndoOp::RemovedEdge {
            edge,
            src_pos,
            tgt_pos,
        });
        Ok(())
    }

    pub fn set_node_label(&mut self, id: NodeId, label: Label) -> Result<(), GraphError> {
        let node = self
            .nodes
            .get_mut(id.0 as usize)
            .and_then(|n| n.as_mut())
            .ok_or(GraphError::UnknownNode(id))?;
        let old = std::mem::replace(&mut node.label, label);
        self.journal.push(UndoOp::SetNodeLabel(id, old));
        Ok(())
    }

    pub fn set_edge_label(&mut self, id: EdgeId, label: Label) -> Result<(), GraphError> {
        let edge = self
            .edges
            .get_mut(id.0 as usize)
            .and_then(|e| e.as_mut())
            .ok_or(GraphError::UnknownEdge(id))?;
        let old = std::mem::replace(&mut edge.label, label);
        self.journal.push(UndoOp::SetEdgeLabel(id, old));
        Ok(())
    }

    /// Changes a node mark, moving the node between registry buckets if it
    /// is a root.
    pub fn set_node_mark(&mut self, id: NodeId, mark: NodeMark) -> Result<(), GraphError> {
        let node = self.node(id).ok_or(GraphError::UnknownNode(id))?;
        let (old, root) = (node.mark, node.root);
        let mut registry_pos = None;
        if root && old != mark {
            let bucket = &mut self.roots[old.index()];
            let pos = bucket.iter().position(|&n| n == id).expect("registry");
            bucket.remove(pos);
            registry_pos = Some(pos);
            self.roots[mark.index()].push(id);
        }
        self.nodes[id.0 as usize].as_mut().unwrap().mark = mark;
        self.journal.push(UndoOp::SetNodeMark {
            node: id,
            mark: old,
            registry_pos,
        });
        Ok(())
    }

    pub fn set_edge_mark(&mut self, id: EdgeId, mark: EdgeMark) -> Result<(), GraphError> {
        let edge = self
            .edges
            .get_mut(id.0 as usize)
            .and_then(|e| e.as_mut())
            .ok_or(GraphError::UnknownEdge(id))?;
        let old = std::mem::replace(&mut edge.mark, mark);
        self.journal.push(UndoOp::SetEdgeMark(id, old));
        Ok(())
    }

    pub fn set_root(&mut self, id: NodeId, root: bool) -> Result<(), GraphError> {
        let node = self.node(id).ok_or(GraphError::UnknownNode(id))?;
        let (old, mark) = (node.root, node.mark);
        if old == root {
            // Idempotent; journalled anyway so restores stay symmetric.
            self.journal.push(UndoOp::SetRoot {
                node: id,
                root: old,
                registry_pos: None,
            });
            return Ok(());
        }
        let mut registry_pos = None;
        if root {
            self.roots[mark.index()].push(id);
        } else {
            let bucket = &mut self.roots[mark.index()];
            let pos = bucket.iter().position(|&n| n == id).expect("registry");
            bucket.remove(pos);
            registry_pos = Some(pos);
        }
        self.nodes[id.0 as usize].as_mut().unwrap().root = root;
        self.journal.push(UndoOp::SetRoot {
            node: id,
            root: old,
            registry_pos,
        });
        Ok(())
    }

    /// Marks a restore point. Tokens obey stack discipline: restoring or
    /// releasing a token invalidates every token taken after it.
    pub fn snapshot(&mut self) -> SnapshotToken {
        self.snap_serial += 1;
        let token = SnapshotToken {
            serial: self.snap_serial,
            journal_len: self.journal.len(),
        };
        self.snap_stack.push(token);
        token
    }

    /// Rolls the graph back to the state at `snapshot` time.
    pub fn restore(&mut self, token: SnapshotToken) -> Result<(), GraphError> {
        self.pop_token(token)?;
        while self.journal.len() > token.journal_len {
            let op = self.journal.pop().unwrap();
            self.undo(op);
        }
        Ok(())
    }

    /// Drops a restore point, keeping all changes made since.
    pub fn release(&mut self, token: SnapshotToken) -> Result<(), GraphError> {
        self.pop_token(token)?;
        if self.snap_stack.is_empty() {
            self.journal.clear();
        }
        Ok(())
    }

    /// Forgets all undo history and outstanding tokens.
    pub fn clear_history(&mut self) {
        self.journal.clear();
        self.snap_stack.clear();
    }

    fn pop_token(&mut self, token: SnapshotToken) -> Result<(), GraphError> {
        if !self.snap_stack.iter().any(|t| t.serial == token.serial) {
            return Err(GraphError::StaleSnapshot);
        }
        while let Some(top) = self.snap_stack.pop() {
            if top.serial == token.serial {
                return Ok(());
            }
        }
        unreachable!("token presence checked above");
    }

    fn undo(&mut self, op: UndoOp) {
        match op {
            UndoOp::AddedNode(id) => {
                let node = self.nodes[id.0 as usize].take().expect("undo add node");
                if node.root {
                    let bucket = &mut self.roots[node.mark.index()];
                    debug_assert_eq!(bucket.last(), Some(&id));
                    bucket.pop();
                }
                self.node_count -= 1;
                // The id slot stays allocated; ids are never reused.
            }
            UndoOp::RemovedNode { node, registry_pos } => {
                let id = node.id;
                if let Some(pos) = registry_pos {
                    self.roots[node.mark.index()].insert(pos, id);
                }
                self.nodes[id.0 as usize] = Some(node);
                self.node_count += 1;
            }
            UndoOp::AddedEdge(id) => {
                let edge = self.edges[id.0 as usize].take().expect("undo add edge");
                if edge.is_loop() {
                    let loops = &mut self.adj[edge.source.0 as usize].loops;
                    debug_assert_eq!(loops.last(), Some(&id));
                    loops.pop();
                } else {
                    let out = &mut self.adj[edge.source.0 as usize].out;
                    debug_assert_eq!(out.last(), Some(&id));
                    out.pop();
                    let inc = &mut self.adj[edge.target.0 as usize].inc;
                    debug_assert_eq!(inc.last(), Some(&id));
                    inc.pop();
                }
                self.edge_count -= 1;
            }
            UndoOp::RemovedEdge {
                edge,
                src_pos,
                tgt_pos,
            } => {
                let id = edge.id;
                if edge.is_loop() {
                    self.adj[edge.source.0 as usize].loops.insert(src_pos, id);
                } else {
                    self.adj[edge.source.0 as usize].out.insert(src_pos, id);
                    self.adj[edge.target.0 as usize].inc.insert(tgt_pos, id);
                }
                self.edges[id.0 as usize] = Some(edge);
                self.edge_count += 1;
            }
            UndoOp::SetNodeLabel(id, label) => {
                self.nodes[id.0 as usize].as_mut().unwrap().label = label;
            }
            UndoOp::SetEdgeLabel(id, label) => {
                self.edges[id.0 as usize].as_mut().unwrap().label = label;
            }
            UndoOp::SetNodeMark {
                node,
                mark,
                registry_pos,
            } => {
                let current = self.nodes[node.0 as usize].as_ref().unwrap().mark;
                if let Some(pos) = registry_pos {
                    let bucket = &mut self.roots[current.index()];
                    debug_assert_eq!(bucket.last(), Some(&node));
                    bucket.pop();
                    self.roots[mark.index()].insert(pos, node);
                }
                self.nodes[node.0 as usize].as_mut().unwrap().mark = mark;
            }
            UndoOp::SetEdgeMark(id, mark) => {
                self.edges[id.0 as usize].as_mut().unwrap().mark = mark;
            }
            UndoOp::SetRoot {
                node,
                root,
                registry_pos,
            } => {
                let mark = self.nodes[node.0 as usize].as_ref().unwrap().mark;
                let current = self.nodes[node.0 as usize].as_ref().unwrap().root;
                if current != root {
                    if root {
                        // Was unrooted by the op being undone.
                        let pos = registry_pos.expect("position recorded");
                        self.roots[mark.index()].insert(pos, node);
                    } else {
                        let bucket = &mut self.roots[mark.index()];
                        debug_assert_eq!(bucket.last(), Some(&node));
                        bucket.pop();
                    }
                }
                self.nodes[node.0 as usize].as_mut().unwrap().root = root;
            }
        }
    }

    /// Structural equality on ids, labels, marks and root flags. Undo
    /// history and adjacency ordering are not part of the graph value.
    pub fn structurally_eq(&self, other: &HostGraph) -> bool {
        if self.node_count != other.node_count || self.edge_count != other.edge_count {
            return false;
        }
        self.nodes().all(|n| other.node(n.id) == Some(n))
            && self.edges().all(|e| other.edge(e.id) == Some(e))
    }

    /// Recomputes adjacency from the edge collection and compares with the
    /// stored lists; used by the invariant tests.
    pub fn audit_adjacency(&self) -> bool {
        let mut fresh: Vec<Adjacency> = vec![Adjacency::default(); self.adj.len()];
        for e in self.edges.iter().flatten() {
            if e.is_loop() {
                fresh[e.source.0 as usize].loops.push(e.id);
            } else {
                fresh[e.source.0 as usize].out.push(e.id);
                fresh[e.target.0 as usize].inc.push(e.id);
            }
        }
        // Stored lists are always in ascending edge-id order: edges append
        // with a fresh maximal id, removal preserves relative order, and
        // undo re-inserts at the recorded position.
        self.adj == fresh
    }

    /// Recomputes the root registry by scanning nodes and compares contents
    /// per bucket; used by the invariant tests.
    pub fn audit_roots(&self) -> bool {
        for mark in NodeMark::ALL {
            let expected: Vec<NodeId> = self
                .nodes()
                .filter(|n| n.root && n.mark == mark)
                .map(|n| n.id)
                .collect();
            let mut actual = self.roots[mark.index()].clone();
            actual.sort();
            let mut expected = expected;
            expected.sort();
            if actual != expected {
                return false;
            }
        }
        true
    }
}

impl PartialEq for HostGraph {
    fn eq(&self, other: &Self) -> bool {
        self.structurally_eq(other)
    }
}

impl Eq for HostGraph {}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(atoms: &[i64]) -> Label {
        Label(atoms.iter().map(|&i| Atom::Int(i)).collect())
    }

    #[test]
    fn build_empty_graph() {
        let g = HostGraph::build(&[], &[]).unwrap();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn build_two_nodes_one_edge() {
        let g = HostGraph::build(
            &[
                (Label::empty(), NodeMark::None, false),
                (Label::empty(), NodeMark::None, false),
            ],
            &[(0, 1, l(&[5]), EdgeMark::None)],
        )
        .unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(NodeId(0)), 1);
        assert_eq!(g.degree(NodeId(1)), 1);
    }

    #[test]
    fn build_root_with_loop_counts_degree_twice() {
        let g = HostGraph::build(
            &[(Label::empty(), NodeMark::None, true)],
            &[(0, 0, l(&[7]), EdgeMark::Red)],
        )
        .unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(NodeId(0)), 2);
        assert_eq!(g.roots_by_mark(NodeMark::None), &[NodeId(0)]);
    }

    #[test]
    fn build_rejects_bad_endpoint() {
        let err = HostGraph::build(
            &[(Label::empty(), NodeMark::None, false)],
            &[(0, 3, Label::empty(), EdgeMark::None)],
        )
        .unwrap_err();
        assert_eq!(err, GraphError::EndpointOutOfRange(3, 1));
    }

    #[test]
    fn set_root_updates_registry() {
        let mut g = HostGraph::new();
        let v = g.add_node(Label::empty(), NodeMark::Red, false);
        assert!(g.roots_by_mark(NodeMark::Red).is_empty());
        g.set_root(v, true).unwrap();
        assert_eq!(g.roots_by_mark(NodeMark::Red), &[v]);
        g.set_node_mark(v, NodeMark::Grey).unwrap();
        assert!(g.roots_by_mark(NodeMark::Red).is_empty());
        assert_eq!(g.roots_by_mark(NodeMark::Grey), &[v]);
        g.set_root(v, false).unwrap();
        assert_eq!(g.root_count(), 0);
    }

    #[test]
    fn remove_edge_updates_degree() {
        let mut g = HostGraph::new();
        let a = g.add_node(Label::empty(), NodeMark::None, false);
        let b = g.add_node(Label::empty(), NodeMark::None, false);
        let e = g.add_edge(a, b, Label::empty(), EdgeMark::None).unwrap();
        let lp = g.add_edge(a, a, Label::empty(), EdgeMark::None).unwrap();
        assert_eq!(g.degree(a), 3);
        g.remove_edge(e).unwrap();
        assert_eq!(g.degree(a), 2);
        g.remove_edge(lp).unwrap();
        assert_eq!(g.degree(a), 0);
    }

    #[test]
    fn remove_node_with_edges_errors() {
        let mut g = HostGraph::new();
        let a = g.add_node(Label::empty(), NodeMark::None, false);
        let b = g.add_node(Label::empty(), NodeMark::None, false);
        g.add_edge(a, b, Label::empty(), EdgeMark::None).unwrap();
        assert_eq!(g.remove_node(a), Err(GraphError::NodeHasEdges(a)));
        assert_eq!(g.remove_node(b), Err(GraphError::NodeHasEdges(b)));
    }

    #[test]
    fn incident_edges_cases() {
        let mut g = HostGraph::new();
        let a = g.add_node(Label::empty(), NodeMark::None, false);
        let b = g.add_node(Label::empty(), NodeMark::None, false);
        assert!(g.incident_edges(a, Direction::Either).unwrap().is_empty());
        let e = g.add_edge(a, b, Label::empty(), EdgeMark::None).unwrap();
        assert!(g.incident_edges(a, Direction::In).unwrap().is_empty());
        assert_eq!(g.incident_edges(a, Direction::Out).unwrap(), vec![e]);
        let lp = g.add_edge(b, b, Label::empty(), EdgeMark::None).unwrap();
        // A loop is traversable in both orientations.
        assert_eq!(g.incident_edges(b, Direction::Either).unwrap(), vec![e, lp, lp]);
    }

    #[test]
    fn roots_by_mark_bucketing() {
        let mut g = HostGraph::new();
        let a = g.add_node(Label::empty(), NodeMark::None, true);
        let b = g.add_node(Label::empty(), NodeMark::Red, true);
        assert_eq!(g.roots_by_mark(NodeMark::Red), &[b]);
        assert_eq!(g.roots_by_mark(NodeMark::None), &[a]);
        g.set_root(b, false).unwrap();
        assert!(g.roots_by_mark(NodeMark::Red).is_empty());
    }

    #[test]
    fn snapshot_restore_roundtrip() {
        let mut g = HostGraph::new();
        let a = g.add_node(l(&[1]), NodeMark::Red, true);
        let before = g.clone();
        let snap = g.snapshot();
        g.add_node(Label::empty(), NodeMark::None, false);
        g.add_node(Label::empty(), NodeMark::None, false);
        let c = g.add_node(Label::empty(), NodeMark::Blue, false);
        g.add_edge(a, c, l(&[9]), EdgeMark::Green).unwrap();
        g.set_node_label(a, l(&[2])).unwrap();
        g.restore(snap).unwrap();
        assert_eq!(g, before);
        assert_eq!(g.node_count(), 1);
    }

    #[test]
    fn snapshot_without_mutation_is_identity() {
        let mut g = HostGraph::build(
            &[(l(&[1]), NodeMark::None, true)],
            &[(0, 0, Label::empty(), EdgeMark::Red)],
        )
        .unwrap();
        let before = g.clone();
        let snap = g.snapshot();
        g.restore(snap).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn nested_snapshots_stack() {
        let mut g = HostGraph::new();
        g.add_node(Label::empty(), NodeMark::None, false);
        let original = g.clone();
        let snap_a = g.snapshot();
        g.add_node(Label::empty(), NodeMark::None, false);
        let mid = g.clone();
        let snap_b = g.snapshot();
        g.add_node(Label::empty(), NodeMark::None, false);
        g.restore(snap_b).unwrap();
        assert_eq!(g, mid);
        g.restore(snap_a).unwrap();
        assert_eq!(g, original);
    }

    #[test]
    fn stale_token_rejected() {
        let mut g = HostGraph::new();
        let snap_a = g.snapshot();
        g.add_node(Label::empty(), NodeMark::None, false);
        let snap_b = g.snapshot();
        g.restore(snap_a).unwrap();
        assert_eq!(g.restore(snap_b), Err(GraphError::StaleSnapshot));
    }

    #[test]
    fn ids_not_reused_after_restore() {
        let mut g = HostGraph::new();
        g.add_node(Label::empty(), NodeMark::None, false);
        let snap = g.snapshot();
        let b = g.add_node(Label::empty(), NodeMark::None, false);
        g.restore(snap).unwrap();
        let c = g.add_node(Label::empty(), NodeMark::None, false);
        assert!(c.0 >= b.0, "id slots move forward only");
    }
}
