//! Injective, root-anchored matching of rule instances, the dangling
//! condition, and rule application.
//!
//! Matching compiles each instance into a search plan: bind an anchor node
//! (a left-hand root, served by the host's root registry), then extend
//! along left-hand edges through the host adjacency lists. Candidates are
//! tried in registry/adjacency insertion order, so the first match is
//! deterministic; an optional RNG shuffles candidate order instead.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::host::{EdgeId, HostGraph, NodeId};
use crate::rule::{
    eval_condition, eval_label, match_label, Bindings, LabelPattern, NodeMarkPattern,
    RootPattern, RuleInstance, RuleNode, VarId,
};

/// An injective binding of one instance's left-hand side into a host graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    /// lhs node index -> host node.
    pub nodes: Vec<NodeId>,
    /// lhs edge index -> host edge.
    pub edges: Vec<EdgeId>,
    pub bindings: Bindings,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// The bound endpoint is the edge source; follow host out-edges.
    Forward,
    /// The bound endpoint is the edge target; follow host in-edges.
    Backward,
}

#[derive(Debug, Clone)]
enum PlanStep {
    /// Bind an lhs root node from the root registry.
    Anchor { node: usize },
    /// Bind an lhs node by scanning all host nodes (no usable root).
    Scan { node: usize },
    /// Bind an lhs edge and its unbound endpoint from the adjacency of the
    /// bound one.
    Extend {
        edge: usize,
        from: usize,
        to: usize,
        dir: Dir,
    },
    /// Bind an lhs edge whose endpoints are both bound (includes loops).
    CheckEdge { edge: usize },
}

/// A rule instance together with its precomputed search plan.
#[derive(Debug, Clone)]
pub struct CompiledInstance {
    pub instance: RuleInstance,
    plan: Vec<PlanStep>,
    /// lhs nodes with no interface entry; their images get deleted.
    deleted_lhs: Vec<usize>,
    /// rhs nodes with no interface entry; created fresh.
    created_rhs: Vec<usize>,
    /// Per interface pair: the rhs label expression is just the lhs
    /// pattern again, so application leaves the label alone.
    label_kept: Vec<bool>,
    /// Matched edges that survive application in place (same interface
    /// endpoints, same orientation, identical label): (lhs edge, rhs
    /// edge). Application only adjusts their marks.
    kept_edges: Vec<(usize, usize)>,
    /// lhs edges not kept: deleted.
    dropped_lhs_edges: Vec<usize>,
    /// rhs edges not kept: created.
    created_rhs_edges: Vec<usize>,
}

impl CompiledInstance {
    pub fn new(instance: RuleInstance) -> Self {
        assert!(
            instance.vars.len() <= 32,
            "rule {} exceeds the 32-variable engine limit",
            instance.rule_name
        );
        let plan = build_plan(&instance);
        let deleted_lhs = (0..instance.lhs_nodes.len())
            .filter(|l| instance.rhs_of_lhs(*l).is_none())
            .collect();
        let created_rhs = (0..instance.rhs_nodes.len())
            .filter(|r| instance.lhs_of_rhs(*r).is_none())
            .collect();
        let label_kept: Vec<bool> = instance
            .interface
            .iter()
            .map(|&(l, r)| instance.lhs_nodes[l].label.as_expr() == instance.rhs_nodes[r].label)
            .collect();
        // Pair rhs edges with lhs edges they structurally keep: identical
        // interface endpoints, orientation and label expression.
        let mut kept_edges = Vec::new();
        let mut lhs_used = vec![false; instance.lhs_edges.len()];
        for (r, re) in instance.rhs_edges.iter().enumerate() {
            let (Some(ls), Some(lt)) = (instance.lhs_of_rhs(re.src), instance.lhs_of_rhs(re.tgt))
            else {
                continue;
            };
            let partner = instance.lhs_edges.iter().enumerate().position(|(l, le)| {
                !lhs_used[l] && le.src == ls && le.tgt == lt && le.label.as_expr() == re.label
            });
            if let Some(l) = partner {
                lhs_used[l] = true;
                kept_edges.push((l, r));
            }
        }
        let dropped_lhs_edges = (0..instance.lhs_edges.len())
            .filter(|l| !lhs_used[*l])
            .collect();
        let created_rhs_edges = (0..instance.rhs_edges.len())
            .filter(|r| !kept_edges.iter().any(|(_, kr)| kr == r))
            .collect();
        CompiledInstance {
            instance,
            plan,
            deleted_lhs,
            created_rhs,
            label_kept,
            kept_edges,
            dropped_lhs_edges,
            created_rhs_edges,
        }
    }

    pub fn deletes_nodes(&self) -> bool {
        !self.deleted_lhs.is_empty()
    }
}

/// Anchor preference: concrete coloured marks are the most selective,
/// then unmarked, then the mark wildcard. Only true roots anchor.
fn anchor_rank(node: &RuleNode<LabelPattern>) -> Option<u8> {
    if node.root != RootPattern::Yes {
        return None;
    }
    Some(match node.mark {
        NodeMarkPattern::Is(crate::host::NodeMark::None) => 1,
        NodeMarkPattern::Is(_) => 0,
        NodeMarkPattern::Any => 2,
    })
}

/// Plans the search most-selective-first: edges whose endpoints are both
/// known only need checking; marked edges usually have few host
/// candidates; root anchors come from the registry; unmarked extensions
/// go last. Avoids enumerating broad candidate sets under narrow ones.
fn build_plan(instance: &RuleInstance) -> Vec<PlanStep> {
    let n_nodes = instance.lhs_nodes.len();
    let n_edges = instance.lhs_edges.len();
    let mut plan = Vec::with_capacity(n_nodes + n_edges);
    let mut node_bound = vec![false; n_nodes];
    let mut edge_bound = vec![false; n_edges];

    while node_bound.iter().any(|b| !b) || edge_bound.iter().any(|b| !b) {
        let mut check = None;
        let mut marked_extend = None;
        let mut plain_extend = None;
        for (i, e) in instance.lhs_edges.iter().enumerate() {
            if edge_bound[i] {
                continue;
            }
            let (sb, tb) = (node_bound[e.src], node_bound[e.tgt]);
            if sb && tb {
                if check.is_none() {
                    check = Some(i);
                }
                continue;
            }
            let ext = if sb {
                Some((i, e.src, e.tgt, Dir::Forward))
            } else if tb {
                Some((i, e.tgt, e.src, Dir::Backward))
            } else {
                None
            };
            if let Some(ext) = ext {
                if e.mark != crate::host::EdgeMark::None {
                    if marked_extend.is_none() {
                        marked_extend = Some(ext);
                    }
                } else if plain_extend.is_none() {
                    plain_extend = Some(ext);
                }
            }
        }
        let anchor = (0..n_nodes)
            .filter(|&i| !node_bound[i])
            .filter_map(|i| anchor_rank(&instance.lhs_nodes[i]).map(|rank| (rank, i)))
            .min()
            .map(|(_, i)| i);

        if let Some(edge) = check {
            plan.push(PlanStep::CheckEdge { edge });
            edge_bound[edge] = true;
        } else if let Some((edge, from, to, dir)) = marked_extend {
            plan.push(PlanStep::Extend { edge, from, to, dir });
            node_bound[to] = true;
            edge_bound[edge] = true;
        } else if let Some(a) = anchor {
            plan.push(PlanStep::Anchor { node: a });
            node_bound[a] = true;
        } else if let Some((edge, from, to, dir)) = plain_extend {
            plan.push(PlanStep::Extend { edge, from, to, dir });
            node_bound[to] = true;
            edge_bound[edge] = true;
        } else {
            let next = (0..n_nodes).find(|i| !node_bound[*i]).expect("unbound node");
            plan.push(PlanStep::Scan { node: next });
            node_bound[next] = true;
        }
    }
    plan
}

/// Search state shared across the recursion.
struct Search<'a> {
    ci: &'a CompiledInstance,
    graph: &'a HostGraph,
    nodes: Vec<Option<NodeId>>,
    edges: Vec<Option<EdgeId>>,
    bindings: Bindings,
    rng: Option<&'a mut ChaCha8Rng>,
    /// Host nodes inspected, recorded when instrumentation is on.
    visited: Option<&'a mut Vec<NodeId>>,
}

/// Variables freshly bound by one pattern, as a bitmask over var ids
/// (rules carry at most a handful of variables).
type FreshVars = u32;

fn unbind_mask(bindings: &mut Bindings, mask: FreshVars) {
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        bindings[v] = None;
        m &= m - 1;
    }
}

fn pattern_vars(pattern: &LabelPattern) -> impl Iterator<Item = VarId> + '_ {
    pattern.0.iter().filter_map(|i| match i {
        crate::rule::PatternItem::IntVar(v) | crate::rule::PatternItem::ListVar(v) => Some(*v),
        crate::rule::PatternItem::Lit(_) => None,
    })
}

impl<'a> Search<'a> {
    /// Tries to match one lhs node against a host node, extending bindings.
    /// Returns the variables freshly bound (to undo on backtrack), or None.
    fn match_node(&mut self, lhs: usize, host: NodeId) -> Option<FreshVars> {
        if let Some(v) = self.visited.as_deref_mut() {
            v.push(host);
        }
        // Injectivity on nodes.
        if self.nodes.iter().flatten().any(|&h| h == host) {
            return None;
        }
        let pat = &self.ci.instance.lhs_nodes[lhs];
        let node = self.graph.node(host).expect("candidate exists");
        match pat.root {
            RootPattern::Yes if !node.root => return None,
            RootPattern::No if node.root => return None,
            _ => {}
        }
        if let NodeMarkPattern::Is(m) = pat.mark {
            if node.mark != m {
                return None;
            }
        }
        let mut fresh: FreshVars = 0;
        for v in pattern_vars(&pat.label) {
            if self.bindings[v].is_none() {
                fresh |= 1 << v;
            }
        }
        if match_label(&pat.label, &node.label, &mut self.bindings) {
            Some(fresh)
        } else {
            unbind_mask(&mut self.bindings, fresh);
            None
        }
    }

    fn match_edge_only(&mut self, lhs_edge: usize, host: EdgeId) -> Option<FreshVars> {
        if self.edges.iter().flatten().any(|&h| h == host) {
            return None;
        }
        let pat = &self.ci.instance.lhs_edges[lhs_edge];
        let edge = self.graph.edge(host).expect("candidate exists");
        if edge.mark != pat.mark {
            return None;
        }
        let mut fresh: FreshVars = 0;
        for v in pattern_vars(&pat.label) {
            if self.bindings[v].is_none() {
                fresh |= 1 << v;
            }
        }
        if match_label(&pat.label, &edge.label, &mut self.bindings) {
            Some(fresh)
        } else {
            unbind_mask(&mut self.bindings, fresh);
            None
        }
    }

    fn try_edge(&mut self, depth: usize, edge: usize, bind_to: Option<(usize, Dir)>, he: EdgeId) -> bool {
        let Some(edge_vars) = self.match_edge_only(edge, he) else {
            return false;
        };
        match bind_to {
            Some((to, dir)) => {
                let host_edge = self.graph.edge(he).expect("exists");
                let other = match dir {
                    Dir::Forward => host_edge.target,
                    Dir::Backward => host_edge.source,
                };
                if let Some(node_vars) = self.match_node(to, other) {
                    self.nodes[to] = Some(other);
                    self.edges[edge] = Some(he);
                    if self.run(depth + 1) {
                        return true;
                    }
                    self.nodes[to] = None;
                    self.edges[edge] = None;
                    unbind_mask(&mut self.bindings, node_vars);
                }
            }
            None => {
                self.edges[edge] = Some(he);
                if self.run(depth + 1) {
                    return true;
                }
                self.edges[edge] = None;
            }
        }
        unbind_mask(&mut self.bindings, edge_vars);
        false
    }

    fn run(&mut self, depth: usize) -> bool {
        let Some(step) = self.ci.plan.get(depth) else {
            return self.finish();
        };
        match *step {
            PlanStep::Anchor { node } => {
                if self.rng.is_some() {
                    let mut candidates: Vec<NodeId> = match self.ci.instance.lhs_nodes[node].mark {
                        NodeMarkPattern::Is(m) => self.graph.roots_by_mark(m).to_vec(),
                        NodeMarkPattern::Any => self.graph.all_roots().collect(),
                    };
                    candidates.shuffle(self.rng.as_deref_mut().unwrap());
                    return self.try_node_candidates(&candidates, depth, node);
                }
                match self.ci.instance.lhs_nodes[node].mark {
                    NodeMarkPattern::Is(m) => {
                        let len = self.graph.roots_by_mark(m).len();
                        for idx in 0..len {
                            let h = self.graph.roots_by_mark(m)[idx];
                            if self.try_node(depth, node, h) {
                                return true;
                            }
                        }
                    }
                    NodeMarkPattern::Any => {
                        for m in crate::host::NodeMark::ALL {
                            let len = self.graph.roots_by_mark(m).len();
                            for idx in 0..len {
                                let h = self.graph.roots_by_mark(m)[idx];
                                if self.try_node(depth, node, h) {
                                    return true;
                                }
                            }
                        }
                    }
                }
                false
            }
            PlanStep::Scan { node } => {
                if self.rng.is_some() {
                    let mut candidates: Vec<NodeId> = self.graph.nodes().map(|n| n.id).collect();
                    candidates.shuffle(self.rng.as_deref_mut().unwrap());
                    return self.try_node_candidates(&candidates, depth, node);
                }
                let ids: Vec<NodeId> = self.graph.nodes().map(|n| n.id).collect();
                self.try_node_candidates(&ids, depth, node)
            }
            PlanStep::Extend { edge, from, to, dir } => {
                let host_from = self.nodes[from].expect("plan order");
                if self.rng.is_some() {
                    let mut candidates: Vec<EdgeId> = match dir {
                        Dir::Forward => self.graph.out_edges(host_from).to_vec(),
                        Dir::Backward => self.graph.in_edges(host_from).to_vec(),
                    };
                    candidates.shuffle(self.rng.as_deref_mut().unwrap());
                    for he in candidates {
                        if self.try_edge(depth, edge, Some((to, dir)), he) {
                            return true;
                        }
                    }
                    return false;
                }
                let len = match dir {
                    Dir::Forward => self.graph.out_edges(host_from).len(),
                    Dir::Backward => self.graph.in_edges(host_from).len(),
                };
                for idx in 0..len {
                    let he = match dir {
                        Dir::Forward => self.graph.out_edges(host_from)[idx],
                        Dir::Backward => self.graph.in_edges(host_from)[idx],
                    };
                    if self.try_edge(depth, edge, Some((to, dir)), he) {
                        return true;
                    }
                }
                false
            }
            PlanStep::CheckEdge { edge } => {
                let e = &self.ci.instance.lhs_edges[edge];
                let hs = self.nodes[e.src].expect("plan order");
                let ht = self.nodes[e.tgt].expect("plan order");
                let is_loop = e.src == e.tgt;
                if self.rng.is_some() {
                    let mut candidates: Vec<EdgeId> = if is_loop {
                        self.graph.loop_edges(hs).to_vec()
                    } else {
                        self.graph
                            .out_edges(hs)
                            .iter()
                            .copied()
                            .filter(|&he| self.graph.edge(he).expect("exists").target == ht)
                            .collect()
                    };
                    candidates.shuffle(self.rng.as_deref_mut().unwrap());
                    for he in candidates {
                        if self.try_edge(depth, edge, None, he) {
                            return true;
                        }
                    }
                    return false;
                }
                let len = if is_loop {
                    self.graph.loop_edges(hs).len()
                } else {
                    self.graph.out_edges(hs).len()
                };
                for idx in 0..len {
                    let he = if is_loop {
                        self.graph.loop_edges(hs)[idx]
                    } else {
                        let he = self.graph.out_edges(hs)[idx];
                        if self.graph.edge(he).expect("exists").target != ht {
                            continue;
                        }
                        he
                    };
                    if self.try_edge(depth, edge, None, he) {
                        return true;
                    }
                }
                false
            }
        }
    }

    fn try_node(&mut self, depth: usize, node: usize, h: NodeId) -> bool {
        if let Some(vars) = self.match_node(node, h) {
            self.nodes[node] = Some(h);
            if self.run(depth + 1) {
                return true;
            }
            self.nodes[node] = None;
            unbind_mask(&mut self.bindings, vars);
        }
        false
    }

    fn try_node_candidates(&mut self, candidates: &[NodeId], depth: usize, node: usize) -> bool {
        for &h in candidates {
            if self.try_node(depth, node, h) {
                return true;
            }
        }
        false
    }

    /// All structure bound: condition and dangling decide.
    fn finish(&mut self) -> bool {
        if !eval_condition(&self.ci.instance.condition, &self.bindings) {
            return false;
        }
        for &l in &self.ci.deleted_lhs {
            let host = self.nodes[l].expect("complete assignment");
            let inside = |e: &EdgeId| self.edges.iter().flatten().any(|&m| m == *e);
            let ok = self.graph.out_edges(host).iter().all(inside)
                && self.graph.in_edges(host).iter().all(inside)
                && self.graph.loop_edges(host).iter().all(inside);
            if !ok {
                return false;
            }
        }
        true
    }
}

/// Reusable search buffers; one per execution context avoids
/// per-attempt allocation.
#[derive(Debug, Default)]
pub struct MatchScratch {
    nodes: Vec<Option<NodeId>>,
    edges: Vec<Option<EdgeId>>,
    bindings: Bindings,
}

impl MatchScratch {
    fn reset(&mut self, ci: &CompiledInstance) {
        self.nodes.clear();
        self.nodes.resize(ci.instance.lhs_nodes.len(), None);
        self.edges.clear();
        self.edges.resize(ci.instance.lhs_edges.len(), None);
        self.bindings.clear();
        self.bindings.resize(ci.instance.vars.len(), None);
    }
}

/// Finds the first match of `ci` in `graph` under deterministic order, or
/// shuffled candidate order when `rng` is given. The dangling condition
/// and the rule condition hold for any returned match.
pub fn find_match(
    ci: &CompiledInstance,
    graph: &HostGraph,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<Match> {
    find_match_inner(ci, graph, rng, None, &mut MatchScratch::default())
}

/// As [`find_match`] with caller-owned buffers, for hot loops.
pub fn find_match_with(
    ci: &CompiledInstance,
    graph: &HostGraph,
    rng: Option<&mut ChaCha8Rng>,
    scratch: &mut MatchScratch,
) -> Option<Match> {
    find_match_inner(ci, graph, rng, None, scratch)
}

/// As [`find_match`], also recording every host node inspected (one entry
/// per inspection) for locality checks.
pub fn find_match_instrumented(
    ci: &CompiledInstance,
    graph: &HostGraph,
    rng: Option<&mut ChaCha8Rng>,
    visited: &mut Vec<NodeId>,
) -> Option<Match> {
    find_match_inner(ci, graph, rng, Some(visited), &mut MatchScratch::default())
}

fn find_match_inner(
    ci: &CompiledInstance,
    graph: &HostGraph,
    rng: Option<&mut ChaCha8Rng>,
    visited: Option<&mut Vec<NodeId>>,
    scratch: &mut MatchScratch,
) -> Option<Match> {
    scratch.reset(ci);
    let mut search = Search {
        ci,
        graph,
        nodes: std::mem::take(&mut scratch.nodes),
        edges: std::mem::take(&mut scratch.edges),
        bindings: std::mem::take(&mut scratch.bindings),
        rng,
        visited,
    };
    let found = if search.run(0) {
        Some(Match {
            nodes: search.nodes.iter().map(|n| n.unwrap()).collect(),
            edges: search.edges.iter().map(|e| e.unwrap()).collect(),
            bindings: search.bindings.clone(),
        })
    } else {
        None
    };
    scratch.nodes = search.nodes;
    scratch.edges = search.edges;
    scratch.bindings = search.bindings;
    found
}

/// The dangling condition: nodes about to be deleted must have no incident
/// edges outside the matched image.
pub fn check_dangling(ci: &CompiledInstance, mat: &Match, graph: &HostGraph) -> bool {
    dangling_ok(ci, mat, graph)
}

fn dangling_ok(ci: &CompiledInstance, mat: &Match, graph: &HostGraph) -> bool {
    for &l in &ci.deleted_lhs {
        let host = mat.nodes[l];
        let all_inside = graph
            .out_edges(host)
            .iter()
            .chain(graph.in_edges(host))
            .chain(graph.loop_edges(host))
            .all(|e| mat.edges.contains(e));
        if !all_inside {
            return false;
        }
    }
    true
}

/// Applies a validated match: matched edges are deleted, non-interface
/// matched nodes are deleted, interface nodes are relabelled / remarked /
/// re-rooted per the right-hand side, and right-hand nodes and edges are
/// created with evaluated labels. A matched edge that the right-hand side
/// reproduces exactly (same kept endpoints, orientation and label) stays
/// in place with only its mark adjusted.
pub fn apply(ci: &CompiledInstance, mat: &Match, graph: &mut HostGraph) {
    let inst = &ci.instance;

    for &(l, r) in &ci.kept_edges {
        let host = mat.edges[l];
        let want = inst.rhs_edges[r].mark;
        if graph.edge(host).expect("kept edge exists").mark != want {
            graph.set_edge_mark(host, want).expect("edge exists");
        }
    }
    for &l in &ci.dropped_lhs_edges {
        graph.remove_edge(mat.edges[l]).expect("matched edge exists");
    }
    for &l in &ci.deleted_lhs {
        graph
            .remove_node(mat.nodes[l])
            .expect("dangling condition checked");
    }

    for (pos, &(l, r)) in inst.interface.iter().enumerate() {
        let host = mat.nodes[l];
        let rhs = &inst.rhs_nodes[r];
        if !ci.label_kept[pos] {
            let new_label = eval_label(&rhs.label, &mat.bindings);
            let current = graph.node(host).expect("interface node kept");
            if current.label != new_label {
                graph.set_node_label(host, new_label).expect("node exists");
            }
        }
        if let NodeMarkPattern::Is(m) = rhs.mark {
            if graph.node(host).unwrap().mark != m {
                graph.set_node_mark(host, m).expect("node exists");
            }
        }
        match rhs.root {
            RootPattern::Yes => {
                if !graph.node(host).unwrap().root {
                    graph.set_root(host, true).expect("node exists");
                }
            }
            RootPattern::No => {
                if graph.node(host).unwrap().root {
                    graph.set_root(host, false).expect("node exists");
                }
            }
            // Wildcard on both sides: the host flag stays as matched.
            RootPattern::Any => {}
        }
    }

    // Created nodes, then edges; rhs endpoints map through the interface
    // for kept nodes.
    let mut rhs_host: Vec<Option<NodeId>> = vec![None; inst.rhs_nodes.len()];
    for &(l, r) in &inst.interface {
        rhs_host[r] = Some(mat.nodes[l]);
    }
    for &r in &ci.created_rhs {
        let rhs = &inst.rhs_nodes[r];
        let label = eval_label(&rhs.label, &mat.bindings);
        let NodeMarkPattern::Is(mark) = rhs.mark else {
            unreachable!("validated: no wildcard on created nodes");
        };
        let root = matches!(rhs.root, RootPattern::Yes);
        rhs_host[r] = Some(graph.add_node(label, mark, root));
    }
    for &r in &ci.created_rhs_edges {
        let e = &inst.rhs_edges[r];
        let src = rhs_host[e.src].expect("endpoint placed");
        let tgt = rhs_host[e.tgt].expect("endpoint placed");
        let label = eval_label(&e.label, &mat.bindings);
        graph
            .add_edge(src, tgt, label, e.mark)
            .expect("endpoints exist");
    }
}

/// Checks that a match is a valid morphism: structure-preserving,
/// injective, label/mark/root-compatible, with condition and dangling
/// satisfied. Used by tests and debug assertions.
pub fn verify_match(ci: &CompiledInstance, mat: &Match, graph: &HostGraph) -> Result<(), String> {
    let inst = &ci.instance;
    if mat.nodes.len() != inst.lhs_nodes.len() || mat.edges.len() != inst.lhs_edges.len() {
        return Err("length mismatch".into());
    }
    for (i, &a) in mat.nodes.iter().enumerate() {
        for &b in &mat.nodes[i + 1..] {
            if a == b {
                return Err(format!("node map not injective at {a}"));
            }
        }
    }
    for (i, &a) in mat.edges.iter().enumerate() {
        for &b in &mat.edges[i + 1..] {
            if a == b {
                return Err(format!("edge map not injective at {a}"));
            }
        }
    }
    let mut bindings: Bindings = vec![None; inst.vars.len()];
    for (l, &host) in mat.nodes.iter().enumerate() {
        let pat = &inst.lhs_nodes[l];
        let node = graph.node(host).ok_or("host node missing")?;
        match pat.root {
            RootPattern::Yes if !node.root => return Err(format!("{host} should be a root")),
            RootPattern::No if node.root => return Err(format!("{host} should not be a root")),
            _ => {}
        }
        if let NodeMarkPattern::Is(m) = pat.mark {
            if node.mark != m {
                return Err(format!("mark mismatch on {host}"));
            }
        }
        if !match_label(&pat.label, &node.label, &mut bindings) {
            return Err(format!("label mismatch on {host}"));
        }
    }
    for (i, &he) in mat.edges.iter().enumerate() {
        let pat = &inst.lhs_edges[i];
        let edge = graph.edge(he).ok_or("host edge missing")?;
        if edge.source != mat.nodes[pat.src] || edge.target != mat.nodes[pat.tgt] {
            return Err(format!("edge {he} does not commute"));
        }
        if edge.mark != pat.mark {
            return Err(format!("edge mark mismatch on {he}"));
        }
        if !match_label(&pat.label, &edge.label, &mut bindings) {
            return Err(format!("edge label mismatch on {he}"));
        }
    }
    if !eval_condition(&inst.condition, &bindings) {
        return Err("condition fails".into());
    }
    if !dangling_ok(ci, mat, graph) {
        return Err("dangling condition fails".into());
    }
    Ok(())
}

/// Exhaustive matcher used as a test oracle. Enumerates every injective
/// node map and every compatible edge choice directly on the instance
/// data, independent of the plan machinery above.
pub fn brute_force_matches(ci: &CompiledInstance, graph: &HostGraph) -> Vec<Match> {
    let host_nodes: Vec<NodeId> = graph.nodes().map(|n| n.id).collect();
    let mut results = Vec::new();
    let mut node_map: Vec<Option<NodeId>> = vec![None; ci.instance.lhs_nodes.len()];
    brute_nodes(ci, graph, &host_nodes, &mut node_map, 0, &mut results);
    results
}

fn brute_nodes(
    ci: &CompiledInstance,
    graph: &HostGraph,
    host_nodes: &[NodeId],
    node_map: &mut Vec<Option<NodeId>>,
    next: usize,
    results: &mut Vec<Match>,
) {
    let inst = &ci.instance;
    if next == inst.lhs_nodes.len() {
        let nodes: Vec<NodeId> = node_map.iter().map(|n| n.unwrap()).collect();
        let mut bindings: Bindings = vec![None; inst.vars.len()];
        for (l, &host) in nodes.iter().enumerate() {
            let pat = &inst.lhs_nodes[l];
            let node = graph.node(host).unwrap();
            match pat.root {
                RootPattern::Yes if !node.root => return,
                RootPattern::No if node.root => return,
                _ => {}
            }
            if let NodeMarkPattern::Is(m) = pat.mark {
                if node.mark != m {
                    return;
                }
            }
            if !match_label(&pat.label, &node.label, &mut bindings) {
                return;
            }
        }
        let mut edge_map: Vec<Option<EdgeId>> = vec![None; inst.lhs_edges.len()];
        brute_edges(ci, graph, &nodes, &mut edge_map, &mut bindings, 0, results);
        return;
    }
    for &h in host_nodes {
        if node_map.iter().flatten().any(|&u| u == h) {
            continue;
        }
        node_map[next] = Some(h);
        brute_nodes(ci, graph, host_nodes, node_map, next + 1, results);
        node_map[next] = None;
    }
}

fn brute_edges(
    ci: &CompiledInstance,
    graph: &HostGraph,
    nodes: &[NodeId],
    edge_map: &mut Vec<Option<EdgeId>>,
    bindings: &mut Bindings,
    next: usize,
    results: &mut Vec<Match>,
) {
    let inst = &ci.instance;
    if next == inst.lhs_edges.len() {
        if !eval_condition(&inst.condition, bindings) {
            return;
        }
        let mat = Match {
            nodes: nodes.to_vec(),
            edges: edge_map.iter().map(|e| e.unwrap()).collect(),
            bindings: bindings.clone(),
        };
        if dangling_ok(ci, &mat, graph) {
            results.push(mat);
        }
        return;
    }
    let pat = &inst.lhs_edges[next];
    let (hs, ht) = (nodes[pat.src], nodes[pat.tgt]);
    let candidates: Vec<EdgeId> = graph
        .edges()
        .filter(|e| e.source == hs && e.target == ht)
        .map(|e| e.id)
        .collect();
    for he in candidates {
        if edge_map.iter().flatten().any(|&u| u == he) {
            continue;
        }
        let edge = graph.edge(he).unwrap();
        if edge.mark != pat.mark {
            continue;
        }
        let before = bindings.clone();
        if match_label(&pat.label, &edge.label, bindings) {
            edge_map[next] = Some(he);
            brute_edges(ci, graph, nodes, edge_map, bindings, next + 1, results);
            edge_map[next] = None;
        }
        *bindings = before;
    }
}
