//! The `mst-boruvka` graph program, plus input validation, result
//! extraction and end-state checking around it.
//!
//! The program text ships as `programs/mst-boruvka.gpt` and is embedded
//! here; [`mst_boruvka_program`] parses it and [`run_mst`] executes it on
//! a validated input. After a successful run the blue edges of the result
//! are a minimum spanning tree of the input, every input node is red, and
//! one auxiliary root labelled 1 (the pointer) remains with a single red
//! edge.

use thiserror::Error;

use crate::host::{EdgeId, EdgeMark, HostGraph, Label, NodeId, NodeMark};
use crate::interp::{execute, load, ExecOptions, ExecStats, LoadedProgram, Outcome, Program};
use crate::oracle::{is_connected, UnionFind};
use crate::text::parse_program;

/// The program source, the corpus copy of `programs/mst-boruvka.gpt`.
pub const MST_BORUVKA_SOURCE: &str = include_str!("../programs/mst-boruvka.gpt");

/// Parses the shipped program text.
pub fn mst_boruvka_program() -> Program {
    parse_program(MST_BORUVKA_SOURCE).expect("shipped program parses")
}

/// Parses, validates and compiles the shipped program.
pub fn mst_boruvka_loaded() -> LoadedProgram {
    load(&mst_boruvka_program()).expect("shipped program loads")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MstError {
    #[error("input graph is not connected")]
    Disconnected,
    #[error("input is not in program form: {0}")]
    MalformedInput(String),
    #[error("program failed on the input")]
    Failed,
    #[error("program hit the step limit")]
    Limit,
}

/// A successful run's result.
#[derive(Debug, Clone)]
pub struct MstResult {
    pub graph: HostGraph,
    /// Blue edges of the result graph: the spanning tree.
    pub mst_edge_ids: Vec<EdgeId>,
    pub total_weight: i64,
    /// The surviving auxiliary root (the pointer).
    pub cursor_node_id: NodeId,
    pub stats: ExecStats,
}

/// Checks the program's input contract: unlabelled unmarked non-root
/// nodes, unmarked single-integer edges, connected.
pub fn validate_input(input: &HostGraph) -> Result<(), MstError> {
    for n in input.nodes() {
        if !n.label.is_empty() {
            return Err(MstError::MalformedInput(format!("node {} is labelled", n.id)));
        }
        if n.mark != NodeMark::None {
            return Err(MstError::MalformedInput(format!("node {} is marked", n.id)));
        }
        if n.root {
            return Err(MstError::MalformedInput(format!("node {} is a root", n.id)));
        }
    }
    for e in input.edges() {
        if e.mark != EdgeMark::None {
            return Err(MstError::MalformedInput(format!("edge {} is marked", e.id)));
        }
        if e.label.as_int().is_none() {
            return Err(MstError::MalformedInput(format!(
                "edge {} does not carry a single integer weight",
                e.id
            )));
        }
    }
    if !is_connected(input) {
        return Err(MstError::Disconnected);
    }
    Ok(())
}

/// Runs the program on a validated input.
pub fn run_mst(input: &HostGraph, seed: Option<u64>) -> Result<MstResult, MstError> {
    run_mst_with(&mst_boruvka_loaded(), input, &ExecOptions { seed, ..ExecOptions::default() })
}

/// As [`run_mst`] with a pre-loaded program and explicit options, for
/// benchmark loops that reuse the compiled program.
pub fn run_mst_with(
    program: &LoadedProgram,
    input: &HostGraph,
    options: &ExecOptions,
) -> Result<MstResult, MstError> {
    validate_input(input)?;
    let (outcome, stats) = execute(program, input, options);
    let graph = match outcome {
        Outcome::Success(g) => g,
        Outcome::Fail => return Err(MstError::Failed),
        Outcome::Limit => return Err(MstError::Limit),
    };
    let mst_edge_ids: Vec<EdgeId> = graph
        .edges()
        .filter(|e| e.mark == EdgeMark::Blue)
        .map(|e| e.id)
        .collect();
    let total_weight = mst_edge_ids
        .iter()
        .map(|&e| graph.edge(e).unwrap().label.as_int().unwrap_or(0))
        .sum();
    let roots: Vec<NodeId> = graph.all_roots().collect();
    let cursor_node_id = match roots.as_slice() {
        [only] => *only,
        _ => return Err(MstError::Failed),
    };
    Ok(MstResult {
        graph,
        mst_edge_ids,
        total_weight,
        cursor_node_id,
        stats,
    })
}

/// Checks every end-state requirement; returns the violations found
/// (empty means a clean final state).
pub fn validate_end_state(input: &HostGraph, result: &HostGraph) -> Vec<String> {
    let mut violations = Vec::new();
    let mut complain = |msg: String| violations.push(msg);

    if result.node_count() != input.node_count() + 1 {
        complain(format!(
            "node count: expected input+1 = {}, found {}",
            input.node_count() + 1,
            result.node_count()
        ));
    }
    if result.edge_count() != input.edge_count() + 1 {
        complain(format!(
            "edge count: expected input+1 = {}, found {}",
            input.edge_count() + 1,
            result.edge_count()
        ));
    }

    // Exactly one root: the pointer, unmarked, labelled 1, with one
    // outgoing red edge and nothing else incident.
    let roots: Vec<NodeId> = result.all_roots().collect();
    let cursor = match roots.as_slice() {
        [only] => Some(*only),
        other => {
            complain(format!("root count: expected 1, found {}", other.len()));
            None
        }
    };
    if let Some(c) = cursor {
        let node = result.node(c).unwrap();
        if node.mark != NodeMark::None {
            complain(format!("pointer {} is marked", c));
        }
        if node.label != Label::int(1) {
            complain(format!("pointer label: expected 1, found {}", node.label));
        }
        let out = result.out_edges(c);
        let ok_shape = out.len() == 1
            && result.in_edges(c).is_empty()
            && result.loop_edges(c).is_empty()
            && result.edge(out[0]).unwrap().mark == EdgeMark::Red;
        if !ok_shape {
            complain(format!("pointer {} is not a single red out-edge node", c));
        }
    }

    // Marks: nodes red except the pointer; edges blue or unmarked except
    // the pointer's red edge; no green, grey or dashed anywhere.
    for n in result.nodes() {
        if Some(n.id) == cursor {
            continue;
        }
        if n.mark != NodeMark::Red {
            complain(format!("node {} should be red, is {:?}", n.id, n.mark));
        }
        if let Some(input_node) = input.node(n.id) {
            if n.label != input_node.label {
                complain(format!("node {} label changed", n.id));
            }
        } else {
            complain(format!("node {} does not exist in the input", n.id));
        }
    }
    let mut red_edges = 0;
    for e in result.edges() {
        match e.mark {
            EdgeMark::Blue | EdgeMark::None => {}
            EdgeMark::Red => red_edges += 1,
            other => complain(format!("edge {} carries a leftover {:?} mark", e.id, other)),
        }
        if e.label.0.len() == 2 && e.label.0.last() == Some(&crate::host::Atom::Int(0)) {
            complain(format!("edge {} keeps a trailing 0 marker: {}", e.id, e.label));
        }
    }
    if red_edges != 1 {
        complain(format!("red edge count: expected 1 (the pointer's), found {red_edges}"));
    }

    // The result minus the pointer and its edge must be the input up to
    // node marks and blue edge marks: same endpoints and weights.
    let mut expected: Vec<(NodeId, NodeId, &Label)> = input
        .edges()
        .map(|e| (e.source, e.target, &e.label))
        .collect();
    for e in result.edges() {
        if e.mark == EdgeMark::Red {
            continue;
        }
        let key = (e.source, e.target, &e.label);
        match expected.iter().position(|x| *x == key) {
            Some(pos) => {
                expected.swap_remove(pos);
            }
            None => complain(format!(
                "edge {} ({} -> {}, {}) does not correspond to an input edge",
                e.id, e.source, e.target, e.label
            )),
        }
    }
    for (s, t, l) in expected {
        complain(format!("input edge {} -> {} ({}) is missing from the result", s, t, l));
    }

    // The blue edges form a spanning tree of the input nodes.
    let blue: Vec<(NodeId, NodeId)> = result
        .edges()
        .filter(|e| e.mark == EdgeMark::Blue)
        .map(|e| (e.source, e.target))
        .collect();
    let n = input.node_count();
    if blue.len() + 1 != n {
        complain(format!(
            "blue edge count: expected n-1 = {}, found {}",
            n.saturating_sub(1),
            blue.len()
        ));
    } else {
        let ids: Vec<u32> = input.nodes().map(|x| x.id.0).collect();
        let dense = |id: u32| ids.iter().position(|&x| x == id);
        let mut uf = UnionFind::new(n);
        let mut ok = true;
        for (s, t) in &blue {
            match (dense(s.0), dense(t.0)) {
                (Some(a), Some(b)) => {
                    if !uf.union(a, b) {
                        ok = false;
                    }
                }
                _ => ok = false,
            }
        }
        if !ok {
            complain("blue subgraph is not a spanning tree".into());
        }
    }

    violations
}

/// Maps the result's blue edges back onto input edge ids by endpoints and
/// weight. Rules delete and recreate every edge they match, so result
/// edge ids differ from the input's; endpoints and labels survive.
/// Returns None if some blue edge has no distinct input counterpart.
pub fn blue_edges_as_input_ids(input: &HostGraph, result: &MstResult) -> Option<Vec<EdgeId>> {
    let mut available: Vec<EdgeId> = input.edges().map(|e| e.id).collect();
    let mut mapped = Vec::with_capacity(result.mst_edge_ids.len());
    for &blue in &result.mst_edge_ids {
        let b = result.graph.edge(blue)?;
        let pos = available.iter().position(|&cand| {
            let e = input.edge(cand).expect("input edge");
            e.source == b.source && e.target == b.target && e.label == b.label
        })?;
        mapped.push(available.swap_remove(pos));
    }
    Some(mapped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::Atom;
    use crate::interp::Command;
    use crate::rule::CmpOp;

    #[test]
    fn program_parses_and_loads() {
        let program = mst_boruvka_program();
        assert_eq!(program.rules.len(), 51);
        let loaded = mst_boruvka_loaded();
        assert_eq!(loaded.rule_count(), 51);
    }

    #[test]
    fn rule_inventory() {
        let program = mst_boruvka_program();
        let names: Vec<&str> = program.rules.iter().map(|r| r.name.as_str()).collect();
        for expected in [
            "one_tree", "root_current", "next_tree", "unroot_red",
            "pre_init", "pre_forward1", "pre_forward2", "pre_back",
            "find_init", "create_flag", "set_flag", "flag", "destroy_flag",
            "find_forward", "find_back", "min_init1", "min_init2",
            "min1_st", "min2_st",
            "min", "min_n", "min_p", "min_np",
            "min_s", "min_sn", "min_sp", "min_snp",
            "min_t", "min_tn", "min_tp", "min_tnp",
            "grow_init", "down", "add_edge", "up", "next_root", "previous_root",
            "blue_init", "blue_forward", "blue_back",
            "red_init", "red_forward", "red_back",
            "select_min",
            "clean", "red_loop", "add_loop",
            "remove_mid", "remove_top", "remove_bottom", "keep",
        ] {
            assert!(names.contains(&expected), "missing rule {expected}");
        }
        assert_eq!(names.len(), 51);
    }

    #[test]
    fn strict_inequality_discipline() {
        // Only the n-without-p minimisation rules accept ties.
        let program = mst_boruvka_program();
        for rule in &program.rules {
            if !rule.name.starts_with("min") {
                continue;
            }
            if matches!(rule.name.as_str(), "min_init1" | "min_init2") {
                assert!(rule.condition.is_trivial(), "{} has a condition", rule.name);
                continue;
            }
            let ops: Vec<CmpOp> = rule.condition.0.iter().map(|(op, _, _)| *op).collect();
            let expected = match rule.name.as_str() {
                "min_n" | "min_sn" | "min_tn" => CmpOp::Le,
                _ => CmpOp::Lt,
            };
            assert_eq!(ops, vec![expected], "condition of {}", rule.name);
        }
    }

    #[test]
    fn bidirectional_expansion_counts() {
        let loaded = mst_boruvka_loaded();
        let counts = |name: &str| loaded.instances_of(name).unwrap().len();
        assert_eq!(counts("one_tree"), 1);
        assert_eq!(counts("pre_forward1"), 2);
        assert_eq!(counts("min_init2"), 2);
        assert_eq!(counts("min1_st"), 2);
        assert_eq!(counts("min_s"), 4);
        assert_eq!(counts("min_snp"), 4);
        assert_eq!(counts("min"), 4);
        assert_eq!(counts("select_min"), 2);
        assert_eq!(counts("clean"), 2);
        assert_eq!(counts("remove_mid"), 1);
    }

    #[test]
    fn control_structure() {
        let program = mst_boruvka_program();
        let body = |name: &str| &program.procedure(name).unwrap().body;
        assert_eq!(
            *body("Body"),
            Command::Seq(vec![
                Command::Loop(Box::new(Command::Call("TreesLoop".into()))),
                Command::Call("GrowForest".into()),
                Command::Loop(Box::new(Command::Call("Rewind".into()))),
            ])
        );
        // Already-selected edges take priority in minimisation.
        assert_eq!(
            *body("Minimise"),
            Command::Try(
                Box::new(Command::Call("MinWithN".into())),
                Box::new(Command::Skip),
                Box::new(Command::Call("MinWithoutN".into())),
            )
        );
        assert_eq!(
            *body("Main"),
            Command::Seq(vec![
                Command::Call("Preprocess".into()),
                Command::Loop(Box::new(Command::Call("Loop".into()))),
            ])
        );
    }

    fn unweighted_input(n: usize, edges: &[(usize, usize, i64)]) -> HostGraph {
        let nodes = vec![(Label::empty(), NodeMark::None, false); n];
        let edges: Vec<_> = edges
            .iter()
            .map(|&(a, b, w)| (a, b, Label::int(w), EdgeMark::None))
            .collect();
        HostGraph::build(&nodes, &edges).unwrap()
    }

    #[test]
    fn single_node() {
        let input = unweighted_input(1, &[]);
        let result = run_mst(&input, None).unwrap();
        assert_eq!(result.mst_edge_ids.len(), 0);
        assert_eq!(result.total_weight, 0);
        let cursor = result.graph.node(result.cursor_node_id).unwrap();
        assert_eq!(cursor.label, Label::int(1));
        assert_eq!(validate_end_state(&input, &result.graph), Vec::<String>::new());
    }

    #[test]
    fn two_nodes_single_edge() {
        let input = unweighted_input(2, &[(0, 1, 7)]);
        let result = run_mst(&input, None).unwrap();
        assert_eq!(result.mst_edge_ids.len(), 1);
        assert_eq!(result.total_weight, 7);
        assert_eq!(validate_end_state(&input, &result.graph), Vec::<String>::new());
    }

    #[test]
    fn four_cycle_drops_heaviest() {
        let input = unweighted_input(4, &[(0, 1, 5), (1, 2, 1), (2, 3, 2), (3, 0, 4)]);
        let result = run_mst(&input, None).unwrap();
        assert_eq!(result.total_weight, 7);
        assert_eq!(validate_end_state(&input, &result.graph), Vec::<String>::new());
    }

    #[test]
    fn triangle_with_equal_weights() {
        // Equal weights force the tie-accepting n-rules; the output must
        // still be a tree.
        let input = unweighted_input(3, &[(0, 1, 4), (1, 2, 4), (0, 2, 4)]);
        let result = run_mst(&input, None).unwrap();
        assert_eq!(result.total_weight, 8);
        assert_eq!(validate_end_state(&input, &result.graph), Vec::<String>::new());
    }

    #[test]
    fn parallel_edges_and_loops() {
        let input = unweighted_input(2, &[(0, 1, 9), (0, 1, 3), (1, 0, 5), (0, 0, 2)]);
        let result = run_mst(&input, None).unwrap();
        assert_eq!(result.total_weight, 3);
        assert_eq!(validate_end_state(&input, &result.graph), Vec::<String>::new());
    }

    #[test]
    fn disconnected_rejected() {
        let input = unweighted_input(3, &[(0, 1, 1)]);
        assert!(matches!(run_mst(&input, None), Err(MstError::Disconnected)));
    }

    #[test]
    fn malformed_inputs_rejected() {
        let mut marked = unweighted_input(2, &[(0, 1, 1)]);
        marked.set_node_mark(NodeId(0), NodeMark::Red).unwrap();
        assert!(matches!(run_mst(&marked, None), Err(MstError::MalformedInput(_))));

        let nodes = vec![(Label::empty(), NodeMark::None, false); 2];
        let bad_label = HostGraph::build(
            &nodes,
            &[(0, 1, Label(vec![Atom::Int(1), Atom::Int(2)]), EdgeMark::None)],
        )
        .unwrap();
        assert!(matches!(run_mst(&bad_label, None), Err(MstError::MalformedInput(_))));
    }

    #[test]
    fn end_state_validator_catches_corruption() {
        let input = unweighted_input(2, &[(0, 1, 7)]);
        let result = run_mst(&input, None).unwrap();

        let mut green = result.graph.clone();
        let e = green.edges().next().unwrap().id;
        green.set_edge_mark(e, EdgeMark::Green).unwrap();
        assert!(validate_end_state(&input, &green)
            .iter()
            .any(|v| v.contains("Green")));

        let mut two_roots = result.graph.clone();
        two_roots.set_root(NodeId(0), true).unwrap();
        assert!(validate_end_state(&input, &two_roots)
            .iter()
            .any(|v| v.contains("root count")));
    }
}
