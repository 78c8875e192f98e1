//! Conditional rules: pattern graphs over typed variables, label
//! expressions, integer conditions, and the expansion of bidirectional
//! edges into fully directed rule instances.
//!
//! A rule is written once with possibly bidirectional edges; `compile`
//! orients every bidirectional edge both ways, yielding `2^b` directed
//! instances. A bidirectional edge appearing on both sides (same interface
//! endpoints) takes the same orientation in both, so "kept" edges never
//! flip under application.

use std::fmt;

use thiserror::Error;

use crate::host::{Atom, EdgeMark, Label, NodeMark};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Int,
    List,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub ty: VarType,
}

/// Index into a rule's variable table.
pub type VarId = usize;

/// A value bound to a variable during matching.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    List(Vec<Atom>),
}

/// Variable bindings, indexed by [`VarId`].
pub type Bindings = Vec<Option<Value>>;

/// One item of a left-hand-side label pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternItem {
    Lit(Atom),
    IntVar(VarId),
    ListVar(VarId),
}

/// An ordered label pattern; at most one list variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelPattern(pub Vec<PatternItem>);

/// An integer expression usable in labels and conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntExpr {
    Lit(i64),
    Var(VarId),
    /// variable plus a (possibly negative) constant, e.g. `i-1`.
    AddConst(VarId, i64),
    AddVar(VarId, VarId),
}

/// One item of a right-hand-side label expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprItem {
    Lit(Atom),
    /// A list variable; splices its bound atoms.
    ListVar(VarId),
    Int(IntExpr),
}

/// An ordered label expression; evaluates by concatenation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelExpr(pub Vec<ExprItem>);

impl LabelPattern {
    /// The same pattern read as an expression (used for unchanged labels).
    pub fn as_expr(&self) -> LabelExpr {
        LabelExpr(
            self.0
                .iter()
                .map(|item| match item {
                    PatternItem::Lit(a) => ExprItem::Lit(a.clone()),
                    PatternItem::IntVar(v) => ExprItem::Int(IntExpr::Var(*v)),
                    PatternItem::ListVar(v) => ExprItem::ListVar(*v),
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeMarkPattern {
    Is(NodeMark),
    /// Matches any mark; on the right-hand side keeps the matched mark.
    Any,
}

/// Root requirement on a rule node. `Any` matches either and keeps the
/// host flag when used on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootPattern {
    No,
    Yes,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Directed,
    Bidirectional,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleNode<L> {
    /// Declared local id, used by the text format and error messages.
    pub local: u32,
    pub label: L,
    pub mark: NodeMarkPattern,
    pub root: RootPattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleEdge<L> {
    /// Endpoint indices into the owning graph's node vector.
    pub src: usize,
    pub tgt: usize,
    pub orient: Orientation,
    pub label: L,
    pub mark: EdgeMark,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleGraph<L> {
    pub nodes: Vec<RuleNode<L>>,
    pub edges: Vec<RuleEdge<L>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        };
        f.write_str(s)
    }
}

/// Rule application condition: a conjunction of integer comparisons.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Condition(pub Vec<(CmpOp, IntExpr, IntExpr)>);

impl Condition {
    pub fn is_trivial(&self) -> bool {
        self.0.is_empty()
    }
}

/// A conditional rule as declared: left/right pattern graphs over shared
/// variables, an interface of kept nodes, and a condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub vars: Vec<Variable>,
    pub lhs: RuleGraph<LabelPattern>,
    pub rhs: RuleGraph<LabelExpr>,
    /// Pairs of (lhs node index, rhs node index) that survive application.
    pub interface: Vec<(usize, usize)>,
    pub condition: Condition,
}

/// A fully directed edge of a compiled instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceEdge<L> {
    pub src: usize,
    pub tgt: usize,
    pub label: L,
    pub mark: EdgeMark,
}

/// One directed instance of a rule: every bidirectional edge has been
/// given an orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule_name: String,
    /// Index of this orientation combination within the rule's instance set.
    pub variant: usize,
    pub vars: Vec<Variable>,
    pub lhs_nodes: Vec<RuleNode<LabelPattern>>,
    pub lhs_edges: Vec<InstanceEdge<LabelPattern>>,
    pub rhs_nodes: Vec<RuleNode<LabelExpr>>,
    pub rhs_edges: Vec<InstanceEdge<LabelExpr>>,
    /// lhs node index -> rhs node index for kept nodes.
    pub interface: Vec<(usize, usize)>,
    pub condition: Condition,
}

impl RuleInstance {
    /// rhs node index of an interface lhs node, if kept.
    pub fn rhs_of_lhs(&self, lhs_idx: usize) -> Option<usize> {
        self.interface
            .iter()
            .find(|(l, _)| *l == lhs_idx)
            .map(|(_, r)| *r)
    }

    pub fn lhs_of_rhs(&self, rhs_idx: usize) -> Option<usize> {
        self.interface
            .iter()
            .find(|(_, r)| *r == rhs_idx)
            .map(|(l, _)| *l)
    }
}

/// The directed instances of one rule, in lexicographic orientation order
/// (first bidirectional edge varies slowest; "as declared" before
/// "reversed").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstanceSet {
    pub rule_name: String,
    pub instances: Vec<RuleInstance>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule {rule}: variable {var} is not bound by the left-hand side")]
    UnboundVariable { rule: String, var: String },
    #[error("rule {rule}: more than one list variable in a label pattern")]
    MultipleListVars { rule: String },
    #[error("rule {rule}: duplicate interface entry for node {node}")]
    DuplicateInterface { rule: String, node: u32 },
    #[error("rule {rule}: interface references unknown node {node}")]
    UnknownInterfaceNode { rule: String, node: u32 },
    #[error("rule {rule}: parallel bidirectional edges between nodes {a} and {b}")]
    ParallelBidirectional { rule: String, a: u32, b: u32 },
    #[error("rule {rule}: wildcard on created node {node}")]
    WildcardOnCreatedNode { rule: String, node: u32 },
    #[error("rule {rule}: right-hand wildcard on node {node} without a matching left-hand wildcard")]
    WildcardMismatch { rule: String, node: u32 },
    #[error("rule {rule}: bidirectional right-hand edge between {a} and {b} has no left-hand counterpart")]
    DanglingBidirectional { rule: String, a: u32, b: u32 },
}

impl Rule {
    /// Validates the rule and expands bidirectional edges into directed
    /// instances.
    pub fn compile(&self) -> Result<RuleInstanceSet, RuleError> {
        self.validate()?;

        let lhs_bidir: Vec<usize> = self
            .lhs
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.orient == Orientation::Bidirectional && e.src != e.tgt)
            .map(|(i, _)| i)
            .collect();

        let count = 1usize << lhs_bidir.len();
        let mut instances = Vec::with_capacity(count);
        for variant in 0..count {
            // Bit i of `variant` flips the i-th bidirectional edge; bit 0 is
            // the first declared one, and variants are emitted in increasing
            // numeric order, i.e. lexicographic in orientation choices.
            let mut flipped = vec![false; self.lhs.edges.len()];
            for (bit, &edge_idx) in lhs_bidir.iter().enumerate() {
                // Reverse original declaration order into the high bits so
                // the first edge varies slowest.
                let shift = lhs_bidir.len() - 1 - bit;
                flipped[edge_idx] = (variant >> shift) & 1 == 1;
            }

            let lhs_edges: Vec<InstanceEdge<LabelPattern>> = self
                .lhs
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let (src, tgt) = if flipped[i] { (e.tgt, e.src) } else { (e.src, e.tgt) };
                    InstanceEdge {
                        src,
                        tgt,
                        label: e.label.clone(),
                        mark: e.mark,
                    }
                })
                .collect();

            let rhs_edges: Vec<InstanceEdge<LabelExpr>> = self
                .rhs
                .edges
                .iter()
                .map(|e| {
                    let flip = if e.orient == Orientation::Bidirectional && e.src != e.tgt {
                        let li = self
                            .lhs_partner_of_rhs_bidir(e)
                            .expect("validated: partner exists");
                        flipped[li]
                    } else {
                        false
                    };
                    let (src, tgt) = if flip { (e.tgt, e.src) } else { (e.src, e.tgt) };
                    InstanceEdge {
                        src,
                        tgt,
                        label: e.label.clone(),
                        mark: e.mark,
                    }
                })
                .collect();

            instances.push(RuleInstance {
                rule_name: self.name.clone(),
                variant,
                vars: self.vars.clone(),
                lhs_nodes: self.lhs.nodes.clone(),
                lhs_edges,
                rhs_nodes: self.rhs.nodes.clone(),
                rhs_edges,
                interface: self.interface.clone(),
                condition: self.condition.clone(),
            });
        }

        Ok(RuleInstanceSet {
            rule_name: self.name.clone(),
            instances,
        })
    }

    /// The lhs bidirectional edge matching an rhs bidirectional edge: same
    /// endpoint pair under the interface correspondence.
    fn lhs_partner_of_rhs_bidir(&self, rhs_edge: &RuleEdge<LabelExpr>) -> Option<usize> {
        let ls = self.lhs_of_rhs(rhs_edge.src)?;
        let lt = self.lhs_of_rhs(rhs_edge.tgt)?;
        self.lhs.edges.iter().position(|e| {
            e.orient == Orientation::Bidirectional
                && ((e.src == ls && e.tgt == lt) || (e.src == lt && e.tgt == ls))
        })
    }

    fn lhs_of_rhs(&self, rhs_idx: usize) -> Option<usize> {
        self.interface
            .iter()
            .find(|(_, r)| *r == rhs_idx)
            .map(|(l, _)| *l)
    }

    fn validate(&self) -> Result<(), RuleError> {
        let err_rule = || self.name.clone();

        // Interface pairs unique on both sides and in range.
        for (i, &(l, r)) in self.interface.iter().enumerate() {
            if l >= self.lhs.nodes.len() || r >= self.rhs.nodes.len() {
                return Err(RuleError::UnknownInterfaceNode {
                    rule: err_rule(),
                    node: self
                        .lhs
                        .nodes
                        .get(l)
                        .map(|n| n.local)
                        .unwrap_or(l as u32),
                });
            }
            for &(l2, r2) in &self.interface[i + 1..] {
                if l == l2 || r == r2 {
                    return Err(RuleError::DuplicateInterface {
                        rule: err_rule(),
                        node: self.lhs.nodes[l].local,
                    });
                }
            }
        }

        // At most one list variable per pattern; variables bound by the LHS.
        let mut bound = vec![false; self.vars.len()];
        let mut check_pattern = |p: &LabelPattern| -> Result<(), RuleError> {
            let mut lists = 0;
            for item in &p.0 {
                match item {
                    PatternItem::IntVar(v) => bound[*v] = true,
                    PatternItem::ListVar(v) => {
                        bound[*v] = true;
                        lists += 1;
                    }
                    PatternItem::Lit(_) => {}
                }
            }
            if lists > 1 {
                return Err(RuleError::MultipleListVars { rule: self.name.clone() });
            }
            Ok(())
        };
        for n in &self.lhs.nodes {
            check_pattern(&n.label)?;
        }
        for e in &self.lhs.edges {
            check_pattern(&e.label)?;
        }

        let check_int = |expr: &IntExpr, bound: &[bool]| -> Result<(), RuleError> {
            let vars: Vec<VarId> = match expr {
                IntExpr::Lit(_) => vec![],
                IntExpr::Var(v) | IntExpr::AddConst(v, _) => vec![*v],
                IntExpr::AddVar(a, b) => vec![*a, *b],
            };
            for v in vars {
                if !bound[v] {
                    return Err(RuleError::UnboundVariable {
                        rule: self.name.clone(),
                        var: self.vars[v].name.clone(),
                    });
                }
            }
            Ok(())
        };
        let check_expr = |e: &LabelExpr, bound: &[bool]| -> Result<(), RuleError> {
            for item in &e.0 {
                match item {
                    ExprItem::Lit(_) => {}
                    ExprItem::ListVar(v) => {
                        if !bound[*v] {
                            return Err(RuleError::UnboundVariable {
                                rule: self.name.clone(),
                                var: self.vars[*v].name.clone(),
                            });
                        }
                    }
                    ExprItem::Int(ix) => check_int(ix, bound)?,
                }
            }
            Ok(())
        };
        for n in &self.rhs.nodes {
            check_expr(&n.label, &bound)?;
        }
        for e in &self.rhs.edges {
            check_expr(&e.label, &bound)?;
        }
        for (_, a, b) in &self.condition.0 {
            check_int(a, &bound)?;
            check_int(b, &bound)?;
        }

        // Wildcards: created nodes take concrete marks and flags; an rhs
        // wildcard must sit on an interface node whose lhs side is also a
        // wildcard (meaning "keep what was matched").
        for (ri, n) in self.rhs.nodes.iter().enumerate() {
            let kept = self.lhs_of_rhs(ri);
            if kept.is_none() && (n.mark == NodeMarkPattern::Any || n.root == RootPattern::Any) {
                return Err(RuleError::WildcardOnCreatedNode {
                    rule: err_rule(),
                    node: n.local,
                });
            }
            if let Some(li) = kept {
                let l = &self.lhs.nodes[li];
                if n.mark == NodeMarkPattern::Any && l.mark != NodeMarkPattern::Any {
                    return Err(RuleError::WildcardMismatch {
                        rule: err_rule(),
                        node: n.local,
                    });
                }
                if n.root == RootPattern::Any && l.root != RootPattern::Any {
                    return Err(RuleError::WildcardMismatch {
                        rule: err_rule(),
                        node: n.local,
                    });
                }
            }
        }

        // Parallel bidirectional edges are rejected: with indistinguishable
        // copies the application result would not be unique.
        for side_edges in [
            self.lhs
                .edges
                .iter()
                .map(|e| (e.src, e.tgt, e.orient, self.lhs.nodes[e.src].local, self.lhs.nodes[e.tgt].local))
                .collect::<Vec<_>>(),
            self.rhs
                .edges
                .iter()
                .map(|e| (e.src, e.tgt, e.orient, self.rhs.nodes[e.src].local, self.rhs.nodes[e.tgt].local))
                .collect::<Vec<_>>(),
        ] {
            for (i, &(s1, t1, o1, la, lb)) in side_edges.iter().enumerate() {
                if o1 != Orientation::Bidirectional {
                    continue;
                }
                for &(s2, t2, o2, ..) in &side_edges[i + 1..] {
                    if o2 == Orientation::Bidirectional
                        && ((s1 == s2 && t1 == t2) || (s1 == t2 && t1 == s2))
                    {
                        return Err(RuleError::ParallelBidirectional {
                            rule: err_rule(),
                            a: la,
                            b: lb,
                        });
                    }
                }
            }
        }

        // Every rhs bidirectional edge needs an lhs partner to take its
        // orientation from.
        for e in &self.rhs.edges {
            if e.orient == Orientation::Bidirectional
                && e.src != e.tgt
                && self.lhs_partner_of_rhs_bidir(e).is_none()
            {
                return Err(RuleError::DanglingBidirectional {
                    rule: err_rule(),
                    a: self.rhs.nodes[e.src].local,
                    b: self.rhs.nodes[e.tgt].local,
                });
            }
        }

        Ok(())
    }
}

/// Extends `bindings` so that `pattern` matches `label`, or reports
/// no-match. Previously bound variables must agree.
pub fn match_label(pattern: &LabelPattern, label: &Label, bindings: &mut Bindings) -> bool {
    let items = &pattern.0;
    let atoms = &label.0;
    let list_pos = items
        .iter()
        .position(|i| matches!(i, PatternItem::ListVar(_)));

    match list_pos {
        None => {
            if items.len() != atoms.len() {
                return false;
            }
            items
                .iter()
                .zip(atoms.iter())
                .all(|(item, atom)| match_item(item, atom, bindings))
        }
        Some(p) => {
            let fixed = items.len() - 1;
            if atoms.len() < fixed {
                return false;
            }
            let suffix_len = items.len() - 1 - p;
            let mid_end = atoms.len() - suffix_len;
            for (item, atom) in items[..p].iter().zip(&atoms[..p]) {
                if !match_item(item, atom, bindings) {
                    return false;
                }
            }
            for (item, atom) in items[p + 1..].iter().zip(&atoms[mid_end..]) {
                if !match_item(item, atom, bindings) {
                    return false;
                }
            }
            let PatternItem::ListVar(v) = items[p] else {
                unreachable!()
            };
            let mid = atoms[p..mid_end].to_vec();
            match &bindings[v] {
                Some(Value::List(prev)) => *prev == mid,
                Some(Value::Int(_)) => false,
                None => {
                    bindings[v] = Some(Value::List(mid));
                    true
                }
            }
        }
    }
}

fn match_item(item: &PatternItem, atom: &Atom, bindings: &mut Bindings) -> bool {
    match item {
        PatternItem::Lit(lit) => lit == atom,
        PatternItem::IntVar(v) => match atom {
            Atom::Int(i) => match &bindings[*v] {
                Some(Value::Int(prev)) => prev == i,
                Some(Value::List(_)) => false,
                None => {
                    bindings[*v] = Some(Value::Int(*i));
                    true
                }
            },
            Atom::Str(_) => false,
        },
        PatternItem::ListVar(_) => unreachable!("handled by match_label"),
    }
}

/// Evaluates an integer expression under complete bindings.
pub fn eval_int(expr: &IntExpr, bindings: &Bindings) -> i64 {
    let var = |v: VarId| -> i64 {
        match bindings[v].as_ref().expect("variable bound") {
            Value::Int(i) => *i,
            Value::List(_) => panic!("int expression over a list variable"),
        }
    };
    match expr {
        IntExpr::Lit(c) => *c,
        IntExpr::Var(v) => var(*v),
        IntExpr::AddConst(v, c) => var(*v) + c,
        IntExpr::AddVar(a, b) => var(*a) + var(*b),
    }
}

/// Evaluates a label expression under complete bindings.
pub fn eval_label(expr: &LabelExpr, bindings: &Bindings) -> Label {
    let mut atoms = Vec::new();
    for item in &expr.0 {
        match item {
            ExprItem::Lit(a) => atoms.push(a.clone()),
            ExprItem::ListVar(v) => match bindings[*v].as_ref().expect("variable bound") {
                Value::List(list) => atoms.extend(list.iter().cloned()),
                Value::Int(i) => atoms.push(Atom::Int(*i)),
            },
            ExprItem::Int(ix) => atoms.push(Atom::Int(eval_int(ix, bindings))),
        }
    }
    Label(atoms)
}

/// Evaluates a condition under complete bindings.
pub fn eval_condition(cond: &Condition, bindings: &Bindings) -> bool {
    cond.0.iter().all(|(op, a, b)| {
        let (a, b) = (eval_int(a, bindings), eval_int(b, bindings));
        match op {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    })
}
