//! Program execution: rule-set calls, sequencing, `if`/`try`, loops with
//! `break`, `skip`, and non-recursive procedures, under copy/rollback
//! semantics backed by graph snapshots.
//!
//! Failure of a command propagates to the nearest construct with rollback
//! semantics: a loop iteration rolls back and ends the loop, an `if`/`try`
//! condition rolls back and selects the else branch. `break` unwinds to the
//! innermost enclosing loop and keeps the current graph.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thiserror::Error;

use crate::host::{EdgeMark, HostGraph, Label, NodeMark};
use crate::matcher::{apply, find_match_with, CompiledInstance, MatchScratch};
use crate::rule::{Rule, RuleError};

/// A control command over rule and procedure names, as parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Call of a rule set `{r1, ..., rn}`; a bare rule call is a singleton.
    RuleSet(Vec<String>),
    /// Call of a procedure by name. Until `load` resolves names, a parser
    /// cannot tell procedure calls from rule calls, so it emits `Call` for
    /// every bare identifier and `load` reclassifies.
    Call(String),
    Seq(Vec<Command>),
    If(Box<Command>, Box<Command>, Box<Command>),
    Try(Box<Command>, Box<Command>, Box<Command>),
    Loop(Box<Command>),
    Break,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub body: Command,
}

/// A program as declared: rules, procedures, and a `Main` procedure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub procedures: Vec<Procedure>,
}

impl Program {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("duplicate declaration of {0}")]
    DuplicateName(String),
    #[error("undefined rule or procedure {0}")]
    Undefined(String),
    #[error("no Main procedure declared")]
    NoMain,
    #[error("procedures are recursive through {0}")]
    Recursive(String),
    #[error("break in a condition position")]
    BreakInCondition,
    #[error("break outside any loop")]
    BreakOutsideLoop,
    #[error("empty rule set call")]
    EmptyRuleSet,
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Command with names resolved to table indices.
#[derive(Debug, Clone)]
enum Cmd {
    RuleSet(Vec<usize>),
    Call(usize),
    Seq(Vec<Cmd>),
    If(Box<Cmd>, Box<Cmd>, Box<Cmd>),
    Try(Box<Cmd>, Box<Cmd>, Box<Cmd>),
    Loop(Box<Cmd>),
    Break,
    Skip,
}

#[derive(Debug)]
struct LoadedRule {
    name: String,
    instances: Vec<CompiledInstance>,
}

#[derive(Debug)]
struct LoadedProc {
    name: String,
    body: Cmd,
}

/// A validated program with compiled rule instances, ready to execute.
#[derive(Debug)]
pub struct LoadedProgram {
    rules: Vec<LoadedRule>,
    procs: Vec<LoadedProc>,
    main: usize,
}

impl LoadedProgram {
    pub fn rule_names(&self) -> impl Iterator<Item = &str> {
        self.rules.iter().map(|r| r.name.as_str())
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn instance_count(&self) -> usize {
        self.rules.iter().map(|r| r.instances.len()).sum()
    }

    /// Compiled instances of one rule, for tests that drive the matcher
    /// directly.
    pub fn instances_of(&self, rule: &str) -> Option<&[CompiledInstance]> {
        self.rules
            .iter()
            .find(|r| r.name == rule)
            .map(|r| r.instances.as_slice())
    }

    pub fn all_instances(&self) -> impl Iterator<Item = &CompiledInstance> {
        self.rules.iter().flat_map(|r| r.instances.iter())
    }
}

/// Validates a program and compiles every rule: names resolved, procedure
/// call graph acyclic, break placement checked, bidirectional edges
/// expanded.
pub fn load(program: &Program) -> Result<LoadedProgram, LoadError> {
    let mut names: HashMap<&str, ()> = HashMap::new();
    for r in &program.rules {
        if names.insert(&r.name, ()).is_some() {
            return Err(LoadError::DuplicateName(r.name.clone()));
        }
    }
    for p in &program.procedures {
        if names.insert(&p.name, ()).is_some() {
            return Err(LoadError::DuplicateName(p.name.clone()));
        }
    }

    let rule_idx: HashMap<&str, usize> = program
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.name.as_str(), i))
        .collect();
    let proc_idx: HashMap<&str, usize> = program
        .procedures
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), i))
        .collect();

    fn resolve(
        cmd: &Command,
        rule_idx: &HashMap<&str, usize>,
        proc_idx: &HashMap<&str, usize>,
    ) -> Result<Cmd, LoadError> {
        Ok(match cmd {
            Command::RuleSet(rules) => {
                if rules.is_empty() {
                    return Err(LoadError::EmptyRuleSet);
                }
                let mut ids = Vec::with_capacity(rules.len());
                for r in rules {
                    ids.push(
                        *rule_idx
                            .get(r.as_str())
                            .ok_or_else(|| LoadError::Undefined(r.clone()))?,
                    );
                }
                Cmd::RuleSet(ids)
            }
            Command::Call(name) => {
                if let Some(&r) = rule_idx.get(name.as_str()) {
                    Cmd::RuleSet(vec![r])
                } else if let Some(&p) = proc_idx.get(name.as_str()) {
                    Cmd::Call(p)
                } else {
                    return Err(LoadError::Undefined(name.clone()));
                }
            }
            Command::Seq(cmds) => Cmd::Seq(
                cmds.iter()
                    .map(|c| resolve(c, rule_idx, proc_idx))
                    .collect::<Result<_, _>>()?,
            ),
            Command::If(c, p, q) => Cmd::If(
                Box::new(resolve(c, rule_idx, proc_idx)?),
                Box::new(resolve(p, rule_idx, proc_idx)?),
                Box::new(resolve(q, rule_idx, proc_idx)?),
            ),
            Command::Try(c, p, q) => Cmd::Try(
                Box::new(resolve(c, rule_idx, proc_idx)?),
                Box::new(resolve(p, rule_idx, proc_idx)?),
                Box::new(resolve(q, rule_idx, proc_idx)?),
            ),
            Command::Loop(b) => Cmd::Loop(Box::new(resolve(b, rule_idx, proc_idx)?)),
            Command::Break => Cmd::Break,
            Command::Skip => Cmd::Skip,
        })
    }

    let mut procs = Vec::with_capacity(program.procedures.len());
    for p in &program.procedures {
        procs.push(LoadedProc {
            name: p.name.clone(),
            body: resolve(&p.body, &rule_idx, &proc_idx)?,
        });
    }

    let main = proc_idx.get("Main").copied().ok_or(LoadError::NoMain)?;

    // Recursion check over the procedure call graph.
    fn calls(cmd: &Cmd, out: &mut Vec<usize>) {
        match cmd {
            Cmd::Call(p) => out.push(*p),
            Cmd::Seq(cs) => cs.iter().for_each(|c| calls(c, out)),
            Cmd::If(a, b, c) | Cmd::Try(a, b, c) => {
                calls(a, out);
                calls(b, out);
                calls(c, out);
            }
            Cmd::Loop(b) => calls(b, out),
            Cmd::RuleSet(_) | Cmd::Break | Cmd::Skip => {}
        }
    }
    // 0 = unvisited, 1 = on stack, 2 = done.
    let mut state = vec![0u8; procs.len()];
    fn dfs(p: usize, procs: &[LoadedProc], state: &mut [u8]) -> Result<(), LoadError> {
        match state[p] {
            1 => return Err(LoadError::Recursive(procs[p].name.clone())),
            2 => return Ok(()),
            _ => {}
        }
        state[p] = 1;
        let mut callees = Vec::new();
        calls(&procs[p].body, &mut callees);
        for c in callees {
            dfs(c, procs, state)?;
        }
        state[p] = 2;
        Ok(())
    }
    for p in 0..procs.len() {
        dfs(p, &procs, &mut state)?;
    }

    // Break placement, checked through the (acyclic) call expansion:
    // a break must sit under some loop, and conditions reset loop scope.
    fn check_breaks(cmd: &Cmd, in_loop: bool, in_cond: bool, procs: &[LoadedProc]) -> Result<(), LoadError> {
        match cmd {
            Cmd::Break => {
                if in_loop {
                    Ok(())
                } else if in_cond {
                    Err(LoadError::BreakInCondition)
                } else {
                    Err(LoadError::BreakOutsideLoop)
                }
            }
            Cmd::Seq(cs) => {
                for c in cs {
                    check_breaks(c, in_loop, in_cond, procs)?;
                }
                Ok(())
            }
            Cmd::If(c, p, q) | Cmd::Try(c, p, q) => {
                check_breaks(c, false, true, procs)?;
                check_breaks(p, in_loop, in_cond, procs)?;
                check_breaks(q, in_loop, in_cond, procs)
            }
            Cmd::Loop(b) => check_breaks(b, true, in_cond, procs),
            Cmd::Call(p) => check_breaks(&procs[*p].body, in_loop, in_cond, procs),
            Cmd::RuleSet(_) | Cmd::Skip => Ok(()),
        }
    }
    check_breaks(&procs[main].body, false, false, &procs)?;

    let mut rules = Vec::with_capacity(program.rules.len());
    for r in &program.rules {
        let set = r.compile()?;
        rules.push(LoadedRule {
            name: r.name.clone(),
            instances: set.instances.into_iter().map(CompiledInstance::new).collect(),
        });
    }

    Ok(LoadedProgram { rules, procs, main })
}

/// Result of executing a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Success(HostGraph),
    /// The program failed; the input graph is unchanged (execution works on
    /// an internal copy).
    Fail,
    /// The step budget ran out; treated as divergence.
    Limit,
}

impl Outcome {
    pub fn success(self) -> Option<HostGraph> {
        match self {
            Outcome::Success(g) => Some(g),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExecOptions {
    /// Shuffles rule-set order and matcher candidate order when set.
    pub seed: Option<u64>,
    /// Budget of rule applications plus loop iterations; exhausting it
    /// yields [`Outcome::Limit`].
    pub step_limit: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            seed: None,
            step_limit: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExecStats {
    pub applications: u64,
    pub match_attempts: u64,
    /// Applications per rule, aligned with the program's rule order.
    pub per_rule: Vec<(String, u64)>,
    pub wall: Duration,
}

/// Where a phase event fired relative to its procedure call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasePoint {
    Entry,
    Exit,
}

/// Counts of everything a phase invariant might want to eyeball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub roots: usize,
    pub node_marks: [usize; 5],
    pub edge_marks: [usize; 5],
    /// Label of the unique unmarked root, when there is exactly one.
    pub cursor_label: Option<Label>,
}

impl GraphSummary {
    pub fn of(graph: &HostGraph) -> Self {
        let mut node_marks = [0usize; 5];
        for n in graph.nodes() {
            node_marks[n.mark.index()] += 1;
        }
        let mut edge_marks = [0usize; 5];
        for e in graph.edges() {
            let i = EdgeMark::ALL.iter().position(|m| *m == e.mark).unwrap();
            edge_marks[i] += 1;
        }
        let unmarked_roots = graph.roots_by_mark(NodeMark::None);
        let cursor_label = match unmarked_roots {
            [only] => graph.node(*only).map(|n| n.label.clone()),
            _ => None,
        };
        GraphSummary {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            roots: graph.root_count(),
            node_marks,
            edge_marks,
            cursor_label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseEvent {
    pub phase: String,
    pub point: PhasePoint,
    pub summary: GraphSummary,
}

enum Flow {
    Ok,
    Fail,
    Break,
}

struct LimitReached;

struct ExecCtx<'a, F: FnMut(&str, PhasePoint, &HostGraph)> {
    prog: &'a LoadedProgram,
    graph: &'a mut HostGraph,
    stats: &'a mut ExecStats,
    rng: Option<ChaCha8Rng>,
    budget: u64,
    observer: Option<&'a mut F>,
    marked: Vec<bool>,
    scratch: MatchScratch,
}

impl<F: FnMut(&str, PhasePoint, &HostGraph)> ExecCtx<'_, F> {
    fn spend(&mut self) -> Result<(), LimitReached> {
        if self.budget == 0 {
            return Err(LimitReached);
        }
        self.budget -= 1;
        Ok(())
    }

    fn exec(&mut self, cmd: &Cmd) -> Result<Flow, LimitReached> {
        match cmd {
            Cmd::Skip => Ok(Flow::Ok),
            Cmd::Break => Ok(Flow::Break),
            Cmd::RuleSet(rules) => self.rule_set(rules),
            Cmd::Call(p) => {
                let fire = self.marked[*p];
                if fire {
                    if let Some(obs) = self.observer.as_mut() {
                        obs(&self.prog.procs[*p].name, PhasePoint::Entry, self.graph);
                    }
                }
                let flow = self.exec(&self.prog.procs[*p].body)?;
                if fire {
                    if let Some(obs) = self.observer.as_mut() {
                        obs(&self.prog.procs[*p].name, PhasePoint::Exit, self.graph);
                    }
                }
                Ok(flow)
            }
            Cmd::Seq(cmds) => {
                for c in cmds {
                    match self.exec(c)? {
                        Flow::Ok => {}
                        other => return Ok(other),
                    }
                }
                Ok(Flow::Ok)
            }
            Cmd::If(c, p, q) => {
                let snap = self.graph.snapshot();
                let cond = self.exec(c)?;
                self.graph.restore(snap).expect("stack discipline");
                match cond {
                    Flow::Ok => self.exec(p),
                    Flow::Fail => self.exec(q),
                    Flow::Break => unreachable!("validated: no break in conditions"),
                }
            }
            Cmd::Try(c, p, q) => {
                let snap = self.graph.snapshot();
                match self.exec(c)? {
                    Flow::Ok => {
                        self.graph.release(snap).expect("stack discipline");
                        self.exec(p)
                    }
                    Flow::Fail => {
                        self.graph.restore(snap).expect("stack discipline");
                        self.exec(q)
                    }
                    Flow::Break => unreachable!("validated: no break in conditions"),
                }
            }
            Cmd::Loop(body) => {
                loop {
                    self.spend()?;
                    let snap = self.graph.snapshot();
                    match self.exec(body)? {
                        Flow::Ok => {
                            self.graph.release(snap).expect("stack discipline");
                        }
                        Flow::Fail => {
                            self.graph.restore(snap).expect("stack discipline");
                            return Ok(Flow::Ok);
                        }
                        Flow::Break => {
                            self.graph.release(snap).expect("stack discipline");
                            return Ok(Flow::Ok);
                        }
                    }
                }
            }
        }
    }

    fn rule_set(&mut self, rules: &[usize]) -> Result<Flow, LimitReached> {
        // Candidates are (rule, instance) pairs in declaration and
        // orientation order; a seed shuffles the pool instead.
        let try_one = |ctx: &mut Self, rule: usize, inst: usize| -> Result<bool, LimitReached> {
            ctx.stats.match_attempts += 1;
            let ci = &ctx.prog.rules[rule].instances[inst];
            let found = find_match_with(ci, ctx.graph, ctx.rng.as_mut(), &mut ctx.scratch);
            if let Some(mat) = found {
                ctx.spend()?;
                apply(ci, &mat, ctx.graph);
                ctx.stats.applications += 1;
                ctx.stats.per_rule[rule].1 += 1;
                return Ok(true);
            }
            Ok(false)
        };

        if self.rng.is_some() {
            let mut pool: Vec<(usize, usize)> = rules
                .iter()
                .flat_map(|&r| (0..self.prog.rules[r].instances.len()).map(move |i| (r, i)))
                .collect();
            use rand::seq::SliceRandom;
            pool.shuffle(self.rng.as_mut().unwrap());
            for (r, i) in pool {
                if try_one(self, r, i)? {
                    return Ok(Flow::Ok);
                }
            }
        } else {
            for &r in rules {
                for i in 0..self.prog.rules[r].instances.len() {
                    if try_one(self, r, i)? {
                        return Ok(Flow::Ok);
                    }
                }
            }
        }
        Ok(Flow::Fail)
    }
}

fn run<F: FnMut(&str, PhasePoint, &HostGraph)>(
    prog: &LoadedProgram,
    input: &HostGraph,
    options: &ExecOptions,
    observer: Option<&mut F>,
    markers: &[&str],
) -> (Outcome, ExecStats) {
    let mut work = input.clone();
    work.clear_history();
    let mut stats = ExecStats {
        per_rule: prog.rules.iter().map(|r| (r.name.clone(), 0)).collect(),
        ..ExecStats::default()
    };
    let marked = prog
        .procs
        .iter()
        .map(|p| markers.contains(&p.name.as_str()))
        .collect();
    let start = Instant::now();
    let flow = {
        let mut ctx = ExecCtx {
            prog,
            graph: &mut work,
            stats: &mut stats,
            rng: options.seed.map(ChaCha8Rng::seed_from_u64),
            budget: options.step_limit,
            observer,
            marked,
            scratch: MatchScratch::default(),
        };
        let main = &prog.procs[prog.main].body;
        ctx.exec(main)
    };
    stats.wall = start.elapsed();
    let outcome = match flow {
        Ok(Flow::Ok) => {
            work.clear_history();
            Outcome::Success(work)
        }
        Ok(Flow::Fail) => Outcome::Fail,
        Ok(Flow::Break) => unreachable!("validated: break inside loops only"),
        Err(LimitReached) => Outcome::Limit,
    };
    (outcome, stats)
}

/// Observer type for plain runs; never called.
type NoObserver = fn(&str, PhasePoint, &HostGraph);

/// Executes a loaded program on (a copy of) the input graph.
pub fn execute(
    prog: &LoadedProgram,
    input: &HostGraph,
    options: &ExecOptions,
) -> (Outcome, ExecStats) {
    run(prog, input, options, None::<&mut NoObserver>, &[])
}

/// Executes with graph summaries collected at entry/exit of each marked
/// procedure.
pub fn execute_traced(
    prog: &LoadedProgram,
    input: &HostGraph,
    options: &ExecOptions,
    markers: &[&str],
) -> (Outcome, ExecStats, Vec<PhaseEvent>) {
    let mut events = Vec::new();
    let mut obs = |phase: &str, point: PhasePoint, graph: &HostGraph| {
        events.push(PhaseEvent {
            phase: phase.to_string(),
            point,
            summary: GraphSummary::of(graph),
        });
    };
    let (outcome, stats) = run(prog, input, options, Some(&mut obs), markers);
    (outcome, stats, events)
}

/// Executes with a caller-supplied observer that sees the live graph at
/// entry/exit of each marked procedure; used by invariant tests.
pub fn execute_with_observer(
    prog: &LoadedProgram,
    input: &HostGraph,
    options: &ExecOptions,
    markers: &[&str],
    mut observer: impl FnMut(&str, PhasePoint, &HostGraph),
) -> (Outcome, ExecStats) {
    run(prog, input, options, Some(&mut observer), markers)
}
