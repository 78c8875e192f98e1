//! Textual formats for host graphs (`.host`) and programs (`.gpt`), with
//! parsers and a canonical host-graph printer.
//!
//! Host graphs: `[ node* | edge* ]` with
//! `node = (name (R)?, label (# mark)?)` and
//! `edge = (name, src, tgt, label (# mark)?)`;
//! labels are `empty` or `:`-joined atoms (integers, quoted strings).
//!
//! Programs: procedure declarations `Name = commands` and rule
//! declarations
//! `rule name(params) { lhs {...} rhs {...} interface = [pairs] where cond }`.
//! Rule nodes are written `k: label (# mark)? (R)?` (or `(R?)` for the
//! root wildcard), edges `a -> b, label (# mark)?` with `--` for
//! bidirectional. Command syntax: `;` sequencing, `{r1, r2}` rule sets,
//! `if C then P else Q`, `try C then P else Q`, `P!`, `break`, `skip`;
//! branches bind a single command, parentheses group.

use std::fmt::Write as _;

use thiserror::Error;

use crate::host::{Atom, EdgeMark, HostGraph, Label, NodeMark};
use crate::interp::{Command, Procedure, Program};
use crate::rule::{
    CmpOp, Condition, ExprItem, IntExpr, LabelExpr, LabelPattern, NodeMarkPattern, Orientation,
    PatternItem, RootPattern, Rule, RuleEdge, RuleGraph, RuleNode, VarType, Variable,
};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Eq,
    Bang,
    Hash,
    Question,
    Plus,
    Minus,
    Arrow,
    DashDash,
    Lt,
    Le,
    Gt,
    Ge,
    Ne,
    Pipe,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::Comma => write!(f, ","),
            Tok::Semi => write!(f, ";"),
            Tok::Colon => write!(f, ":"),
            Tok::Eq => write!(f, "="),
            Tok::Bang => write!(f, "!"),
            Tok::Hash => write!(f, "#"),
            Tok::Question => write!(f, "?"),
            Tok::Plus => write!(f, "+"),
            Tok::Minus => write!(f, "-"),
            Tok::Arrow => write!(f, "->"),
            Tok::DashDash => write!(f, "--"),
            Tok::Lt => write!(f, "<"),
            Tok::Le => write!(f, "<="),
            Tok::Gt => write!(f, ">"),
            Tok::Ge => write!(f, ">="),
            Tok::Ne => write!(f, "!="),
            Tok::Pipe => write!(f, "|"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, u32, u32)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut chars = text.chars().peekable();
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    loop {
        let (l, c) = (line, col);
        let Some(&ch) = chars.peek() else { break };
        match ch {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                } else {
                    return Err(ParseError { line: l, col: c, msg: "unexpected '/'".into() });
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            other => {
                                return Err(ParseError {
                                    line: l,
                                    col: c,
                                    msg: format!("bad escape {other:?} in string"),
                                })
                            }
                        },
                        Some(ch) => s.push(ch),
                        None => {
                            return Err(ParseError {
                                line: l,
                                col: c,
                                msg: "unterminated string".into(),
                            })
                        }
                    }
                }
                out.push((Tok::Str(s), l, c));
            }
            '0'..='9' => {
                let mut n: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n * 10 + v as i64;
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Int(n), l, c));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(s), l, c));
            }
            _ => {
                bump!();
                let tok = match ch {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    '#' => Tok::Hash,
                    '?' => Tok::Question,
                    '+' => Tok::Plus,
                    '|' => Tok::Pipe,
                    '!' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Tok::Ne
                        } else {
                            Tok::Bang
                        }
                    }
                    '<' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Tok::Le
                        } else {
                            Tok::Lt
                        }
                    }
                    '>' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            Tok::Ge
                        } else {
                            Tok::Gt
                        }
                    }
                    '-' => match chars.peek() {
                        Some('>') => {
                            bump!();
                            Tok::Arrow
                        }
                        Some('-') => {
                            bump!();
                            Tok::DashDash
                        }
                        _ => Tok::Minus,
                    },
                    other => {
                        return Err(ParseError {
                            line: l,
                            col: c,
                            msg: format!("unexpected character {other:?}"),
                        })
                    }
                };
                out.push((tok, l, c));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, u32, u32)>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(t, _, _)| t)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => {
                let t = t.clone();
                self.err(format!("expected '{tok}', found '{t}'"))
            }
            None => self.err(format!("expected '{tok}', found end of input")),
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => {
                let msg = format!("expected identifier, found {other:?}");
                self.err(msg)
            }
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.peek() {
            Some(Tok::Int(i)) => {
                let i = *i;
                self.pos += 1;
                Ok(if neg { -i } else { i })
            }
            other => {
                let msg = format!("expected integer, found {other:?}");
                self.err(msg)
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn node_mark_name(mark: NodeMark) -> &'static str {
    match mark {
        NodeMark::None => "",
        NodeMark::Red => "red",
        NodeMark::Green => "green",
        NodeMark::Blue => "blue",
        NodeMark::Grey => "grey",
    }
}

fn edge_mark_name(mark: EdgeMark) -> &'static str {
    match mark {
        EdgeMark::None => "",
        EdgeMark::Red => "red",
        EdgeMark::Green => "green",
        EdgeMark::Blue => "blue",
        EdgeMark::Dashed => "dashed",
    }
}

impl Parser {
    fn node_mark(&mut self) -> Result<NodeMark, ParseError> {
        let name = self.ident()?;
        match name.as_str() {
            "red" => Ok(NodeMark::Red),
            "green" => Ok(NodeMark::Green),
            "blue" => Ok(NodeMark::Blue),
            "grey" => Ok(NodeMark::Grey),
            other => self.err(format!("unknown node mark {other}")),
        }
    }

    fn edge_mark(&mut self) -> Result<EdgeMark, ParseError> {
        let name = self.ident()?;
        match name.as_str() {
            "red" => Ok(EdgeMark::Red),
            "green" => Ok(EdgeMark::Green),
            "blue" => Ok(EdgeMark::Blue),
            "dashed" => Ok(EdgeMark::Dashed),
            other => self.err(format!("unknown edge mark {other}")),
        }
    }

    fn host_label(&mut self) -> Result<Label, ParseError> {
        if let Some(Tok::Ident(s)) = self.peek() {
            if s == "empty" {
                self.pos += 1;
                return Ok(Label::empty());
            }
        }
        let mut atoms = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Int(_) | Tok::Minus) => atoms.push(Atom::Int(self.int()?)),
                Some(Tok::Str(s)) => {
                    atoms.push(Atom::Str(s.clone()));
                    self.pos += 1;
                }
                other => {
                    let msg = format!("expected label atom, found {other:?}");
                    return self.err(msg);
                }
            }
            if !self.eat(&Tok::Colon) {
                break;
            }
        }
        Ok(Label(atoms))
    }
}

/// Parses host-graph text. Node and edge ids are assigned in declaration
/// order.
pub fn parse_host(text: &str) -> Result<HostGraph, ParseError> {
    let mut p = Parser::new(text)?;
    let g = parse_host_body(&mut p)?;
    if !p.at_end() {
        return p.err("trailing input after host graph");
    }
    Ok(g)
}

fn parse_host_body(p: &mut Parser) -> Result<HostGraph, ParseError> {
    p.expect(Tok::LBracket)?;
    let mut names: Vec<String> = Vec::new();
    let mut nodes = Vec::new();
    while p.peek() != Some(&Tok::Pipe) {
        p.expect(Tok::LParen)?;
        let name = p.ident()?;
        if names.contains(&name) {
            return p.err(format!("duplicate node name {name}"));
        }
        let mut root = false;
        if p.eat(&Tok::LParen) {
            let r = p.ident()?;
            if r != "R" {
                return p.err("expected (R) root flag");
            }
            p.expect(Tok::RParen)?;
            root = true;
        }
        p.expect(Tok::Comma)?;
        let label = p.host_label()?;
        let mark = if p.eat(&Tok::Hash) {
            p.node_mark()?
        } else {
            NodeMark::None
        };
        p.expect(Tok::RParen)?;
        names.push(name);
        nodes.push((label, mark, root));
    }
    p.expect(Tok::Pipe)?;
    let mut edges = Vec::new();
    while p.peek() != Some(&Tok::RBracket) {
        p.expect(Tok::LParen)?;
        let _edge_name = p.ident()?;
        p.expect(Tok::Comma)?;
        let src = p.ident()?;
        p.expect(Tok::Comma)?;
        let tgt = p.ident()?;
        p.expect(Tok::Comma)?;
        let label = p.host_label()?;
        let mark = if p.eat(&Tok::Hash) {
            p.edge_mark()?
        } else {
            EdgeMark::None
        };
        p.expect(Tok::RParen)?;
        let si = names
            .iter()
            .position(|n| *n == src)
            .ok_or_else(|| ParseError {
                line: p.here().0,
                col: p.here().1,
                msg: format!("edge endpoint {src} is not a declared node"),
            })?;
        let ti = names
            .iter()
            .position(|n| *n == tgt)
            .ok_or_else(|| ParseError {
                line: p.here().0,
                col: p.here().1,
                msg: format!("edge endpoint {tgt} is not a declared node"),
            })?;
        edges.push((si, ti, label, mark));
    }
    p.expect(Tok::RBracket)?;
    HostGraph::build(&nodes, &edges).map_err(|e| ParseError {
        line: 1,
        col: 1,
        msg: e.to_string(),
    })
}

/// Prints a host graph in canonical form: nodes then edges in ascending id
/// order, renamed to contiguous `n0..`/`e0..`. Parsing the output yields a
/// graph equal to the input whenever the input's ids are contiguous (as
/// fixtures and generator outputs are); otherwise equal up to id
/// compaction.
pub fn print_host(graph: &HostGraph) -> String {
    let mut out = String::from("[");
    let mut node_names: Vec<(u32, usize)> = Vec::new();
    for (i, n) in graph.nodes().enumerate() {
        node_names.push((n.id.0, i));
        let root = if n.root { "(R)" } else { "" };
        let mark = if n.mark == NodeMark::None {
            String::new()
        } else {
            format!(" # {}", node_mark_name(n.mark))
        };
        let _ = write!(out, " (n{i}{root}, {}{mark})", n.label);
    }
    out.push_str(" |");
    let lookup = |id: u32| -> usize {
        node_names
            .iter()
            .find(|(orig, _)| *orig == id)
            .map(|(_, i)| *i)
            .expect("endpoint exists")
    };
    for (i, e) in graph.edges().enumerate() {
        let mark = if e.mark == EdgeMark::None {
            String::new()
        } else {
            format!(" # {}", edge_mark_name(e.mark))
        };
        let _ = write!(
            out,
            " (e{i}, n{}, n{}, {}{mark})",
            lookup(e.source.0),
            lookup(e.target.0),
            e.label
        );
    }
    out.push_str(" ]");
    out
}

const KEYWORDS: &[&str] = &[
    "rule", "if", "then", "else", "try", "break", "skip", "where", "interface", "lhs", "rhs",
    "nodes", "edges", "empty", "and", "int", "list",
];

/// Parses program text into rules and procedures. Name resolution and
/// semantic validation happen in [`crate::interp::load`].
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut program = Program::default();
    while !p.at_end() {
        match p.peek() {
            Some(Tok::Ident(s)) if s == "rule" => {
                p.pos += 1;
                program.rules.push(parse_rule(&mut p)?);
            }
            Some(Tok::Ident(_)) if p.peek2() == Some(&Tok::Eq) => {
                let name = p.ident()?;
                if KEYWORDS.contains(&name.as_str()) {
                    return p.err(format!("{name} is a reserved word"));
                }
                p.expect(Tok::Eq)?;
                let body = parse_cmdseq(&mut p)?;
                program.procedures.push(Procedure { name, body });
            }
            other => {
                let msg = format!("expected declaration, found {other:?}");
                return p.err(msg);
            }
        }
    }
    Ok(program)
}

fn parse_cmdseq(p: &mut Parser) -> Result<Command, ParseError> {
    let mut cmds = vec![parse_cmd(p)?];
    while p.eat(&Tok::Semi) {
        cmds.push(parse_cmd(p)?);
    }
    Ok(if cmds.len() == 1 {
        cmds.pop().unwrap()
    } else {
        Command::Seq(cmds)
    })
}

/// One command: branches of if/try bind a single command, so
/// `if C then P else Q; R` sequences `R` after the conditional.
fn parse_cmd(p: &mut Parser) -> Result<Command, ParseError> {
    match p.peek() {
        Some(Tok::Ident(s)) if s == "if" => {
            p.pos += 1;
            let cond = parse_cmd(p)?;
            expect_word(p, "then")?;
            let then = parse_cmd(p)?;
            let els = if eat_word(p, "else") {
                parse_cmd(p)?
            } else {
                Command::Skip
            };
            Ok(Command::If(Box::new(cond), Box::new(then), Box::new(els)))
        }
        Some(Tok::Ident(s)) if s == "try" => {
            p.pos += 1;
            let cond = parse_cmd(p)?;
            let then = if eat_word(p, "then") {
                parse_cmd(p)?
            } else {
                Command::Skip
            };
            let els = if eat_word(p, "else") {
                parse_cmd(p)?
            } else {
                Command::Skip
            };
            Ok(Command::Try(Box::new(cond), Box::new(then), Box::new(els)))
        }
        _ => parse_postfix(p),
    }
}

fn parse_postfix(p: &mut Parser) -> Result<Command, ParseError> {
    let mut cmd = parse_atom_cmd(p)?;
    while p.eat(&Tok::Bang) {
        cmd = Command::Loop(Box::new(cmd));
    }
    Ok(cmd)
}

fn parse_atom_cmd(p: &mut Parser) -> Result<Command, ParseError> {
    match p.peek() {
        Some(Tok::Ident(s)) if s == "break" => {
            p.pos += 1;
            Ok(Command::Break)
        }
        Some(Tok::Ident(s)) if s == "skip" => {
            p.pos += 1;
            Ok(Command::Skip)
        }
        Some(Tok::Ident(s)) if KEYWORDS.contains(&s.as_str()) => {
            let msg = format!("unexpected keyword {s}");
            p.err(msg)
        }
        Some(Tok::Ident(_)) => Ok(Command::Call(p.ident()?)),
        Some(Tok::LBrace) => {
            p.pos += 1;
            let mut rules = vec![p.ident()?];
            while p.eat(&Tok::Comma) {
                rules.push(p.ident()?);
            }
            p.expect(Tok::RBrace)?;
            Ok(Command::RuleSet(rules))
        }
        Some(Tok::LParen) => {
            p.pos += 1;
            let inner = parse_cmdseq(p)?;
            p.expect(Tok::RParen)?;
            Ok(inner)
        }
        other => {
            let msg = format!("expected command, found {other:?}");
            p.err(msg)
        }
    }
}

fn expect_word(p: &mut Parser, word: &str) -> Result<(), ParseError> {
    match p.peek() {
        Some(Tok::Ident(s)) if s == word => {
            p.pos += 1;
            Ok(())
        }
        other => {
            let msg = format!("expected '{word}', found {other:?}");
            p.err(msg)
        }
    }
}

fn eat_word(p: &mut Parser, word: &str) -> bool {
    match p.peek() {
        Some(Tok::Ident(s)) if s == word => {
            p.pos += 1;
            true
        }
        _ => false,
    }
}

fn parse_rule(p: &mut Parser) -> Result<Rule, ParseError> {
    let name = p.ident()?;
    p.expect(Tok::LParen)?;
    let mut vars: Vec<Variable> = Vec::new();
    if p.peek() != Some(&Tok::RParen) {
        loop {
            let mut group = vec![p.ident()?];
            while p.eat(&Tok::Comma) {
                group.push(p.ident()?);
            }
            p.expect(Tok::Colon)?;
            let ty = match p.ident()?.as_str() {
                "int" => VarType::Int,
                "list" => VarType::List,
                other => return p.err(format!("unknown parameter type {other}")),
            };
            for name in group {
                if vars.iter().any(|v| v.name == name) {
                    return p.err(format!("duplicate parameter {name}"));
                }
                vars.push(Variable { name, ty });
            }
            if !p.eat(&Tok::Semi) {
                break;
            }
        }
    }
    p.expect(Tok::RParen)?;
    p.expect(Tok::LBrace)?;

    expect_word(p, "lhs")?;
    let (lhs_locals, lhs) = parse_rule_graph_lhs(p, &vars)?;
    expect_word(p, "rhs")?;
    let (rhs_locals, rhs) = parse_rule_graph_rhs(p, &vars)?;

    expect_word(p, "interface")?;
    p.expect(Tok::Eq)?;
    p.expect(Tok::LBracket)?;
    let mut interface = Vec::new();
    if p.peek() != Some(&Tok::RBracket) {
        loop {
            let l = p.int()? as u32;
            p.expect(Tok::Eq)?;
            let r = p.int()? as u32;
            let li = lhs_locals
                .iter()
                .position(|&x| x == l)
                .ok_or_else(|| ParseError {
                    line: p.here().0,
                    col: p.here().1,
                    msg: format!("interface references unknown lhs node {l}"),
                })?;
            let ri = rhs_locals
                .iter()
                .position(|&x| x == r)
                .ok_or_else(|| ParseError {
                    line: p.here().0,
                    col: p.here().1,
                    msg: format!("interface references unknown rhs node {r}"),
                })?;
            interface.push((li, ri));
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    p.expect(Tok::RBracket)?;

    let condition = if eat_word(p, "where") {
        parse_condition(p, &vars)?
    } else {
        Condition::default()
    };
    p.expect(Tok::RBrace)?;

    Ok(Rule {
        name,
        vars,
        lhs,
        rhs,
        interface,
        condition,
    })
}

/// Left-hand sides parse through the expression grammar, then convert to
/// patterns (rejecting arithmetic).
fn parse_rule_graph_lhs(
    p: &mut Parser,
    vars: &[Variable],
) -> Result<(Vec<u32>, RuleGraph<LabelPattern>), ParseError> {
    let (locals, nodes, edges) = parse_graph_block(p, vars)?;
    let nodes = nodes
        .into_iter()
        .map(|n| {
            Ok(RuleNode {
                local: n.local,
                label: expr_to_pattern(p, n.label)?,
                mark: n.mark,
                root: n.root,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let edges = edges
        .into_iter()
        .map(|e| {
            Ok(RuleEdge {
                src: e.src,
                tgt: e.tgt,
                orient: e.orient,
                label: expr_to_pattern(p, e.label)?,
                mark: e.mark,
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    Ok((locals, RuleGraph { nodes, edges }))
}

fn parse_rule_graph_rhs(
    p: &mut Parser,
    vars: &[Variable],
) -> Result<(Vec<u32>, RuleGraph<LabelExpr>), ParseError> {
    let (locals, nodes, edges) = parse_graph_block(p, vars)?;
    Ok((locals, RuleGraph { nodes, edges }))
}

/// Parses `{ nodes [ ... ] edges [ ... ] }` into expression-labelled
/// nodes/edges; the lhs converts expressions to patterns afterwards.
fn parse_graph_block(
    p: &mut Parser,
    vars: &[Variable],
) -> Result<(Vec<u32>, Vec<RuleNode<LabelExpr>>, Vec<RuleEdge<LabelExpr>>), ParseError> {
    p.expect(Tok::LBrace)?;
    let mut locals: Vec<u32> = Vec::new();
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    if eat_word(p, "nodes") {
        p.expect(Tok::LBracket)?;
        if p.peek() != Some(&Tok::RBracket) {
            loop {
                let local = p.int()? as u32;
                if locals.contains(&local) {
                    return p.err(format!("duplicate node id {local}"));
                }
                p.expect(Tok::Colon)?;
                let label = parse_label_expr(p, vars)?;
                let mark = if p.eat(&Tok::Hash) {
                    let name = p.ident()?;
                    match name.as_str() {
                        "any" => NodeMarkPattern::Any,
                        "red" => NodeMarkPattern::Is(NodeMark::Red),
                        "green" => NodeMarkPattern::Is(NodeMark::Green),
                        "blue" => NodeMarkPattern::Is(NodeMark::Blue),
                        "grey" => NodeMarkPattern::Is(NodeMark::Grey),
                        other => return p.err(format!("unknown node mark {other}")),
                    }
                } else {
                    NodeMarkPattern::Is(NodeMark::None)
                };
                let root = if p.eat(&Tok::LParen) {
                    let r = p.ident()?;
                    if r != "R" {
                        return p.err("expected (R) or (R?)");
                    }
                    let any = p.eat(&Tok::Question);
                    p.expect(Tok::RParen)?;
                    if any {
                        RootPattern::Any
                    } else {
                        RootPattern::Yes
                    }
                } else {
                    RootPattern::No
                };
                locals.push(local);
                nodes.push(RuleNode { local, label, mark, root });
                if !p.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        p.expect(Tok::RBracket)?;
    }
    if eat_word(p, "edges") {
        p.expect(Tok::LBracket)?;
        if p.peek() != Some(&Tok::RBracket) {
            loop {
                let src_local = p.int()? as u32;
                let orient = match p.next() {
                    Some(Tok::Arrow) => Orientation::Directed,
                    Some(Tok::DashDash) => Orientation::Bidirectional,
                    other => {
                        let msg = format!("expected -> or --, found {other:?}");
                        return p.err(msg);
                    }
                };
                let tgt_local = p.int()? as u32;
                p.expect(Tok::Comma)?;
                let label = parse_label_expr(p, vars)?;
                let mark = if p.eat(&Tok::Hash) {
                    p.edge_mark()?
                } else {
                    EdgeMark::None
                };
                let src = locals
                    .iter()
                    .position(|&x| x == src_local)
                    .ok_or_else(|| ParseError {
                        line: p.here().0,
                        col: p.here().1,
                        msg: format!("edge endpoint {src_local} is not a declared node"),
                    })?;
                let tgt = locals
                    .iter()
                    .position(|&x| x == tgt_local)
                    .ok_or_else(|| ParseError {
                        line: p.here().0,
                        col: p.here().1,
                        msg: format!("edge endpoint {tgt_local} is not a declared node"),
                    })?;
                // A bidirectional loop is the same edge either way round.
                let orient = if src == tgt { Orientation::Directed } else { orient };
                edges.push(RuleEdge { src, tgt, orient, label, mark });
                if !p.eat(&Tok::Semi) {
                    break;
                }
            }
        }
        p.expect(Tok::RBracket)?;
    }
    p.expect(Tok::RBrace)?;
    Ok((locals, nodes, edges))
}

fn var_id(p: &Parser, vars: &[Variable], name: &str) -> Result<usize, ParseError> {
    vars.iter().position(|v| v.name == name).ok_or_else(|| {
        let (line, col) = p.here();
        ParseError {
            line,
            col,
            msg: format!("unknown variable {name}"),
        }
    })
}

fn parse_label_expr(p: &mut Parser, vars: &[Variable]) -> Result<LabelExpr, ParseError> {
    if let Some(Tok::Ident(s)) = p.peek() {
        if s == "empty" {
            p.pos += 1;
            return Ok(LabelExpr::default());
        }
    }
    let mut items = Vec::new();
    loop {
        match p.peek() {
            Some(Tok::Int(_) | Tok::Minus) => items.push(ExprItem::Lit(Atom::Int(p.int()?))),
            Some(Tok::Str(s)) => {
                items.push(ExprItem::Lit(Atom::Str(s.clone())));
                p.pos += 1;
            }
            Some(Tok::Ident(_)) => {
                let name = p.ident()?;
                let v = var_id(p, vars, &name)?;
                let item = match p.peek() {
                    Some(Tok::Plus) => {
                        p.pos += 1;
                        match p.peek() {
                            Some(Tok::Int(_)) => ExprItem::Int(IntExpr::AddConst(v, p.int()?)),
                            Some(Tok::Ident(_)) => {
                                let other = p.ident()?;
                                let w = var_id(p, vars, &other)?;
                                ExprItem::Int(IntExpr::AddVar(v, w))
                            }
                            other => {
                                let msg = format!("expected integer or variable, found {other:?}");
                                return p.err(msg);
                            }
                        }
                    }
                    Some(Tok::Minus) => {
                        p.pos += 1;
                        let c = p.int()?;
                        ExprItem::Int(IntExpr::AddConst(v, -c))
                    }
                    _ => match vars[v].ty {
                        VarType::Int => ExprItem::Int(IntExpr::Var(v)),
                        VarType::List => ExprItem::ListVar(v),
                    },
                };
                items.push(item);
            }
            other => {
                let msg = format!("expected label item, found {other:?}");
                return p.err(msg);
            }
        }
        if !p.eat(&Tok::Colon) {
            break;
        }
    }
    Ok(LabelExpr(items))
}

/// Left-hand labels reuse the expression syntax but only allow literals
/// and plain variables.
fn expr_to_pattern(p: &Parser, expr: LabelExpr) -> Result<LabelPattern, ParseError> {
    let mut items = Vec::new();
    for item in expr.0 {
        items.push(match item {
            ExprItem::Lit(a) => PatternItem::Lit(a),
            ExprItem::ListVar(v) => PatternItem::ListVar(v),
            ExprItem::Int(IntExpr::Var(v)) => PatternItem::IntVar(v),
            ExprItem::Int(_) => {
                let (line, col) = p.here();
                return Err(ParseError {
                    line,
                    col,
                    msg: "arithmetic is not allowed in a left-hand label".into(),
                });
            }
        });
    }
    Ok(LabelPattern(items))
}

fn parse_int_expr(p: &mut Parser, vars: &[Variable]) -> Result<IntExpr, ParseError> {
    match p.peek() {
        Some(Tok::Int(_) | Tok::Minus) => Ok(IntExpr::Lit(p.int()?)),
        Some(Tok::Ident(_)) => {
            let name = p.ident()?;
            let v = var_id(p, vars, &name)?;
            match p.peek() {
                Some(Tok::Plus) => {
                    p.pos += 1;
                    match p.peek() {
                        Some(Tok::Int(_)) => Ok(IntExpr::AddConst(v, p.int()?)),
                        Some(Tok::Ident(_)) => {
                            let other = p.ident()?;
                            let w = var_id(p, vars, &other)?;
                            Ok(IntExpr::AddVar(v, w))
                        }
                        other => {
                            let msg = format!("expected integer or variable, found {other:?}");
                            p.err(msg)
                        }
                    }
                }
                Some(Tok::Minus) => {
                    p.pos += 1;
                    let c = p.int()?;
                    Ok(IntExpr::AddConst(v, -c))
                }
                _ => Ok(IntExpr::Var(v)),
            }
        }
        other => {
            let msg = format!("expected integer expression, found {other:?}");
            p.err(msg)
        }
    }
}

fn parse_condition(p: &mut Parser, vars: &[Variable]) -> Result<Condition, ParseError> {
    let mut clauses = Vec::new();
    loop {
        let a = parse_int_expr(p, vars)?;
        let op = match p.next() {
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ne) => CmpOp::Ne,
            Some(Tok::Ge) => CmpOp::Ge,
            Some(Tok::Gt) => CmpOp::Gt,
            other => {
                let msg = format!("expected comparison operator, found {other:?}");
                return p.err(msg);
            }
        };
        let b = parse_int_expr(p, vars)?;
        clauses.push((op, a, b));
        if !eat_word(p, "and") {
            break;
        }
    }
    Ok(Condition(clauses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::NodeId;

    #[test]
    fn parse_minimal_node() {
        let g = parse_host("[ (n0, empty) | ]").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        let n = g.node(NodeId(0)).unwrap();
        assert!(n.label.is_empty());
        assert_eq!(n.mark, NodeMark::None);
        assert!(!n.root);
    }

    #[test]
    fn parse_cursor_fragment() {
        let g = parse_host("[ (n0(R), 1) (n1, empty # red) | (e0, n0, n1, empty # red) ]").unwrap();
        assert_eq!(g.node_count(), 2);
        let cursor = g.node(NodeId(0)).unwrap();
        assert!(cursor.root);
        assert_eq!(cursor.label, Label::int(1));
        let n1 = g.node(NodeId(1)).unwrap();
        assert_eq!(n1.mark, NodeMark::Red);
        let e = g.edges().next().unwrap();
        assert_eq!(e.mark, EdgeMark::Red);
    }

    #[test]
    fn parse_weight_marker_edge() {
        let g = parse_host("[ (a, empty) (b, empty) | (e, a, b, 5:0 # green) ]").unwrap();
        let e = g.edges().next().unwrap();
        assert_eq!(e.label, Label(vec![Atom::Int(5), Atom::Int(0)]));
        assert_eq!(e.mark, EdgeMark::Green);
    }

    #[test]
    fn parse_rejects_dangling_endpoint() {
        let err = parse_host("[ (a, empty) | (e, a, zz, 1) ]").unwrap_err();
        assert!(err.msg.contains("zz"));
    }

    #[test]
    fn parse_rejects_duplicate_node_name() {
        let err = parse_host("[ (a, empty) (a, empty) | ]").unwrap_err();
        assert!(err.msg.contains("duplicate"));
    }

    #[test]
    fn print_empty_graph() {
        assert_eq!(print_host(&HostGraph::new()), "[ | ]");
    }

    #[test]
    fn print_single_root() {
        let g = parse_host("[ (n0(R), 1) | ]").unwrap();
        assert_eq!(print_host(&g), "[ (n0(R), 1) | ]");
    }

    #[test]
    fn roundtrip_is_identity_on_canonical_text() {
        let text = "[ (n0(R), 1) (n1, empty # red) (n2, 3:\"s\" # blue) | (e0, n0, n1, empty # red) (e1, n1, n1, 7 # dashed) ]";
        let g = parse_host(text).unwrap();
        let printed = print_host(&g);
        let g2 = parse_host(&printed).unwrap();
        assert_eq!(g, g2);
        assert_eq!(print_host(&g2), printed);
    }

    #[test]
    fn parse_main_skip() {
        let prog = parse_program("Main = skip").unwrap();
        assert_eq!(prog.rules.len(), 0);
        assert_eq!(prog.procedures.len(), 1);
        assert_eq!(prog.procedures[0].body, Command::Skip);
    }

    #[test]
    fn parse_main_sequence_and_loop() {
        let prog = parse_program("Main = Preprocess; Loop!\nLoop = skip\nPreprocess = skip").unwrap();
        let main = &prog.procedures[0].body;
        assert_eq!(
            *main,
            Command::Seq(vec![
                Command::Call("Preprocess".into()),
                Command::Loop(Box::new(Command::Call("Loop".into()))),
            ])
        );
    }

    #[test]
    fn branch_binding_is_tight() {
        // else binds the single command; the trailing call is sequenced.
        let prog = parse_program("Main = if a then break else b; c\na = skip\nb = skip\nc = skip").unwrap();
        let main = &prog.procedures[0].body;
        match main {
            Command::Seq(cmds) => {
                assert_eq!(cmds.len(), 2);
                assert!(matches!(cmds[0], Command::If(..)));
                assert_eq!(cmds[1], Command::Call("c".into()));
            }
            other => panic!("expected sequence, got {other:?}"),
        }
    }

    #[test]
    fn parse_rule_set_call() {
        let prog = parse_program("Main = {r1, r2}!").unwrap();
        assert_eq!(
            prog.procedures[0].body,
            Command::Loop(Box::new(Command::RuleSet(vec!["r1".into(), "r2".into()])))
        );
    }

    #[test]
    fn parse_rule_declaration() {
        let text = r#"
            rule min_s(i, j: int; x, y, z: list) {
              lhs {
                nodes [ 1: x # grey (R); 2: y # red; 3: z # red (R) ]
                edges [ 1 -- 2, i; 1 -- 3, j # green ]
              }
              rhs {
                nodes [ 1: x # grey (R); 2: y # red (R); 3: z # red ]
                edges [ 1 -- 2, i # green; 1 -- 3, j ]
              }
              interface = [1=1, 2=2, 3=3]
              where i < j
            }
        "#;
        let prog = parse_program(text).unwrap();
        let rule = &prog.rules[0];
        assert_eq!(rule.name, "min_s");
        assert_eq!(rule.vars.len(), 5);
        assert_eq!(rule.lhs.nodes.len(), 3);
        assert_eq!(rule.lhs.edges.len(), 2);
        assert_eq!(rule.lhs.edges[0].orient, Orientation::Bidirectional);
        assert_eq!(rule.interface.len(), 3);
        assert_eq!(rule.condition.0.len(), 1);
        assert_eq!(rule.compile().unwrap().instances.len(), 4);
    }

    #[test]
    fn parse_root_wildcard() {
        let text = r#"
            rule clean_like(i: int; x, y: list) {
              lhs {
                nodes [ 1: x # grey (R?); 2: y # red (R) ]
                edges [ 1 -- 2, i:0 # green ]
              }
              rhs {
                nodes [ 1: x # grey (R?); 2: y # red (R) ]
                edges [ 1 -- 2, i # green ]
              }
              interface = [1=1, 2=2]
            }
        "#;
        let prog = parse_program(text).unwrap();
        let rule = &prog.rules[0];
        assert_eq!(rule.lhs.nodes[0].root, RootPattern::Any);
        assert_eq!(rule.lhs.nodes[1].root, RootPattern::Yes);
        rule.compile().unwrap();
    }

    #[test]
    fn parse_decrement_label() {
        let text = r#"
            rule dec(i: int) {
              lhs { nodes [ 1: i (R) ] }
              rhs { nodes [ 1: i-1 (R) ] }
              interface = [1=1]
            }
        "#;
        let prog = parse_program(text).unwrap();
        let rule = &prog.rules[0];
        assert_eq!(
            rule.rhs.nodes[0].label,
            LabelExpr(vec![ExprItem::Int(IntExpr::AddConst(0, -1))])
        );
    }

    #[test]
    fn lhs_arithmetic_rejected() {
        let text = r#"
            rule bad(i: int) {
              lhs { nodes [ 1: i+1 ] }
              rhs { nodes [ 1: i ] }
              interface = [1=1]
            }
        "#;
        let err = parse_program(text).unwrap_err();
        assert!(err.msg.contains("arithmetic"));
    }

    #[test]
    fn comments_are_skipped() {
        let prog = parse_program("// a program\nMain = skip // trailing\n").unwrap();
        assert_eq!(prog.procedures.len(), 1);
    }
}
