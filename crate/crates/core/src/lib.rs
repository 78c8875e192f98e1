//! A rooted graph-rewriting engine in the GP 2 style, together with the
//! `mst-boruvka` graph program and a benchmark harness.
//!
//! The engine transforms directed labelled multigraphs ([`host::HostGraph`])
//! by applying conditional rules ([`rule::Rule`]) under a small control
//! language ([`interp::Program`]). Rules may anchor their search at root
//! nodes, which the host graph tracks in a registry for constant-time
//! access; on bounded-degree graphs this makes individual rule matches
//! run in constant time.
//!
//! The crate ships a complete minimum-spanning-tree program built from
//! those pieces ([`mst`]), graph generators and a union-find oracle for
//! checking it ([`gen`], [`oracle`]), and a timing harness ([`bench`]).

pub mod bench;
pub mod gen;
pub mod host;
pub mod interp;
pub mod matcher;
pub mod mst;
pub mod oracle;
pub mod rule;
pub mod text;

pub use host::{Atom, EdgeId, EdgeMark, HostGraph, Label, NodeId, NodeMark};
