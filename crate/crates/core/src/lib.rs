//! Cross-language clone detection core.
//!
//! Everything in this crate is a pure function of its inputs: parsing Java and
//! Python into a normalized syntax tree, turning that tree into a standard code
//! property graph (AST + data-flow edges, pruned, with a shared label
//! vocabulary), byte-pair tokenization and skip-gram embeddings for the
//! sequence side, Weisfeiler-Lehman pair features for the graph side, a
//! logistic pair classifier, corpus filtering and pair sampling, and the
//! evaluation metrics with a paired bootstrap test.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. File IO, the CLI and the experiment runner live in the
//! `crossclone` companion crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ast;
pub mod corpus;
pub mod graph;
pub mod hash;
pub mod detect;
pub mod eval;
pub mod fixtures;
pub mod math;
pub mod tokens;

pub use ast::{parse, static_metrics, AstNode, Language, NormalizedAst, ParseError, SourceUnit, Span};
pub use graph::{build_cpg, CodePropertyGraph, EdgeKind, GraphBuilder, GraphEdge, GraphError, GraphNode, Stage};
