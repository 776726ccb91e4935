//! Causal inference over maximally oriented partially directed acyclic
//! graphs (MPDAGs) and interventionally fair regression built on it.
//!
//! The graph side ([`graph`], [`meek`], [`ident`], [`ancestry`]) is pure
//! and deterministic. The statistical side ([`scm`], [`density`], [`fair`])
//! draws all randomness from explicit seeds, and [`experiment`] ties both
//! together into the synthetic accuracy/fairness benchmark.

pub mod ancestry;
pub mod dataset;
pub mod density;
pub mod experiment;
pub mod fair;
pub mod graph;
pub mod ident;
pub mod meek;
pub mod rng;
pub mod scm;

pub use graph::{Edge, GraphError, Pdag, VertexId, VertexSet};
