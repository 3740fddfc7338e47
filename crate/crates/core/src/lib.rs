//! Canonical Ramsey patterns in edge-coloured graphs.
//!
//! The crate covers ordered graphs and `G(n, p)` sampling ([`graph`]), edge
//! colourings and the canonical pattern classifier ([`colouring`]), adversarial
//! colouring generators ([`adversary`]), witness search and arrow decisions
//! ([`search`]), the constructive Erdős–Rado procedure ([`erdos_rado`]),
//! cut-norm and homomorphism-density tools ([`cutnorm`]), and a seeded Monte
//! Carlo sweep driver ([`harness`]).

pub mod adversary;
pub mod bitset;
pub mod colouring;
pub mod cutnorm;
pub mod erdos_rado;
pub mod graph;
pub mod harness;
pub mod partition;
pub mod rng;
pub mod search;

pub use colouring::{CanonicalWitness, Colour, Direction, EdgeColouring, PatternTag, TagSet};
pub use graph::{gnp_generate, Edge, GnpSample, OrderedGraph, Vertex, VertexSet};
