//! Triangle-switch Markov chains on labeled cubic graphs.
//!
//! The crate provides a validated cubic graph type with a motif census,
//! triangle make/break moves with local census deltas, seeded chain
//! simulators, exhaustive state-space tools for small `n`, and analytic
//! drift bounds.

pub mod bounds;
pub mod chains;
pub mod graph;
pub mod io;
pub mod moves;
pub mod sampler;
pub mod statespace;
pub mod stationary;
pub mod tracker;

pub use chains::{
    replay, run, run_logged, run_replicas, step_chain_i, step_chain_ii, step_chain_o,
    step_metropolis_switch, AppliedMove, Chain, ChainConfig, ChainError, ChainKind, StepKind,
    StepOutcome, TraceRecord, TraceSummary,
};
pub use graph::{CubicGraph, GraphError, MotifCensus, NamedGraph, Vertex, VertexClass};
pub use io::{from_edge_list, from_graph6, to_edge_list, to_graph6};
pub use moves::{
    apply_break, apply_make, apply_move, break_valid, delta_triangles, enumerate_all_moves,
    enumerate_qv, find_triangle_inserting_make, make_valid, BreakMove, LocalDelta, MakeMove, Move,
    MoveError, PathPair,
};
pub use sampler::sample_uniform_cubic;
pub use tracker::{TrackedGraph, TripleSets};
