//! Inverse design of photonic experiments as colored weighted graphs.
//!
//! A graph's perfect matchings (or, more generally, its multi-pair expansion under
//! heralding) determine the quantum state it emits. [`discovery::theseus`] starts
//! from a complete graph, optimizes edge weights against a target fidelity with an L1
//! penalty, and removes edges one at a time while the target stays reachable.

pub mod catalog;
pub mod discovery;
mod error;
pub mod fock;
pub mod graph;
pub mod interface;
pub mod model;
pub mod objective;
pub mod optimizer;
pub mod state;

pub use discovery::{theseus, PrunePolicy, SearchSpace, Solution, TraceRecord};
pub use error::{Error, Result};
pub use fock::{FockOccupation, FockState, KetTerm};
pub use graph::{ColoredGraph, Edge, EdgeKey, Matching, VertexId, VertexKind};
pub use objective::{
    fidelity, gate_fidelity, loss, loss_gradient, L1Norm, Objective, Target, TargetGate,
    TargetState,
};
pub use optimizer::{minimize, optimize_with_restarts, random_init, OptimizerConfig};
pub use state::{
    count_rate, event_probability, expand_phi, heralded_state, postselected_state, term_amplitude,
    transformation_outputs, ConditioningSpec, DetectorModel,
};
