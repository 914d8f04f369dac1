//! Synchronous CONGEST-model simulation and distributed MST verification.
//!
//! The crate is `no_std` and only needs `alloc`. It contains the weighted
//! graph model with its centralized oracles, a deterministic round engine
//! that enforces a per-message bit budget, reusable distributed primitives
//! (BFS, broadcast, convergecast, pipelined up/downcast), the fragment
//! decomposition, the max-on-path labeling scheme, the three-phase
//! verification protocol, and the lower-bound gadget constructions.
//!
//! File formats, generators and the command line front end live in the
//! companion `mstv` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bits;
pub mod error;
pub mod fragments;
pub mod gadgets;
pub mod graph;
pub mod labeling;
pub mod oracle;
pub mod primitives;
pub mod sim;
pub mod verify;

#[cfg(test)]
pub(crate) mod testutil;

pub use bits::{BitReader, Bits};
pub use error::{Error, Result};
pub use graph::{CandidateMarking, EdgeId, TieBrokenWeight, VertexId, WeightedGraph, Widths};
