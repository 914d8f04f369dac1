use alloc::string::String;
use core::fmt;

use crate::graph::VertexId;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    DuplicateVertex(VertexId),
    UnknownVertex(VertexId),
    UnknownEdge(VertexId, VertexId),
    SelfLoop(VertexId),
    ParallelEdge(VertexId, VertexId),
    WeightOutOfBounds { weight: u64, bound: u64 },
    MarkingMismatch { marking: usize, edges: usize },
    NotConnected,
    NotATree,
    SameVertex,
    ForeignLabels,
    /// A payload exceeded the per-message bit budget.
    CongestBudget { src: VertexId, dst: VertexId, round: u64, bits: usize, budget: u32 },
    DuplicateSend { src: VertexId, port: usize, round: u64 },
    NoSuchPort { vertex: VertexId, port: usize },
    Nontermination { max_rounds: u64 },
    BudgetTooSmall { bits: u32, required: u32 },
    ValueOverflow { value: u64, width: u32 },
    Decode(&'static str),
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DuplicateVertex(v) => write!(f, "duplicate vertex {v}"),
            Error::UnknownVertex(v) => write!(f, "unknown vertex {v}"),
            Error::UnknownEdge(u, v) => write!(f, "unknown edge ({u}, {v})"),
            Error::SelfLoop(v) => write!(f, "self-loop at {v}"),
            Error::ParallelEdge(u, v) => write!(f, "parallel edge ({u}, {v})"),
            Error::WeightOutOfBounds { weight, bound } => {
                write!(f, "weight {weight} exceeds bound {bound}")
            }
            Error::MarkingMismatch { marking, edges } => {
                write!(f, "marking covers {marking} edges but graph has {edges}")
            }
            Error::NotConnected => f.write_str("not connected"),
            Error::NotATree => f.write_str("not a tree"),
            Error::SameVertex => f.write_str("same vertex"),
            Error::ForeignLabels => f.write_str("labels from different trees"),
            Error::CongestBudget { src, dst, round, bits, budget } => write!(
                f,
                "congest budget exceeded: {bits} bits > {budget} on edge ({src}, {dst}) in round {round}"
            ),
            Error::DuplicateSend { src, port, round } => {
                write!(f, "vertex {src} sent twice on port {port} in round {round}")
            }
            Error::NoSuchPort { vertex, port } => write!(f, "vertex {vertex} has no port {port}"),
            Error::Nontermination { max_rounds } => {
                write!(f, "nontermination: no quiescence within {max_rounds} rounds")
            }
            Error::BudgetTooSmall { bits, required } => {
                write!(f, "bit budget {bits} too small, need at least {required}")
            }
            Error::ValueOverflow { value, width } => {
                write!(f, "value {value} does not fit in {width} bits")
            }
            Error::Decode(what) => write!(f, "malformed payload: {what}"),
            Error::Invalid(msg) => f.write_str(msg),
        }
    }
}

impl core::error::Error for Error {}
