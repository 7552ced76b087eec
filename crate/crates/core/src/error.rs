use thiserror::Error;

use crate::graph::VertexId;
use crate::oracle::AuditFinding;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("edge ({0}, {1}) not present")]
    MissingEdge(VertexId, VertexId),
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: VertexId, n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex {vertex} would exceed the degree bound {bound}")]
    DegreeBoundExceeded { vertex: VertexId, bound: u64 },
    #[error("vertex updates are not supported by this engine")]
    VertexUpdateUnsupported,
    #[error("deleted edge ({0}, {1}) had both endpoints in the MIS")]
    IndependenceBroken(VertexId, VertexId),
    #[error("removal cascade did not terminate")]
    Runaway,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("vertex {0} is not present")]
    VertexAbsent(VertexId),
    #[error("vertex {0} is already present")]
    VertexPresent(VertexId),
    #[error("message from {src} to {dst} over a missing link")]
    NoLink { src: VertexId, dst: VertexId },
    #[error("second message from {src} to {dst} in one round")]
    Congested { src: VertexId, dst: VertexId },
    #[error("payload of {bits} bits exceeds the {limit}-bit limit")]
    Oversized { bits: u32, limit: u32 },
    #[error("deleted edge ({0}, {1}) had both endpoints in the MIS")]
    IndependenceBroken(VertexId, VertexId),
    #[error("removal cascade did not terminate")]
    Runaway,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("stream has no `N <n>` header")]
    MissingHeader,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("update {index}: {source}")]
    Engine { index: u64, source: EngineError },
    #[error("update {index}: {source}")]
    Sim { index: u64, source: SimError },
    #[error("update {index}: audit failed: {}", first_finding(.findings))]
    Audit {
        index: u64,
        findings: Vec<AuditFinding>,
    },
}

fn first_finding(f: &[AuditFinding]) -> String {
    match f.first() {
        Some(x) if f.len() > 1 => format!("{x} (+{} more)", f.len() - 1),
        Some(x) => x.to_string(),
        None => String::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("adversary needs n divisible by 4 and at least 8, got {0}")]
    AdversarySize(usize),
    #[error("insert bias {0} is outside [0, 1]")]
    Bias(f64),
}
