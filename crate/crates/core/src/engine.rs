use std::fmt;

use crate::error::EngineError;
use crate::graph::VertexId;
use crate::ledger::CostLedger;
use crate::oracle::AuditFinding;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Update {
    InsertEdge(VertexId, VertexId),
    DeleteEdge(VertexId, VertexId),
    InsertVertex(VertexId),
    DeleteVertex(VertexId),
}

impl Update {
    pub fn is_edge_update(&self) -> bool {
        matches!(self, Update::InsertEdge(..) | Update::DeleteEdge(..))
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Update::InsertEdge(u, v) => write!(f, "+ {u} {v}"),
            Update::DeleteEdge(u, v) => write!(f, "- {u} {v}"),
            Update::InsertVertex(u) => write!(f, "+V {u}"),
            Update::DeleteVertex(u) => write!(f, "-V {u}"),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Delta,
    Sublinear,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Delta => "delta",
            EngineKind::Sublinear => "sublinear",
        }
    }
}

/// What one update did to the MIS.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AdjustmentReport {
    pub index: u64,
    pub removed: Vec<VertexId>,
    pub inserted: Vec<VertexId>,
    /// Elementary operations spent on this update, epoch rebuilds excluded.
    pub ops: u64,
    /// This update closed an epoch.
    pub new_epoch: bool,
}

impl AdjustmentReport {
    pub fn adjustments(&self) -> usize {
        self.removed.len() + self.inserted.len()
    }

    /// At most one removal, or at least two insertions per removal.
    pub fn has_valid_shape(&self) -> bool {
        self.removed.len() <= 1 || self.inserted.len() >= 2 * self.removed.len()
    }

    pub(crate) fn new(index: u64) -> Self {
        AdjustmentReport {
            index,
            ..Default::default()
        }
    }
}

/// Common surface of the sequential engines.
pub trait MisEngine {
    fn apply(&mut self, update: &Update) -> Result<AdjustmentReport, EngineError>;
    fn vertex_count(&self) -> usize;
    fn edge_count(&self) -> u64;
    fn in_mis(&self, v: VertexId) -> bool;
    fn ledger(&self) -> &CostLedger;
    fn active_kind(&self) -> EngineKind;
    /// MIS validity plus every maintained counter, recomputed from scratch.
    fn audit(&self) -> Vec<AuditFinding>;

    fn mis(&self) -> Vec<VertexId> {
        (0..self.vertex_count() as u32)
            .map(VertexId)
            .filter(|&v| self.in_mis(v))
            .collect()
    }
}
