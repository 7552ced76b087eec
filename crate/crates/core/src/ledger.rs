use crate::engine::{AdjustmentReport, EngineKind};
use crate::graph::{EpochConfig, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpochRecord {
    pub engine: EngineKind,
    pub m_snapshot: u64,
    pub t_high: u64,
    pub start_index: u64,
    pub updates: u64,
    /// Update work plus the rebuild that closed the epoch.
    pub ops: u64,
    pub rebuild_ops: u64,
}

/// Work and adjustment accounting for one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostLedger {
    pub updates: u64,
    pub ops: u64,
    pub removed: u64,
    pub inserted: u64,
    pub max_adjustments: u64,
    pub shape_violations: u64,
    /// Registry sweeps run, and those that removed more than half as many
    /// vertices as the greedy pass before them had inserted.
    pub sweeps: u64,
    pub sweep_shortfalls: u64,
    pub epochs: Vec<EpochRecord>,
    budget: Vec<u64>,
    budget_unit: u64,
    pub budget_shortfall: u64,
}

impl CostLedger {
    pub fn new(n: usize) -> Self {
        CostLedger {
            budget: vec![0; n],
            ..Default::default()
        }
    }

    pub fn adjustments(&self) -> u64 {
        self.removed + self.inserted
    }

    pub fn total_ops(&self) -> u64 {
        self.epochs.iter().map(|e| e.ops).sum()
    }

    pub fn current_epoch(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }

    pub(crate) fn open_epoch(&mut self, engine: EngineKind, cfg: &EpochConfig, unit: u64) {
        self.epochs.push(EpochRecord {
            engine,
            m_snapshot: cfg.m_snapshot,
            t_high: cfg.t_high,
            start_index: cfg.start_index,
            updates: 0,
            ops: 0,
            rebuild_ops: 0,
        });
        self.budget_unit = unit;
    }

    /// Rebuild work is billed to the epoch it closes; before any epoch is
    /// open it goes to the first one.
    pub(crate) fn charge_rebuild(&mut self, ops: u64) {
        self.ops += ops;
        if let Some(e) = self.epochs.last_mut() {
            e.ops += ops;
            e.rebuild_ops += ops;
        }
    }

    pub(crate) fn record_update(&mut self, r: &AdjustmentReport) {
        self.updates += 1;
        self.ops += r.ops;
        self.removed += r.removed.len() as u64;
        self.inserted += r.inserted.len() as u64;
        self.max_adjustments = self.max_adjustments.max(r.adjustments() as u64);
        if !r.has_valid_shape() {
            self.shape_violations += 1;
        }
        if let Some(e) = self.epochs.last_mut() {
            e.updates += 1;
            e.ops += r.ops;
        }
    }

    pub(crate) fn record_sweep(&mut self, inserted: usize, removed: usize) {
        self.sweeps += 1;
        if removed > 0 && inserted < 2 * removed {
            self.sweep_shortfalls += 1;
        }
    }

    /// A vertex leaving the MIS is credited one budget unit.
    pub(crate) fn on_leave(&mut self, v: VertexId) {
        self.budget[v.index()] += self.budget_unit;
    }

    /// A joining vertex pays for its own announcement out of its credit.
    pub(crate) fn on_join(&mut self, v: VertexId, cost: u64) {
        let b = &mut self.budget[v.index()];
        let paid = cost.min(*b);
        *b -= paid;
        self.budget_shortfall += cost - paid;
    }

    /// Credits vertices outside the MIS after a from-scratch construction.
    pub(crate) fn seed(&mut self, v: VertexId) {
        let b = &mut self.budget[v.index()];
        *b = (*b).max(self.budget_unit);
    }

    pub fn budget(&self, v: VertexId) -> u64 {
        self.budget[v.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rebuild_is_billed_to_closing_epoch() {
        let mut l = CostLedger::new(2);
        l.open_epoch(EngineKind::Sublinear, &EpochConfig::new(1, 0), 1);
        let mut r = AdjustmentReport::new(0);
        r.ops = 5;
        l.record_update(&r);
        l.charge_rebuild(7);
        l.open_epoch(EngineKind::Sublinear, &EpochConfig::new(3, 1), 2);
        assert_eq!(l.epochs[0].ops, 12);
        assert_eq!(l.epochs[0].updates, 1);
        assert_eq!(l.epochs[1].ops, 0);
        assert_eq!(l.total_ops(), 12);
    }

    #[test]
    fn shape_check() {
        let mut r = AdjustmentReport::new(0);
        r.removed = vec![VertexId(1), VertexId(2)];
        r.inserted = vec![VertexId(3), VertexId(4), VertexId(5)];
        assert!(!r.has_valid_shape());
        r.inserted.push(VertexId(6));
        assert!(r.has_valid_shape());
        r.removed.truncate(1);
        r.inserted.clear();
        assert!(r.has_valid_shape());
    }

    #[test]
    fn budgets() {
        let mut l = CostLedger::new(1);
        l.open_epoch(EngineKind::Delta, &EpochConfig::new(1, 0), 3);
        l.on_leave(VertexId(0));
        l.on_join(VertexId(0), 2);
        assert_eq!(l.budget(VertexId(0)), 1);
        l.on_join(VertexId(0), 4);
        assert_eq!(l.budget_shortfall, 3);
    }
}
