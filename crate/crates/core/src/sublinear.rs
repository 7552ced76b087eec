//! MIS maintenance with sublinear work per update on graphs of any degree.
//!
//! A removed MIS vertex hands its neighborhood to one of four resolution
//! paths chosen from the sizes of its candidate sets. Paths that insert
//! greedily without a full neighborhood check are followed by a sweep of the
//! High (or High and MedHigh) registry, and every vertex the sweep removes is
//! resolved the same way, depth first.

use crate::engine::{AdjustmentReport, EngineKind, MisEngine, Update};
use crate::error::EngineError;
use crate::graph::{DegreeClass, DynGraph, EpochConfig, OpKind, VertexId};
use crate::ledger::CostLedger;
use crate::oracle::{audit_graph, check_mis, AuditFinding};

/// Which resolution path a removed vertex took.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct PathCounts {
    pub exact_scan: u64,
    pub greedy_high_sweep: u64,
    pub greedy_wide_sweep: u64,
}

#[derive(Clone, Debug)]
pub struct SublinearEngine {
    graph: DynGraph,
    ledger: CostLedger,
    next_index: u64,
    manage_epochs: bool,
    paths: PathCounts,
}

impl SublinearEngine {
    /// Empty graph on `n` vertices; every vertex starts in the MIS.
    pub fn new(n: usize) -> Self {
        let cfg = EpochConfig::new(0, 0);
        let mut graph = DynGraph::new(n, cfg);
        for i in 0..n {
            graph.set_flag(VertexId(i as u32), true);
        }
        let mut ledger = CostLedger::new(n);
        ledger.open_epoch(EngineKind::Sublinear, &cfg, budget_unit(&cfg));
        SublinearEngine {
            graph,
            ledger,
            next_index: 0,
            manage_epochs: true,
            paths: PathCounts::default(),
        }
    }

    /// Builds over an existing graph with the ascending-id greedy MIS.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, EngineError> {
        Self::from_parts(n, edges, None, CostLedger::new(n), 0)
    }

    /// Builds over an existing graph. With `mis` given, the greedy pass visits
    /// those vertices first, which reproduces that MIS when it is valid.
    pub(crate) fn from_parts(
        n: usize,
        edges: &[(VertexId, VertexId)],
        mis: Option<&[bool]>,
        mut ledger: CostLedger,
        start_index: u64,
    ) -> Result<Self, EngineError> {
        let cfg = EpochConfig::new(edges.len() as u64, start_index);
        let graph = DynGraph::from_edges(n, edges, cfg)?;
        let mut engine = SublinearEngine {
            graph,
            ledger: CostLedger::default(),
            next_index: start_index,
            manage_epochs: true,
            paths: PathCounts::default(),
        };
        engine.preprocess(mis);
        let work = engine.graph.ops().total;
        if ledger.epochs.is_empty() {
            ledger.open_epoch(EngineKind::Sublinear, &cfg, budget_unit(&cfg));
            ledger.charge_rebuild(work);
        } else {
            ledger.charge_rebuild(work);
            ledger.open_epoch(EngineKind::Sublinear, &cfg, budget_unit(&cfg));
        }
        engine.ledger = ledger;
        engine.seed_budgets();
        Ok(engine)
    }

    pub(crate) fn set_manage_epochs(&mut self, on: bool) {
        self.manage_epochs = on;
    }

    pub(crate) fn into_parts(self) -> (Vec<(VertexId, VertexId)>, Vec<bool>, CostLedger) {
        let flags = (0..self.graph.vertex_count())
            .map(|i| self.graph.in_mis(VertexId(i as u32)))
            .collect();
        (self.graph.edge_list(), flags, self.ledger)
    }

    pub fn graph(&self) -> &DynGraph {
        &self.graph
    }

    pub fn paths(&self) -> PathCounts {
        self.paths
    }

    pub fn degree(&self, v: VertexId) -> u64 {
        self.graph.degree(v)
    }

    pub fn epoch_violated(&self) -> bool {
        self.graph.epoch().is_violated_by(self.graph.edge_count())
    }

    /// Closes the current epoch and rebuilds under `cfg`, keeping the MIS.
    pub fn start_epoch(&mut self, cfg: EpochConfig) {
        let before = self.graph.ops().total;
        let flags: Vec<bool> = (0..self.graph.vertex_count())
            .map(|i| self.graph.in_mis(VertexId(i as u32)))
            .collect();
        self.graph.reset_epoch(cfg);
        self.preprocess(Some(&flags));
        self.ledger.charge_rebuild(self.graph.ops().total - before);
        self.ledger
            .open_epoch(EngineKind::Sublinear, &cfg, budget_unit(&cfg));
        self.seed_budgets();
    }

    fn seed_budgets(&mut self) {
        for i in 0..self.graph.vertex_count() {
            let v = VertexId(i as u32);
            if !self.graph.in_mis(v) {
                self.ledger.seed(v);
            }
        }
    }

    /// Greedy MIS over the current epoch's graph, then counters accumulated
    /// from the MIS members. Expects counters already zeroed.
    fn preprocess(&mut self, keep: Option<&[bool]>) {
        let n = self.graph.vertex_count();
        let mut order: Vec<VertexId> = Vec::with_capacity(n);
        if let Some(flags) = keep {
            order.extend((0..n).filter(|&i| flags[i]).map(|i| VertexId(i as u32)));
            order.extend((0..n).filter(|&i| !flags[i]).map(|i| VertexId(i as u32)));
        } else {
            order.extend((0..n).map(|i| VertexId(i as u32)));
        }
        for i in 0..n {
            self.graph.set_flag(VertexId(i as u32), false);
        }
        for &v in &order {
            let deg = self.graph.degree(v);
            let free = self.graph.neighbors(v).all(|x| !self.graph.in_mis(x));
            self.graph.count_op(OpKind::Rebuild, deg);
            if free {
                self.graph.set_flag(v, true);
            }
        }
        if let Some(flags) = keep {
            debug_assert!((0..n).all(|i| flags[i] == self.graph.in_mis(VertexId(i as u32))));
        }
        for &v in &order {
            if self.graph.in_mis(v) && self.graph.degree(v) > 0 {
                update_neighbors(&mut self.graph, v, 1, OpKind::Rebuild);
                update_two_hop(&mut self.graph, v, 1, OpKind::Rebuild);
            }
        }
    }

    fn join(&mut self, v: VertexId, report: &mut AdjustmentReport) {
        let before = self.graph.ops().total;
        self.graph.set_flag(v, true);
        update_neighbors(&mut self.graph, v, 1, OpKind::MisUpdate);
        update_two_hop(&mut self.graph, v, 1, OpKind::MisUpdate);
        self.ledger.on_join(v, self.graph.ops().total - before);
        report.inserted.push(v);
    }

    fn leave(&mut self, v: VertexId, report: &mut AdjustmentReport) {
        self.graph.set_flag(v, false);
        update_neighbors(&mut self.graph, v, -1, OpKind::MisUpdate);
        update_two_hop(&mut self.graph, v, -1, OpKind::MisUpdate);
        self.ledger.on_leave(v);
        report.removed.push(v);
    }

    /// `b` lost an MIS neighbor; it joins if nothing else dominates it.
    fn try_free(&mut self, b: VertexId, report: &mut AdjustmentReport) {
        if self.graph.mis_nei(b) != 0 {
            return;
        }
        if self.graph.class_of(b) == DegreeClass::Low {
            let deg = self.graph.degree(b);
            self.graph.count_op(OpKind::Resolution, deg);
            if self.graph.neighbors(b).any(|x| self.graph.in_mis(x)) {
                return;
            }
        }
        self.join(b, report);
    }

    /// Resolves `root`, which just left the MIS, and everything its
    /// resolution evicts.
    fn cascade(&mut self, root: VertexId, report: &mut AdjustmentReport) -> Result<(), EngineError> {
        let limit = 4 * self.graph.vertex_count() + 16;
        let mut stack = vec![root];
        let mut processed = 0;
        while let Some(x) = stack.pop() {
            if self.graph.in_mis(x) {
                continue;
            }
            processed += 1;
            if processed > limit {
                return Err(EngineError::Runaway);
            }
            let marked = self.resolve(x, report);
            stack.extend(marked.into_iter().rev());
        }
        Ok(())
    }

    /// Restores maximality around the removed vertex `x`. Returns the vertices
    /// evicted by a registry sweep, already out of the MIS.
    fn resolve(&mut self, x: VertexId, report: &mut AdjustmentReport) -> Vec<VertexId> {
        let mut cand: Vec<VertexId> = self.graph.record(x).neighbors.non_low().collect();
        cand.sort_unstable();
        self.graph.count_op(OpKind::Resolution, cand.len() as u64 + 1);
        for w in cand {
            if !self.graph.in_mis(w) && self.graph.mis_nei(w) == 0 {
                self.join(w, report);
            }
        }

        let zero = &self.graph.record(x).two_hop_zero;
        let scanned = zero.len() as u64;
        let mut l2: Vec<VertexId> = zero
            .iter()
            .copied()
            .filter(|&w| !self.graph.in_mis(w))
            .collect();
        l2.sort_unstable();
        self.graph.count_op(OpKind::Resolution, scanned);
        if l2.is_empty() {
            return Vec::new();
        }
        let cfg = *self.graph.epoch();
        if l2.len() as u64 <= 4 * cfg.t_high {
            let l1: Vec<VertexId> = l2
                .into_iter()
                .filter(|&w| self.graph.mis_nei(w) == 0)
                .collect();
            self.graph.count_op(OpKind::Resolution, scanned);
            if l1.len() as u64 <= 4 * cfg.t_medhigh {
                self.paths.exact_scan += 1;
                let mut free = Vec::new();
                for w in l1 {
                    let deg = self.graph.degree(w);
                    self.graph.count_op(OpKind::Resolution, deg);
                    if self.graph.neighbors(w).all(|y| !self.graph.in_mis(y)) {
                        free.push(w);
                    }
                }
                for w in free {
                    if !self.graph.in_mis(w) && self.graph.mis_nei(w) == 0 {
                        self.join(w, report);
                    }
                }
                Vec::new()
            } else {
                self.paths.greedy_high_sweep += 1;
                let mut inserted = 0;
                for w in l1 {
                    if self.graph.mis_nei(w) == 0 {
                        self.join(w, report);
                        inserted += 1;
                    }
                }
                self.sweep(&[DegreeClass::High], inserted, report)
            }
        } else {
            self.paths.greedy_wide_sweep += 1;
            let base: Vec<u64> = l2.iter().map(|&w| self.graph.mis_nei(w)).collect();
            self.graph.count_op(OpKind::Resolution, l2.len() as u64);
            let mut inserted = 0;
            for (w, b) in l2.into_iter().zip(base) {
                if self.graph.mis_nei(w) == b {
                    self.join(w, report);
                    inserted += 1;
                }
            }
            self.sweep(&[DegreeClass::High, DegreeClass::MedHigh], inserted, report)
        }
    }

    /// Evicts every MIS member of the given classes that has an MIS neighbor.
    fn sweep(
        &mut self,
        classes: &[DegreeClass],
        inserted: usize,
        report: &mut AdjustmentReport,
    ) -> Vec<VertexId> {
        let mut marked = Vec::new();
        for &c in classes {
            self.graph
                .count_op(OpKind::Resolution, self.graph.registry_len(c) as u64);
            marked.extend(
                self.graph
                    .registry(c)
                    .filter(|&y| self.graph.in_mis(y) && self.graph.mis_nei(y) > 0),
            );
        }
        marked.sort_unstable();
        self.ledger.record_sweep(inserted, marked.len());
        for &y in &marked {
            self.graph.set_flag(y, false);
        }
        for &y in &marked {
            update_neighbors(&mut self.graph, y, -1, OpKind::MisUpdate);
            update_two_hop(&mut self.graph, y, -1, OpKind::MisUpdate);
            self.ledger.on_leave(y);
            report.removed.push(y);
        }
        marked
    }
}

fn budget_unit(cfg: &EpochConfig) -> u64 {
    8 * cfg.t_high
}

/// Adjusts `mis_nei` of the neighbors of `u` after `u` joined (`sign = 1`) or
/// left (`sign = -1`). Low neighbors of a High vertex do not track it.
pub(crate) fn update_neighbors(g: &mut DynGraph, u: VertexId, sign: i64, kind: OpKind) {
    let targets: Vec<VertexId> = if g.class_of(u) == DegreeClass::High {
        g.record(u).neighbors.non_low().collect()
    } else {
        g.neighbor_vec(u)
    };
    g.count_op(kind, targets.len() as u64 + 1);
    for x in targets {
        g.rec_mut(x).adjust_mis_nei(sign);
    }
}

/// Adjusts the two-hop counters kept for each Low neighbor of `u`. Only MedLow
/// and Low vertices are tracked by those counters.
pub(crate) fn update_two_hop(g: &mut DynGraph, u: VertexId, sign: i64, kind: OpKind) {
    if !g.class_of(u).counts_for_two_hop() {
        return;
    }
    for w in g.neighbors_in_vec(u, DegreeClass::Low) {
        let nbrs = g.neighbor_vec(w);
        g.count_op(kind, nbrs.len() as u64 + 1);
        for x in nbrs {
            g.rec_mut(x).adjust_two_hop(w, sign);
        }
    }
}

impl MisEngine for SublinearEngine {
    fn apply(&mut self, update: &Update) -> Result<AdjustmentReport, EngineError> {
        let index = self.next_index;
        let before = self.graph.ops().total;
        let mut report = AdjustmentReport::new(index);
        match *update {
            Update::InsertEdge(u, v) => {
                let change = self.graph.insert_edge_raw(u, v)?;
                if change.conflict {
                    let t = u.min(v);
                    self.leave(t, &mut report);
                    self.cascade(t, &mut report)?;
                }
            }
            Update::DeleteEdge(u, v) => {
                let (iu, iv) = (self.graph.in_mis(u), self.graph.in_mis(v));
                if iu && iv && self.graph.has_edge(u, v) {
                    return Err(EngineError::IndependenceBroken(u, v));
                }
                self.graph.delete_edge_raw(u, v)?;
                if iu != iv {
                    self.try_free(if iu { v } else { u }, &mut report);
                }
            }
            Update::InsertVertex(_) | Update::DeleteVertex(_) => {
                return Err(EngineError::VertexUpdateUnsupported)
            }
        }
        self.next_index += 1;
        report.ops = self.graph.ops().total - before;
        self.ledger.record_update(&report);
        if self.manage_epochs && self.epoch_violated() {
            self.start_epoch(EpochConfig::new(self.graph.edge_count(), index + 1));
            report.new_epoch = true;
        }
        Ok(report)
    }

    fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    fn edge_count(&self) -> u64 {
        self.graph.edge_count()
    }

    fn in_mis(&self, v: VertexId) -> bool {
        self.graph.in_mis(v)
    }

    fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    fn active_kind(&self) -> EngineKind {
        EngineKind::Sublinear
    }

    fn audit(&self) -> Vec<AuditFinding> {
        let mut f = check_mis(&self.graph, |v| self.graph.in_mis(v));
        f.extend(audit_graph(&self.graph));
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn ins(e: &mut SublinearEngine, a: u32, b: u32) -> AdjustmentReport {
        let r = e.apply(&Update::InsertEdge(v(a), v(b))).unwrap();
        assert!(e.audit().is_empty(), "{:?}", e.audit());
        r
    }

    fn del(e: &mut SublinearEngine, a: u32, b: u32) -> AdjustmentReport {
        let r = e.apply(&Update::DeleteEdge(v(a), v(b))).unwrap();
        assert!(e.audit().is_empty(), "{:?}", e.audit());
        r
    }

    #[test]
    fn conflicting_insert_evicts_lower_id() {
        let mut e = SublinearEngine::new(2);
        let r = ins(&mut e, 1, 0);
        assert_eq!(r.removed, vec![v(0)]);
        assert!(r.inserted.is_empty());
        assert_eq!(e.mis(), vec![v(1)]);
    }

    #[test]
    fn star_center_removal_frees_leaves() {
        let edges: Vec<_> = (1..=4).map(|l| (v(0), v(l))).collect();
        let mut e = SublinearEngine::from_edges(6, &edges).unwrap();
        assert_eq!(e.mis(), vec![v(0), v(5)]);
        let r = ins(&mut e, 0, 5);
        assert_eq!(r.removed, vec![v(0)]);
        let mut got = r.inserted.clone();
        got.sort();
        assert_eq!(got, vec![v(1), v(2), v(3), v(4)]);
    }

    #[test]
    fn deleting_last_mis_neighbor_frees_vertex() {
        let mut e = SublinearEngine::new(3);
        ins(&mut e, 0, 1);
        assert_eq!(e.mis(), vec![v(1), v(2)]);
        let r = del(&mut e, 0, 1);
        assert_eq!(r.inserted, vec![v(0)]);
        assert!(r.removed.is_empty());
    }

    #[test]
    fn epoch_rebuild_keeps_mis() {
        let mut e = SublinearEngine::new(8);
        ins(&mut e, 0, 1);
        ins(&mut e, 2, 3);
        let before = e.mis();
        let r = ins(&mut e, 4, 5);
        assert!(r.new_epoch);
        assert_eq!(e.graph().epoch().m_snapshot, 3);
        assert_eq!(e.graph().epoch().start_index, 3);
        let mut want = before;
        want.retain(|&x| x != v(4));
        assert_eq!(e.mis(), want);
        assert_eq!(e.ledger().epochs.len(), 2);
    }

    #[test]
    fn vertex_updates_are_rejected() {
        let mut e = SublinearEngine::new(2);
        assert_eq!(
            e.apply(&Update::InsertVertex(v(0))),
            Err(EngineError::VertexUpdateUnsupported)
        );
    }

    #[test]
    fn duplicate_insert_is_an_error() {
        let mut e = SublinearEngine::new(2);
        ins(&mut e, 0, 1);
        assert!(e.apply(&Update::InsertEdge(v(1), v(0))).is_err());
    }
}
