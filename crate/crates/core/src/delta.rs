//! MIS maintenance with exact MIS-neighbor counters, for graphs whose maximum
//! degree stays below a known bound. Each update costs O(bound).

use std::collections::BTreeSet;

use crate::engine::{AdjustmentReport, EngineKind, MisEngine, Update};
use crate::error::{EngineError, GraphError};
use crate::graph::{EpochConfig, VertexId};
use crate::ledger::CostLedger;
use crate::oracle::{check_mis, AuditFinding, GraphView};

#[derive(Clone, Debug)]
pub struct DeltaEngine {
    adj: Vec<BTreeSet<VertexId>>,
    in_mis: Vec<bool>,
    counter: Vec<u64>,
    bound: Option<u64>,
    edges: u64,
    epoch: EpochConfig,
    manage_epochs: bool,
    ledger: CostLedger,
    next_index: u64,
}

impl DeltaEngine {
    /// Empty graph on `n` vertices, all in the MIS. With `bound` set,
    /// insertions that would push a degree past it are rejected.
    pub fn new(n: usize, bound: Option<u64>) -> Self {
        let epoch = EpochConfig::new(0, 0);
        let mut ledger = CostLedger::new(n);
        ledger.open_epoch(EngineKind::Delta, &epoch, bound.unwrap_or(1));
        DeltaEngine {
            adj: vec![BTreeSet::new(); n],
            in_mis: vec![true; n],
            counter: vec![0; n],
            bound,
            edges: 0,
            epoch,
            manage_epochs: true,
            ledger,
            next_index: 0,
        }
    }

    /// Takes over a graph and a valid MIS; counters are recomputed.
    pub(crate) fn from_parts(
        n: usize,
        edges: &[(VertexId, VertexId)],
        mis: Vec<bool>,
        bound: Option<u64>,
        mut ledger: CostLedger,
        start_index: u64,
    ) -> Result<Self, EngineError> {
        let mut adj = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            for x in [u, v] {
                if x.index() >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n }.into());
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u).into());
            }
            if !adj[u.index()].insert(v) {
                return Err(GraphError::DuplicateEdge(u, v).into());
            }
            adj[v.index()].insert(u);
        }
        let mut counter = vec![0; n];
        for (i, nbrs) in adj.iter().enumerate() {
            counter[i] = nbrs.iter().filter(|x| mis[x.index()]).count() as u64;
        }
        let epoch = EpochConfig::new(edges.len() as u64, start_index);
        ledger.charge_rebuild(2 * edges.len() as u64 + n as u64);
        ledger.open_epoch(EngineKind::Delta, &epoch, bound.unwrap_or(1));
        for (i, &m) in mis.iter().enumerate() {
            if !m {
                ledger.seed(VertexId(i as u32));
            }
        }
        Ok(DeltaEngine {
            adj,
            in_mis: mis,
            counter,
            bound,
            edges: edges.len() as u64,
            epoch,
            manage_epochs: true,
            ledger,
            next_index: start_index,
        })
    }

    pub(crate) fn set_manage_epochs(&mut self, on: bool) {
        self.manage_epochs = on;
    }

    pub(crate) fn into_parts(self) -> (Vec<(VertexId, VertexId)>, Vec<bool>, CostLedger) {
        let mut edges = Vec::with_capacity(self.edges as usize);
        for (i, nbrs) in self.adj.iter().enumerate() {
            let u = VertexId(i as u32);
            edges.extend(nbrs.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        (edges, self.in_mis, self.ledger)
    }

    pub fn degree(&self, v: VertexId) -> u64 {
        self.adj[v.index()].len() as u64
    }

    pub fn counter(&self, v: VertexId) -> u64 {
        self.counter[v.index()]
    }

    pub fn epoch(&self) -> &EpochConfig {
        &self.epoch
    }

    pub fn epoch_violated(&self) -> bool {
        self.epoch.is_violated_by(self.edges)
    }

    /// Epochs only matter for reporting here; nothing is rebuilt.
    pub fn start_epoch(&mut self, cfg: EpochConfig) {
        self.epoch = cfg;
        self.ledger
            .open_epoch(EngineKind::Delta, &cfg, self.bound.unwrap_or(1));
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if v.index() >= self.adj.len() {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.adj.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Flips `v` and adjusts its neighbors' counters. Returns the work done.
    fn set(&mut self, v: VertexId, join: bool) -> u64 {
        self.in_mis[v.index()] = join;
        for x in &self.adj[v.index()] {
            let c = &mut self.counter[x.index()];
            if join {
                *c += 1;
            } else {
                *c -= 1;
            }
        }
        self.adj[v.index()].len() as u64 + 1
    }

    fn insert(&mut self, u: VertexId, v: VertexId, r: &mut AdjustmentReport) -> Result<(), EngineError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u).into());
        }
        if self.adj[u.index()].contains(&v) {
            return Err(GraphError::DuplicateEdge(u, v).into());
        }
        if let Some(bound) = self.bound {
            for x in [u, v] {
                if self.degree(x) + 1 > bound {
                    return Err(EngineError::DegreeBoundExceeded { vertex: x, bound });
                }
            }
        }
        self.adj[u.index()].insert(v);
        self.adj[v.index()].insert(u);
        self.edges += 1;
        r.ops += 2;
        if self.in_mis[u.index()] {
            self.counter[v.index()] += 1;
        }
        if self.in_mis[v.index()] {
            self.counter[u.index()] += 1;
        }
        if self.in_mis[u.index()] && self.in_mis[v.index()] {
            let t = u.min(v);
            r.ops += self.set(t, false);
            self.ledger.on_leave(t);
            r.removed.push(t);
            let nbrs: Vec<VertexId> = self.adj[t.index()].iter().copied().collect();
            r.ops += nbrs.len() as u64;
            for w in nbrs {
                if !self.in_mis[w.index()] && self.counter[w.index()] == 0 {
                    let cost = self.set(w, true);
                    r.ops += cost;
                    self.ledger.on_join(w, cost);
                    r.inserted.push(w);
                }
            }
        }
        Ok(())
    }

    fn delete(&mut self, u: VertexId, v: VertexId, r: &mut AdjustmentReport) -> Result<(), EngineError> {
        self.check(u)?;
        self.check(v)?;
        if !self.adj[u.index()].contains(&v) {
            return Err(GraphError::MissingEdge(u, v).into());
        }
        let (iu, iv) = (self.in_mis[u.index()], self.in_mis[v.index()]);
        if iu && iv {
            return Err(EngineError::IndependenceBroken(u, v));
        }
        self.adj[u.index()].remove(&v);
        self.adj[v.index()].remove(&u);
        self.edges -= 1;
        r.ops += 2;
        if iu != iv {
            let b = if iu { v } else { u };
            self.counter[b.index()] -= 1;
            if self.counter[b.index()] == 0 {
                let cost = self.set(b, true);
                r.ops += cost;
                self.ledger.on_join(b, cost);
                r.inserted.push(b);
            }
        }
        Ok(())
    }
}

impl GraphView for DeltaEngine {
    fn vertex_count(&self) -> usize {
        self.adj.len()
    }
    fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v.index()].iter().copied()
    }
}

impl MisEngine for DeltaEngine {
    fn apply(&mut self, update: &Update) -> Result<AdjustmentReport, EngineError> {
        let index = self.next_index;
        let mut r = AdjustmentReport::new(index);
        match *update {
            Update::InsertEdge(u, v) => self.insert(u, v, &mut r)?,
            Update::DeleteEdge(u, v) => self.delete(u, v, &mut r)?,
            Update::InsertVertex(_) | Update::DeleteVertex(_) => {
                return Err(EngineError::VertexUpdateUnsupported)
            }
        }
        self.next_index += 1;
        self.ledger.record_update(&r);
        if self.manage_epochs && self.epoch_violated() {
            self.start_epoch(EpochConfig::new(self.edges, index + 1));
            r.new_epoch = true;
        }
        Ok(r)
    }

    fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    fn edge_count(&self) -> u64 {
        self.edges
    }

    fn in_mis(&self, v: VertexId) -> bool {
        self.in_mis[v.index()]
    }

    fn ledger(&self) -> &CostLedger {
        &self.ledger
    }

    fn active_kind(&self) -> EngineKind {
        EngineKind::Delta
    }

    fn audit(&self) -> Vec<AuditFinding> {
        let mut f = check_mis(self, |v| self.in_mis[v.index()]);
        for (i, nbrs) in self.adj.iter().enumerate() {
            let expected = nbrs.iter().filter(|x| self.in_mis[x.index()]).count() as u64;
            if expected != self.counter[i] {
                f.push(AuditFinding::Inv1Mismatch {
                    vertex: VertexId(i as u32),
                    stored: self.counter[i],
                    expected,
                });
            }
        }
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    fn run(e: &mut DeltaEngine, u: Update) -> AdjustmentReport {
        let r = e.apply(&u).unwrap();
        assert!(e.audit().is_empty());
        r
    }

    #[test]
    fn isolated_pair_conflict() {
        let mut e = DeltaEngine::new(2, Some(4));
        let r = run(&mut e, Update::InsertEdge(v(0), v(1)));
        assert_eq!(r.removed, vec![v(0)]);
        assert!(r.inserted.is_empty());
        assert_eq!(e.mis(), vec![v(1)]);
    }

    #[test]
    fn star_center_eviction() {
        let edges: Vec<_> = (1..=4).map(|l| (v(0), v(l))).collect();
        let mut mis = vec![false; 6];
        mis[0] = true;
        mis[5] = true;
        let mut e =
            DeltaEngine::from_parts(6, &edges, mis, Some(5), CostLedger::new(6), 0).unwrap();
        assert!(e.audit().is_empty());
        let r = run(&mut e, Update::InsertEdge(v(0), v(5)));
        assert_eq!(r.removed, vec![v(0)]);
        assert_eq!(r.inserted, vec![v(1), v(2), v(3), v(4)]);
        assert_eq!(e.ledger().budget_shortfall, 0);
    }

    #[test]
    fn deletion_frees_endpoint() {
        let mut e = DeltaEngine::new(3, None);
        run(&mut e, Update::InsertEdge(v(0), v(1)));
        let r = run(&mut e, Update::DeleteEdge(v(0), v(1)));
        assert_eq!(r.inserted, vec![v(0)]);
    }

    #[test]
    fn degree_bound_enforced() {
        let mut e = DeltaEngine::new(4, Some(2));
        run(&mut e, Update::InsertEdge(v(0), v(1)));
        run(&mut e, Update::InsertEdge(v(0), v(2)));
        assert_eq!(
            e.apply(&Update::InsertEdge(v(0), v(3))),
            Err(EngineError::DegreeBoundExceeded {
                vertex: v(0),
                bound: 2
            })
        );
        assert_eq!(e.edge_count(), 2);
    }
}
