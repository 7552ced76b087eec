//! Picks the engine per epoch: the degree-bounded one while the declared
//! bound is at most the epoch's High threshold, the sublinear one otherwise.

use crate::delta::DeltaEngine;
use crate::engine::{AdjustmentReport, EngineKind, MisEngine, Update};
use crate::error::EngineError;
use crate::graph::{EpochConfig, VertexId};
use crate::ledger::CostLedger;
use crate::oracle::AuditFinding;
use crate::sublinear::SublinearEngine;

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
enum Active {
    Delta(DeltaEngine),
    Sublinear(SublinearEngine),
}

#[derive(Clone, Debug)]
pub struct AutoEngine {
    active: Option<Active>,
    bound: Option<u64>,
    n: usize,
    next_index: u64,
    switches: u64,
}

pub fn preferred_engine(bound: Option<u64>, cfg: &EpochConfig) -> EngineKind {
    match bound {
        Some(d) if d <= cfg.t_high => EngineKind::Delta,
        _ => EngineKind::Sublinear,
    }
}

impl AutoEngine {
    pub fn new(n: usize, bound: Option<u64>) -> Self {
        let cfg = EpochConfig::new(0, 0);
        let active = match preferred_engine(bound, &cfg) {
            EngineKind::Delta => {
                let mut e = DeltaEngine::new(n, bound);
                e.set_manage_epochs(false);
                Active::Delta(e)
            }
            EngineKind::Sublinear => {
                let mut e = SublinearEngine::new(n);
                e.set_manage_epochs(false);
                Active::Sublinear(e)
            }
        };
        AutoEngine {
            active: Some(active),
            bound,
            n,
            next_index: 0,
            switches: 0,
        }
    }

    pub fn switches(&self) -> u64 {
        self.switches
    }

    fn engine(&self) -> &dyn MisEngine {
        match self.active.as_ref().expect("engine present") {
            Active::Delta(e) => e,
            Active::Sublinear(e) => e,
        }
    }

    fn degree(&self, v: VertexId) -> u64 {
        match self.active.as_ref().expect("engine present") {
            Active::Delta(e) => e.degree(v),
            Active::Sublinear(e) => e.degree(v),
        }
    }

    fn switch_to(&mut self, kind: EngineKind, start_index: u64) -> Result<(), EngineError> {
        let (edges, flags, ledger): (_, _, CostLedger) = match self.active.take().expect("engine present") {
            Active::Delta(e) => e.into_parts(),
            Active::Sublinear(e) => e.into_parts(),
        };
        let active = match kind {
            EngineKind::Delta => {
                let mut e =
                    DeltaEngine::from_parts(self.n, &edges, flags, self.bound, ledger, start_index)?;
                e.set_manage_epochs(false);
                Active::Delta(e)
            }
            EngineKind::Sublinear => {
                let mut e = SublinearEngine::from_parts(
                    self.n,
                    &edges,
                    Some(&flags),
                    ledger,
                    start_index,
                )?;
                e.set_manage_epochs(false);
                Active::Sublinear(e)
            }
        };
        self.active = Some(active);
        self.switches += 1;
        Ok(())
    }
}

impl MisEngine for AutoEngine {
    fn apply(&mut self, update: &Update) -> Result<AdjustmentReport, EngineError> {
        if let (Some(bound), Update::InsertEdge(u, v)) = (self.bound, update) {
            for &x in [u, v] {
                if x.index() < self.n && self.degree(x) + 1 > bound {
                    return Err(EngineError::DegreeBoundExceeded { vertex: x, bound });
                }
            }
        }
        let mut report = match self.active.as_mut().expect("engine present") {
            Active::Delta(e) => e.apply(update)?,
            Active::Sublinear(e) => e.apply(update)?,
        };
        let index = self.next_index;
        self.next_index += 1;
        let violated = match self.active.as_ref().expect("engine present") {
            Active::Delta(e) => e.epoch_violated(),
            Active::Sublinear(e) => e.epoch_violated(),
        };
        if violated {
            let cfg = EpochConfig::new(self.edge_count(), index + 1);
            let want = preferred_engine(self.bound, &cfg);
            if want == self.active_kind() {
                match self.active.as_mut().expect("engine present") {
                    Active::Delta(e) => e.start_epoch(cfg),
                    Active::Sublinear(e) => e.start_epoch(cfg),
                }
            } else {
                self.switch_to(want, index + 1)?;
            }
            report.new_epoch = true;
        }
        Ok(report)
    }

    fn vertex_count(&self) -> usize {
        self.n
    }

    fn edge_count(&self) -> u64 {
        self.engine().edge_count()
    }

    fn in_mis(&self, v: VertexId) -> bool {
        self.engine().in_mis(v)
    }

    fn ledger(&self) -> &CostLedger {
        self.engine().ledger()
    }

    fn active_kind(&self) -> EngineKind {
        self.engine().active_kind()
    }

    fn audit(&self) -> Vec<AuditFinding> {
        self.engine().audit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn no_bound_means_sublinear_throughout() {
        let mut e = AutoEngine::new(10, None);
        for i in 0..9 {
            e.apply(&Update::InsertEdge(v(i), v(i + 1))).unwrap();
        }
        assert!(e.ledger().epochs.iter().all(|x| x.engine == EngineKind::Sublinear));
        assert_eq!(e.switches(), 0);
    }

    #[test]
    fn switches_once_when_threshold_reaches_bound() {
        // bound 4: t_high >= 4 once m_snapshot >= 5
        let mut e = AutoEngine::new(40, Some(4));
        assert_eq!(e.active_kind(), EngineKind::Sublinear);
        for i in 0..39 {
            e.apply(&Update::InsertEdge(v(i), v(i + 1))).unwrap();
            assert!(e.audit().is_empty());
        }
        assert_eq!(e.active_kind(), EngineKind::Delta);
        assert_eq!(e.switches(), 1);
        let kinds: Vec<_> = e.ledger().epochs.iter().map(|x| (x.engine, x.m_snapshot)).collect();
        let first_delta = kinds.iter().position(|k| k.0 == EngineKind::Delta).unwrap();
        assert!(kinds[first_delta..].iter().all(|k| k.0 == EngineKind::Delta));
        assert!(kinds[first_delta].1 >= 5);
        assert!(kinds[..first_delta].iter().all(|k| k.1 < 5));
    }

    #[test]
    fn bound_enforced_in_sublinear_mode() {
        let mut e = AutoEngine::new(4, Some(2));
        assert_eq!(e.active_kind(), EngineKind::Sublinear);
        e.apply(&Update::InsertEdge(v(0), v(1))).unwrap();
        e.apply(&Update::InsertEdge(v(0), v(2))).unwrap();
        assert!(matches!(
            e.apply(&Update::InsertEdge(v(0), v(3))),
            Err(EngineError::DegreeBoundExceeded { .. })
        ));
    }
}
