//! Dynamic graph with degree estimates, degree classes and the counters the
//! sublinear engine relies on.
//!
//! Every vertex keeps its neighbors in four buckets keyed by the neighbor's
//! degree class, so the engine can enumerate "non-Low neighbors" or "Low
//! neighbors" without touching the rest. Counters:
//!
//! * `mis_nei[v]`: MIS neighbors of `v`, where a Low vertex ignores High ones.
//! * `two_hop[v][w]` for each Low neighbor `w` of `v`: MIS neighbors of `w`
//!   that are MedLow or Low.

use std::fmt;

use indexmap::{IndexMap, IndexSet};
use num_integer::Roots;

use crate::error::GraphError;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DegreeClass {
    Low,
    MedLow,
    MedHigh,
    High,
}

impl DegreeClass {
    pub const ALL: [DegreeClass; 4] = [
        DegreeClass::Low,
        DegreeClass::MedLow,
        DegreeClass::MedHigh,
        DegreeClass::High,
    ];

    fn slot(self) -> usize {
        self as usize
    }

    /// Whether an MIS vertex of this class is counted by two-hop counters.
    pub fn counts_for_two_hop(self) -> bool {
        matches!(self, DegreeClass::Low | DegreeClass::MedLow)
    }

    /// Whether a vertex of class `self` counts an MIS neighbor of class `other`
    /// in its `mis_nei`.
    pub fn counts_neighbor(self, other: DegreeClass) -> bool {
        self != DegreeClass::Low || other != DegreeClass::High
    }

    pub fn name(self) -> &'static str {
        match self {
            DegreeClass::Low => "low",
            DegreeClass::MedLow => "medlow",
            DegreeClass::MedHigh => "medhigh",
            DegreeClass::High => "high",
        }
    }
}

/// Smallest `t` with `t^k >= x`.
fn ceil_root(x: u128, k: u32) -> u128 {
    let r = x.nth_root(k);
    if r.pow(k) >= x {
        r
    } else {
        r + 1
    }
}

/// Thresholds frozen for one epoch.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct EpochConfig {
    pub m_snapshot: u64,
    pub t_high: u64,
    pub t_medhigh: u64,
    pub t_medlow: u64,
    pub start_index: u64,
}

impl EpochConfig {
    /// Thresholds for a snapshot of `edges` edges; an empty graph is treated as
    /// having one edge.
    pub fn new(edges: u64, start_index: u64) -> Self {
        let m = edges.max(1);
        let m128 = m as u128;
        EpochConfig {
            m_snapshot: m,
            t_high: ceil_root(m128 * m128 * m128, 4) as u64,
            t_medhigh: ceil_root(m128, 2) as u64,
            t_medlow: ceil_root(m128, 4) as u64,
            start_index,
        }
    }

    pub fn classify(&self, est: u64) -> DegreeClass {
        if est >= self.t_high {
            DegreeClass::High
        } else if est >= self.t_medhigh {
            DegreeClass::MedHigh
        } else if est >= self.t_medlow {
            DegreeClass::MedLow
        } else {
            DegreeClass::Low
        }
    }

    /// True once the live edge count has drifted by more than a factor of two.
    pub fn is_violated_by(&self, edges: u64) -> bool {
        let m = edges.max(1);
        m > 2 * self.m_snapshot || 2 * m < self.m_snapshot
    }
}

/// Neighbors bucketed by their degree class, each with the neighbor's degree
/// estimate as last announced.
#[derive(Clone, Debug, Default)]
pub struct NeighborSet {
    buckets: [IndexMap<VertexId, u64>; 4],
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.buckets.iter().map(|b| b.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.buckets.iter().any(|b| b.contains_key(&v))
    }

    pub fn class_of(&self, v: VertexId) -> Option<DegreeClass> {
        DegreeClass::ALL
            .into_iter()
            .find(|c| self.buckets[c.slot()].contains_key(&v))
    }

    pub fn cached_degree(&self, v: VertexId) -> Option<u64> {
        self.buckets.iter().find_map(|b| b.get(&v).copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.buckets.iter().flat_map(|b| b.keys().copied())
    }

    pub fn in_class(&self, c: DegreeClass) -> impl Iterator<Item = VertexId> + '_ {
        self.buckets[c.slot()].keys().copied()
    }

    pub fn count_in(&self, c: DegreeClass) -> usize {
        self.buckets[c.slot()].len()
    }

    /// Neighbors that are not Low.
    pub fn non_low(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.buckets[1..].iter().flat_map(|b| b.keys().copied())
    }

    pub fn insert(&mut self, v: VertexId, class: DegreeClass, est: u64) {
        self.buckets[class.slot()].insert(v, est);
    }

    pub fn remove(&mut self, v: VertexId) -> Option<(DegreeClass, u64)> {
        for c in DegreeClass::ALL {
            if let Some(e) = self.buckets[c.slot()].swap_remove(&v) {
                return Some((c, e));
            }
        }
        None
    }

    /// Re-files `v` under `class` with estimate `est`.
    pub fn update(&mut self, v: VertexId, class: DegreeClass, est: u64) {
        if self.buckets[class.slot()].contains_key(&v) {
            self.buckets[class.slot()].insert(v, est);
        } else {
            self.remove(v);
            self.insert(v, class, est);
        }
    }

    pub fn sorted(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.iter().collect();
        v.sort_unstable();
        v
    }
}

/// Per-vertex state.
#[derive(Clone, Debug)]
pub struct VertexRecord {
    pub neighbors: NeighborSet,
    pub degree_est: u64,
    pub class: DegreeClass,
    pub in_mis: bool,
    pub mis_nei: u64,
    pub two_hop: IndexMap<VertexId, u64>,
    /// Keys of `two_hop` whose value is zero.
    pub two_hop_zero: IndexSet<VertexId>,
}

impl Default for VertexRecord {
    fn default() -> Self {
        VertexRecord {
            neighbors: NeighborSet::default(),
            degree_est: 0,
            class: DegreeClass::Low,
            in_mis: false,
            mis_nei: 0,
            two_hop: IndexMap::new(),
            two_hop_zero: IndexSet::new(),
        }
    }
}

impl VertexRecord {
    pub fn degree(&self) -> u64 {
        self.neighbors.len() as u64
    }

    pub fn set_two_hop(&mut self, w: VertexId, value: u64) {
        self.two_hop.insert(w, value);
        if value == 0 {
            self.two_hop_zero.insert(w);
        } else {
            self.two_hop_zero.swap_remove(&w);
        }
    }

    pub fn adjust_two_hop(&mut self, w: VertexId, delta: i64) {
        let cur = self.two_hop.get(&w).copied().unwrap_or(0);
        let next = cur
            .checked_add_signed(delta)
            .expect("two-hop counter underflow");
        self.set_two_hop(w, next);
    }

    pub fn drop_two_hop(&mut self, w: VertexId) {
        self.two_hop.swap_remove(&w);
        self.two_hop_zero.swap_remove(&w);
    }

    pub fn adjust_mis_nei(&mut self, delta: i64) {
        self.mis_nei = self
            .mis_nei
            .checked_add_signed(delta)
            .expect("mis_nei underflow");
    }

    /// Degree estimate refresh: returns true if the estimate changed.
    pub fn refresh_estimate(&mut self) -> bool {
        let d = self.degree();
        let e = self.degree_est;
        if d > 2 * e || 2 * d < e {
            self.degree_est = d;
            true
        } else {
            false
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ClassChange {
    pub vertex: VertexId,
    pub from: DegreeClass,
    pub to: DegreeClass,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeChangeReport {
    pub class_changes: Vec<ClassChange>,
    /// Both endpoints of an inserted edge were in the MIS.
    pub conflict: bool,
}

/// Elementary operations performed by graph maintenance.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub total: u64,
    pub edge_local: u64,
    pub refresh: u64,
    pub class_change: u64,
    pub mis_update: u64,
    pub resolution: u64,
    pub rebuild: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub(crate) enum OpKind {
    EdgeLocal,
    Refresh,
    ClassChange,
    MisUpdate,
    Resolution,
    Rebuild,
}

impl OpCounter {
    pub(crate) fn add(&mut self, kind: OpKind, n: u64) {
        self.total += n;
        let slot = match kind {
            OpKind::EdgeLocal => &mut self.edge_local,
            OpKind::Refresh => &mut self.refresh,
            OpKind::ClassChange => &mut self.class_change,
            OpKind::MisUpdate => &mut self.mis_update,
            OpKind::Resolution => &mut self.resolution,
            OpKind::Rebuild => &mut self.rebuild,
        };
        *slot += n;
    }
}

#[derive(Clone, Debug)]
pub struct DynGraph {
    epoch: EpochConfig,
    pub(crate) records: Vec<VertexRecord>,
    registry: [IndexSet<VertexId>; 4],
    edges: u64,
    pub(crate) ops: OpCounter,
}

impl DynGraph {
    /// Empty graph on `n` vertices, none in the MIS.
    pub fn new(n: usize, epoch: EpochConfig) -> Self {
        let mut registry: [IndexSet<VertexId>; 4] = Default::default();
        let class = epoch.classify(0);
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            let r = VertexRecord {
                class,
                ..VertexRecord::default()
            };
            records.push(r);
            registry[class.slot()].insert(VertexId(i as u32));
        }
        DynGraph {
            epoch,
            records,
            registry,
            edges: 0,
            ops: OpCounter::default(),
        }
    }

    /// Graph with the given edges under `epoch`, estimates exact, counters
    /// zero and no MIS flags set.
    pub fn from_edges(
        n: usize,
        edges: &[(VertexId, VertexId)],
        epoch: EpochConfig,
    ) -> Result<Self, GraphError> {
        let mut g = DynGraph::new(n, epoch);
        for &(u, v) in edges {
            g.check(u)?;
            g.check(v)?;
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if g.has_edge(u, v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            g.records[u.index()].neighbors.insert(v, DegreeClass::Low, 0);
            g.records[v.index()].neighbors.insert(u, DegreeClass::Low, 0);
            g.edges += 1;
        }
        g.reset_epoch(epoch);
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.records.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    pub fn epoch(&self) -> &EpochConfig {
        &self.epoch
    }

    pub fn ops(&self) -> &OpCounter {
        &self.ops
    }

    pub fn record(&self, v: VertexId) -> &VertexRecord {
        &self.records[v.index()]
    }

    pub(crate) fn rec_mut(&mut self, v: VertexId) -> &mut VertexRecord {
        &mut self.records[v.index()]
    }

    pub fn class_of(&self, v: VertexId) -> DegreeClass {
        self.records[v.index()].class
    }

    pub fn degree(&self, v: VertexId) -> u64 {
        self.records[v.index()].degree()
    }

    pub fn in_mis(&self, v: VertexId) -> bool {
        self.records[v.index()].in_mis
    }

    pub fn mis_nei(&self, v: VertexId) -> u64 {
        self.records[v.index()].mis_nei
    }

    pub fn two_hop(&self, v: VertexId, w: VertexId) -> Option<u64> {
        self.records[v.index()].two_hop.get(&w).copied()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.records[u.index()].neighbors.contains(v)
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.records[v.index()].neighbors.iter()
    }

    pub fn registry(&self, c: DegreeClass) -> impl Iterator<Item = VertexId> + '_ {
        self.registry[c.slot()].iter().copied()
    }

    pub fn registry_len(&self, c: DegreeClass) -> usize {
        self.registry[c.slot()].len()
    }

    pub fn mis_members(&self) -> Vec<VertexId> {
        (0..self.records.len())
            .filter(|&i| self.records[i].in_mis)
            .map(|i| VertexId(i as u32))
            .collect()
    }

    /// Sorted edge list with `u < v`.
    pub fn edge_list(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edges as usize);
        for (i, r) in self.records.iter().enumerate() {
            let u = VertexId(i as u32);
            out.extend(r.neighbors.iter().filter(|&v| u < v).map(|v| (u, v)));
        }
        out.sort_unstable();
        out
    }

    pub(crate) fn count_op(&mut self, kind: OpKind, n: u64) {
        self.ops.add(kind, n);
    }

    fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if v.index() >= self.records.len() {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.records.len(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn neighbor_vec(&self, v: VertexId) -> Vec<VertexId> {
        self.records[v.index()].neighbors.iter().collect()
    }

    pub(crate) fn neighbors_in_vec(&self, v: VertexId, c: DegreeClass) -> Vec<VertexId> {
        self.records[v.index()].neighbors.in_class(c).collect()
    }

    pub(crate) fn set_flag(&mut self, v: VertexId, in_mis: bool) {
        self.records[v.index()].in_mis = in_mis;
    }

    /// MIS neighbors of `w` that are MedLow or Low.
    fn two_hop_count(&mut self, w: VertexId) -> u64 {
        let nbrs = self.neighbor_vec(w);
        self.count_op(OpKind::EdgeLocal, nbrs.len() as u64);
        nbrs.iter()
            .filter(|&&x| {
                let r = &self.records[x.index()];
                r.in_mis && r.class.counts_for_two_hop()
            })
            .count() as u64
    }

    pub fn insert_edge_raw(
        &mut self,
        u: VertexId,
        v: VertexId,
    ) -> Result<EdgeChangeReport, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Err(GraphError::DuplicateEdge(u, v));
        }
        let (cu, eu) = (self.class_of(u), self.records[u.index()].degree_est);
        let (cv, ev) = (self.class_of(v), self.records[v.index()].degree_est);
        self.rec_mut(u).neighbors.insert(v, cv, ev);
        self.rec_mut(v).neighbors.insert(u, cu, eu);
        self.edges += 1;
        self.count_op(OpKind::EdgeLocal, 2);
        self.link_counters(u, v, 1);
        self.link_counters(v, u, 1);
        let conflict = self.in_mis(u) && self.in_mis(v);
        let mut class_changes = Vec::new();
        self.refresh(u, &mut class_changes);
        self.refresh(v, &mut class_changes);
        Ok(EdgeChangeReport {
            class_changes,
            conflict,
        })
    }

    pub fn delete_edge_raw(
        &mut self,
        u: VertexId,
        v: VertexId,
    ) -> Result<EdgeChangeReport, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if !self.has_edge(u, v) {
            return Err(GraphError::MissingEdge(u, v));
        }
        self.link_counters(u, v, -1);
        self.link_counters(v, u, -1);
        self.rec_mut(u).neighbors.remove(v);
        self.rec_mut(v).neighbors.remove(u);
        self.edges -= 1;
        self.count_op(OpKind::EdgeLocal, 2);
        let mut class_changes = Vec::new();
        self.refresh(u, &mut class_changes);
        self.refresh(v, &mut class_changes);
        Ok(EdgeChangeReport {
            class_changes,
            conflict: false,
        })
    }

    /// Counter effects of `src` on `dst` when the edge between them appears
    /// (`sign = 1`) or is about to disappear (`sign = -1`).
    fn link_counters(&mut self, src: VertexId, dst: VertexId, sign: i64) {
        let cs = self.class_of(src);
        let cd = self.class_of(dst);
        let src_in = self.in_mis(src);
        if src_in && cd.counts_neighbor(cs) {
            self.rec_mut(dst).adjust_mis_nei(sign);
            self.count_op(OpKind::EdgeLocal, 1);
        }
        if cd == DegreeClass::Low {
            if src_in && cs.counts_for_two_hop() {
                for x in self.neighbor_vec(dst) {
                    if x != src {
                        self.rec_mut(x).adjust_two_hop(dst, sign);
                        self.count_op(OpKind::EdgeLocal, 1);
                    }
                }
            }
            if sign > 0 {
                let c = self.two_hop_count(dst);
                self.rec_mut(src).set_two_hop(dst, c);
            } else {
                self.rec_mut(src).drop_two_hop(dst);
            }
            self.count_op(OpKind::EdgeLocal, 1);
        }
    }

    fn refresh(&mut self, v: VertexId, changes: &mut Vec<ClassChange>) {
        if !self.rec_mut(v).refresh_estimate() {
            return;
        }
        let est = self.records[v.index()].degree_est;
        let old = self.class_of(v);
        let nbrs = self.neighbor_vec(v);
        self.count_op(OpKind::Refresh, nbrs.len() as u64 + 1);
        for &x in &nbrs {
            self.rec_mut(x).neighbors.update(v, old, est);
        }
        let new = self.epoch.classify(est);
        if new != old {
            self.change_class(v, old, new);
            changes.push(ClassChange {
                vertex: v,
                from: old,
                to: new,
            });
        }
    }

    /// Moves `v` from class `old` to `new`, restoring both counter invariants.
    fn change_class(&mut self, v: VertexId, old: DegreeClass, new: DegreeClass) {
        let est = self.records[v.index()].degree_est;
        self.rec_mut(v).class = new;
        self.registry[old.slot()].swap_remove(&v);
        self.registry[new.slot()].insert(v);
        let nbrs = self.neighbor_vec(v);
        let deg = nbrs.len() as u64;
        self.count_op(OpKind::ClassChange, deg + 1);
        for &x in &nbrs {
            self.rec_mut(x).neighbors.update(v, new, est);
        }

        let was_low = old == DegreeClass::Low;
        let is_low = new == DegreeClass::Low;
        if was_low != is_low {
            let count = nbrs
                .iter()
                .filter(|&&x| {
                    let r = &self.records[x.index()];
                    r.in_mis && new.counts_neighbor(r.class)
                })
                .count() as u64;
            self.rec_mut(v).mis_nei = count;
            self.count_op(OpKind::ClassChange, deg);
        }

        let v_in = self.in_mis(v);
        let was_high = old == DegreeClass::High;
        let is_high = new == DegreeClass::High;
        let low_nbrs = self.neighbors_in_vec(v, DegreeClass::Low);
        if v_in && was_high != is_high {
            let sign = if is_high { -1 } else { 1 };
            for &w in &low_nbrs {
                self.rec_mut(w).adjust_mis_nei(sign);
            }
            self.count_op(OpKind::ClassChange, low_nbrs.len() as u64);
        }

        if v_in && old.counts_for_two_hop() != new.counts_for_two_hop() {
            let sign = if new.counts_for_two_hop() { 1 } else { -1 };
            for &w in &low_nbrs {
                for x in self.neighbor_vec(w) {
                    self.rec_mut(x).adjust_two_hop(w, sign);
                    self.count_op(OpKind::ClassChange, 1);
                }
            }
        }

        if was_low && !is_low {
            for &x in &nbrs {
                self.rec_mut(x).drop_two_hop(v);
            }
            self.count_op(OpKind::ClassChange, deg);
        } else if !was_low && is_low {
            let c = self.two_hop_count(v);
            for &x in &nbrs {
                self.rec_mut(x).set_two_hop(v, c);
            }
            self.count_op(OpKind::ClassChange, deg);
        }
    }

    /// Starts a new epoch: estimates become exact degrees, classes, buckets and
    /// registries are recomputed, and all counters are zeroed (two-hop entries
    /// exist with value zero). MIS flags are left untouched; the caller
    /// re-accumulates counters from them.
    pub(crate) fn reset_epoch(&mut self, epoch: EpochConfig) {
        self.epoch = epoch;
        let n = self.records.len();
        let mut work = 0u64;
        for r in &mut self.records {
            r.degree_est = r.degree();
            r.class = epoch.classify(r.degree_est);
            r.mis_nei = 0;
            r.two_hop.clear();
            r.two_hop_zero.clear();
        }
        let mut registry: [IndexSet<VertexId>; 4] = Default::default();
        for i in 0..n {
            registry[self.records[i].class.slot()].insert(VertexId(i as u32));
        }
        self.registry = registry;
        for i in 0..n {
            let nbrs = self.records[i].neighbors.sorted();
            if nbrs.is_empty() {
                continue;
            }
            work += nbrs.len() as u64;
            let mut set = NeighborSet::default();
            for &x in &nbrs {
                let rx = &self.records[x.index()];
                set.insert(x, rx.class, rx.degree_est);
            }
            self.records[i].neighbors = set;
        }
        for i in 0..n {
            if self.records[i].class != DegreeClass::Low {
                continue;
            }
            let w = VertexId(i as u32);
            for x in self.records[i].neighbors.sorted() {
                self.records[x.index()].set_two_hop(w, 0);
                work += 1;
            }
        }
        self.count_op(OpKind::Rebuild, work);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::audit_graph;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    #[test]
    fn thresholds_for_perfect_powers() {
        let e = EpochConfig::new(256, 0);
        assert_eq!((e.t_high, e.t_medhigh, e.t_medlow), (64, 16, 4));
        let e = EpochConfig::new(65536, 0);
        assert_eq!((e.t_high, e.t_medhigh, e.t_medlow), (4096, 256, 16));
    }

    #[test]
    fn thresholds_round_up() {
        // 10^3 = 1000, 4th root ~ 5.62
        let e = EpochConfig::new(10, 0);
        assert_eq!((e.t_high, e.t_medhigh, e.t_medlow), (6, 4, 2));
        let e = EpochConfig::new(0, 0);
        assert_eq!(e.m_snapshot, 1);
        assert_eq!((e.t_high, e.t_medhigh, e.t_medlow), (1, 1, 1));
    }

    #[test]
    fn ceil_root_matches_linear_search() {
        for x in 0u128..3000 {
            for k in 2..=4 {
                let want = (0u128..).find(|t| t.pow(k) >= x).unwrap();
                assert_eq!(ceil_root(x, k), want, "x={x} k={k}");
            }
        }
    }

    #[test]
    fn classify_boundaries() {
        let e = EpochConfig::new(256, 0);
        assert_eq!(e.classify(64), DegreeClass::High);
        assert_eq!(e.classify(63), DegreeClass::MedHigh);
        assert_eq!(e.classify(16), DegreeClass::MedHigh);
        assert_eq!(e.classify(15), DegreeClass::MedLow);
        assert_eq!(e.classify(4), DegreeClass::MedLow);
        assert_eq!(e.classify(3), DegreeClass::Low);
        assert_eq!(e.classify(0), DegreeClass::Low);
    }

    #[test]
    fn epoch_violation_is_strict() {
        let e = EpochConfig::new(10, 0);
        assert!(!e.is_violated_by(20));
        assert!(e.is_violated_by(21));
        assert!(!e.is_violated_by(5));
        assert!(e.is_violated_by(4));
        let e = EpochConfig::new(1, 0);
        assert!(!e.is_violated_by(0));
        assert!(!e.is_violated_by(2));
        assert!(e.is_violated_by(3));
    }

    #[test]
    fn estimate_refresh_rule() {
        let mut g = DynGraph::new(12, EpochConfig::new(1000, 0));
        // degrees 1, 2, 3: est goes 0 -> 1 -> 1 (2 <= 2) -> 3
        g.insert_edge_raw(v(0), v(1)).unwrap();
        assert_eq!(g.record(v(0)).degree_est, 1);
        g.insert_edge_raw(v(0), v(2)).unwrap();
        assert_eq!(g.record(v(0)).degree_est, 1);
        g.insert_edge_raw(v(0), v(3)).unwrap();
        assert_eq!(g.record(v(0)).degree_est, 3);
        for i in 4..=9 {
            g.insert_edge_raw(v(0), v(i)).unwrap();
        }
        // degree 9: 9 > 6 triggers at 7, est 7, stays until 15
        assert_eq!(g.record(v(0)).degree_est, 7);
        for i in 4..=9 {
            g.delete_edge_raw(v(0), v(i)).unwrap();
        }
        // degree 3 < 3.5
        assert_eq!(g.record(v(0)).degree_est, 3);
        for i in 1..=3 {
            g.delete_edge_raw(v(0), v(i)).unwrap();
        }
        assert_eq!(g.record(v(0)).degree_est, 0);
    }

    #[test]
    fn rejects_invalid_edges() {
        let mut g = DynGraph::new(3, EpochConfig::new(1, 0));
        assert_eq!(
            g.insert_edge_raw(v(1), v(1)),
            Err(GraphError::SelfLoop(v(1)))
        );
        assert!(matches!(
            g.insert_edge_raw(v(0), v(3)),
            Err(GraphError::VertexOutOfRange { .. })
        ));
        g.insert_edge_raw(v(0), v(1)).unwrap();
        assert_eq!(
            g.insert_edge_raw(v(1), v(0)),
            Err(GraphError::DuplicateEdge(v(1), v(0)))
        );
        assert_eq!(
            g.delete_edge_raw(v(0), v(2)),
            Err(GraphError::MissingEdge(v(0), v(2)))
        );
    }

    #[test]
    fn counters_follow_class_changes() {
        // Thresholds for m=16: high 8, medhigh 4, medlow 2.
        let mut g = DynGraph::new(20, EpochConfig::new(16, 0));
        g.set_flag(v(0), true);
        g.set_flag(v(10), true);
        g.insert_edge_raw(v(0), v(1)).unwrap();
        g.insert_edge_raw(v(10), v(1)).unwrap();
        assert!(audit_graph(&g).is_empty());
        // Grow vertex 0 into High and back down.
        for i in 2..=16 {
            g.insert_edge_raw(v(0), v(i)).unwrap();
            assert!(audit_graph(&g).is_empty(), "after adding {i}");
        }
        assert_eq!(g.class_of(v(0)), DegreeClass::High);
        // vertex 1 is Low and ignores its High MIS neighbor
        assert_eq!(g.class_of(v(1)), DegreeClass::Low);
        assert_eq!(g.mis_nei(v(1)), 1);
        for i in (2..=16).rev() {
            g.delete_edge_raw(v(0), v(i)).unwrap();
            assert!(audit_graph(&g).is_empty(), "after removing {i}");
        }
    }

    #[test]
    fn reset_epoch_zeroes_counters_but_keeps_flags() {
        let mut g = DynGraph::new(4, EpochConfig::new(1, 0));
        g.set_flag(v(0), true);
        g.insert_edge_raw(v(0), v(1)).unwrap();
        g.insert_edge_raw(v(1), v(2)).unwrap();
        g.reset_epoch(EpochConfig::new(2, 5));
        assert!(g.in_mis(v(0)));
        assert_eq!(g.mis_nei(v(1)), 0);
        assert_eq!(g.epoch().start_index, 5);
        assert_eq!(g.record(v(1)).degree_est, 2);
    }

    #[test]
    fn neighbor_set_moves_between_buckets() {
        let mut s = NeighborSet::default();
        s.insert(v(3), DegreeClass::Low, 1);
        s.insert(v(4), DegreeClass::High, 9);
        assert_eq!(s.count_in(DegreeClass::Low), 1);
        s.update(v(3), DegreeClass::MedHigh, 5);
        assert_eq!(s.class_of(v(3)), Some(DegreeClass::MedHigh));
        assert_eq!(s.cached_degree(v(3)), Some(5));
        assert_eq!(s.non_low().count(), 2);
        assert_eq!(s.remove(v(4)), Some((DegreeClass::High, 9)));
        assert_eq!(s.len(), 1);
    }
}
