//! Reference checks: MIS validity, a plain greedy MIS, and a from-scratch
//! recomputation of every counter the engines maintain.

use std::collections::BTreeSet;
use std::fmt;

use crate::graph::{DegreeClass, DynGraph, EpochConfig, VertexId, VertexRecord};

/// Read-only adjacency access.
pub trait GraphView {
    fn vertex_count(&self) -> usize;
    fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_;
    fn is_present(&self, _v: VertexId) -> bool {
        true
    }
}

/// Plain adjacency sets; the reference graph for tests and generators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimpleGraph {
    adj: Vec<BTreeSet<VertexId>>,
    edges: usize,
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            adj: vec![BTreeSet::new(); n],
            edges: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut g = SimpleGraph::new(n);
        for &(u, v) in edges {
            g.insert(VertexId(u), VertexId(v));
        }
        g
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj[u.index()].contains(&v)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(|a| a.len()).max().unwrap_or(0)
    }

    /// Returns false if the edge was already present or is a self-loop.
    pub fn insert(&mut self, u: VertexId, v: VertexId) -> bool {
        if u == v || !self.adj[u.index()].insert(v) {
            return false;
        }
        self.adj[v.index()].insert(u);
        self.edges += 1;
        true
    }

    pub fn remove(&mut self, u: VertexId, v: VertexId) -> bool {
        if !self.adj[u.index()].remove(&v) {
            return false;
        }
        self.adj[v.index()].remove(&u);
        self.edges -= 1;
        true
    }

    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.edges);
        for (i, a) in self.adj.iter().enumerate() {
            let u = VertexId(i as u32);
            out.extend(a.iter().filter(|&&v| u < v).map(|&v| (u, v)));
        }
        out
    }
}

impl GraphView for SimpleGraph {
    fn vertex_count(&self) -> usize {
        self.adj.len()
    }
    fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v.index()].iter().copied()
    }
}

impl GraphView for DynGraph {
    fn vertex_count(&self) -> usize {
        DynGraph::vertex_count(self)
    }
    fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        DynGraph::neighbors(self, v)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuditKind {
    NotIndependent,
    NotMaximal,
    Inv1Mismatch,
    Inv2Mismatch,
    DegreeEstOut,
    ClassMismatch,
    StaleNeighborView,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AuditFinding {
    NotIndependent {
        u: VertexId,
        v: VertexId,
    },
    NotMaximal {
        v: VertexId,
    },
    Inv1Mismatch {
        vertex: VertexId,
        stored: u64,
        expected: u64,
    },
    Inv2Mismatch {
        vertex: VertexId,
        low_neighbor: VertexId,
        stored: Option<u64>,
        expected: Option<u64>,
    },
    DegreeEstOut {
        vertex: VertexId,
        degree: u64,
        estimate: u64,
    },
    ClassMismatch {
        vertex: VertexId,
        recorded: DegreeClass,
        expected: DegreeClass,
    },
    StaleNeighborView {
        vertex: VertexId,
        neighbor: VertexId,
    },
}

impl AuditFinding {
    pub fn kind(&self) -> AuditKind {
        match self {
            AuditFinding::NotIndependent { .. } => AuditKind::NotIndependent,
            AuditFinding::NotMaximal { .. } => AuditKind::NotMaximal,
            AuditFinding::Inv1Mismatch { .. } => AuditKind::Inv1Mismatch,
            AuditFinding::Inv2Mismatch { .. } => AuditKind::Inv2Mismatch,
            AuditFinding::DegreeEstOut { .. } => AuditKind::DegreeEstOut,
            AuditFinding::ClassMismatch { .. } => AuditKind::ClassMismatch,
            AuditFinding::StaleNeighborView { .. } => AuditKind::StaleNeighborView,
        }
    }
}

impl fmt::Display for AuditFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditFinding::NotIndependent { u, v } => {
                write!(f, "adjacent vertices {u} and {v} are both in the MIS")
            }
            AuditFinding::NotMaximal { v } => {
                write!(f, "vertex {v} has no MIS neighbor but is not in the MIS")
            }
            AuditFinding::Inv1Mismatch {
                vertex,
                stored,
                expected,
            } => write!(f, "mis_nei[{vertex}] is {stored}, expected {expected}"),
            AuditFinding::Inv2Mismatch {
                vertex,
                low_neighbor,
                stored,
                expected,
            } => write!(
                f,
                "two_hop[{vertex}][{low_neighbor}] is {stored:?}, expected {expected:?}"
            ),
            AuditFinding::DegreeEstOut {
                vertex,
                degree,
                estimate,
            } => write!(
                f,
                "vertex {vertex} has degree {degree} but estimate {estimate}"
            ),
            AuditFinding::ClassMismatch {
                vertex,
                recorded,
                expected,
            } => write!(
                f,
                "vertex {vertex} is filed as {} but should be {}",
                recorded.name(),
                expected.name()
            ),
            AuditFinding::StaleNeighborView { vertex, neighbor } => write!(
                f,
                "vertex {vertex} holds a stale view of neighbor {neighbor}"
            ),
        }
    }
}

/// Independence and maximality of `in_mis` over the present vertices.
pub fn check_mis<G: GraphView>(g: &G, in_mis: impl Fn(VertexId) -> bool) -> Vec<AuditFinding> {
    let mut out = Vec::new();
    for i in 0..g.vertex_count() {
        let v = VertexId(i as u32);
        if !g.is_present(v) {
            continue;
        }
        let mut dominated = in_mis(v);
        for x in g.neighbors(v) {
            if in_mis(x) {
                if in_mis(v) && v < x {
                    out.push(AuditFinding::NotIndependent { u: v, v: x });
                }
                dominated = true;
            }
        }
        if !dominated {
            out.push(AuditFinding::NotMaximal { v });
        }
    }
    out
}

/// Greedy MIS in the given order; vertices not listed are never added.
pub fn greedy_mis<G: GraphView>(g: &G, order: &[VertexId]) -> Vec<bool> {
    let mut in_mis = vec![false; g.vertex_count()];
    for &v in order {
        if g.neighbors(v).all(|x| !in_mis[x.index()]) {
            in_mis[v.index()] = true;
        }
    }
    in_mis
}

pub fn greedy_mis_ascending<G: GraphView>(g: &G) -> Vec<bool> {
    let order: Vec<VertexId> = (0..g.vertex_count() as u32).map(VertexId).collect();
    greedy_mis(g, &order)
}

/// Recomputes every per-vertex quantity from adjacency and MIS flags and
/// compares against what the records store. Each vertex is classified under
/// its own epoch so a partially refreshed network can be audited too.
pub fn audit_records<'a>(
    n: usize,
    record: impl Fn(VertexId) -> &'a VertexRecord,
    epoch_of: impl Fn(VertexId) -> EpochConfig,
    present: impl Fn(VertexId) -> bool,
) -> Vec<AuditFinding> {
    let mut out = Vec::new();
    for i in 0..n {
        let v = VertexId(i as u32);
        if !present(v) {
            continue;
        }
        let r = record(v);
        let deg = r.degree();
        let est = r.degree_est;
        if deg > 2 * est || est > 2 * deg {
            out.push(AuditFinding::DegreeEstOut {
                vertex: v,
                degree: deg,
                estimate: est,
            });
        }
        let expected = epoch_of(v).classify(est);
        if expected != r.class {
            out.push(AuditFinding::ClassMismatch {
                vertex: v,
                recorded: r.class,
                expected,
            });
        }
        let mut mis_nei = 0;
        let mut low_nbrs = BTreeSet::new();
        for c in DegreeClass::ALL {
            for x in r.neighbors.in_class(c) {
                let rx = record(x);
                if !present(x)
                    || rx.class != c
                    || r.neighbors.cached_degree(x) != Some(rx.degree_est)
                    || !rx.neighbors.contains(v)
                {
                    out.push(AuditFinding::StaleNeighborView {
                        vertex: v,
                        neighbor: x,
                    });
                }
                if rx.in_mis && r.class.counts_neighbor(rx.class) {
                    mis_nei += 1;
                }
                if rx.class == DegreeClass::Low {
                    low_nbrs.insert(x);
                }
            }
        }
        if mis_nei != r.mis_nei {
            out.push(AuditFinding::Inv1Mismatch {
                vertex: v,
                stored: r.mis_nei,
                expected: mis_nei,
            });
        }
        for &w in &low_nbrs {
            let rw = record(w);
            let expected = rw
                .neighbors
                .iter()
                .filter(|&x| {
                    let rx = record(x);
                    rx.in_mis && rx.class.counts_for_two_hop()
                })
                .count() as u64;
            let stored = r.two_hop.get(&w).copied();
            let zero_ok = r.two_hop_zero.contains(&w) == (stored == Some(0));
            if stored != Some(expected) || !zero_ok {
                out.push(AuditFinding::Inv2Mismatch {
                    vertex: v,
                    low_neighbor: w,
                    stored,
                    expected: Some(expected),
                });
            }
        }
        for (&w, &val) in &r.two_hop {
            if !low_nbrs.contains(&w) {
                out.push(AuditFinding::Inv2Mismatch {
                    vertex: v,
                    low_neighbor: w,
                    stored: Some(val),
                    expected: None,
                });
            }
        }
        for &w in &r.two_hop_zero {
            if r.two_hop.get(&w) != Some(&0) {
                out.push(AuditFinding::Inv2Mismatch {
                    vertex: v,
                    low_neighbor: w,
                    stored: r.two_hop.get(&w).copied(),
                    expected: None,
                });
            }
        }
    }
    out
}

/// Full audit of a sequential engine's graph: counters, classes, registries.
pub fn audit_graph(g: &DynGraph) -> Vec<AuditFinding> {
    let epoch = *g.epoch();
    let mut out = audit_records(g.vertex_count(), |v| g.record(v), |_| epoch, |_| true);
    for c in DegreeClass::ALL {
        for v in g.registry(c) {
            if g.class_of(v) != c {
                out.push(AuditFinding::ClassMismatch {
                    vertex: v,
                    recorded: c,
                    expected: g.class_of(v),
                });
            }
        }
    }
    let filed: usize = DegreeClass::ALL.iter().map(|&c| g.registry_len(c)).sum();
    if filed != g.vertex_count() {
        for i in 0..g.vertex_count() {
            let v = VertexId(i as u32);
            if !g.registry(g.class_of(v)).any(|x| x == v) {
                out.push(AuditFinding::ClassMismatch {
                    vertex: v,
                    recorded: g.class_of(v),
                    expected: g.class_of(v),
                });
            }
        }
    }
    out
}
