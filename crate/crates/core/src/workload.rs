//! Update streams: seeded random churn and the adversarial stream that forces
//! a single update to change many MIS memberships.
//!
//! Randomness comes from ChaCha8 seeded through `SeedableRng::seed_from_u64`;
//! uniform draws use the high bits of a 64-bit output scaled by
//! multiplication, so streams are identical on every platform.

use indexmap::IndexSet;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::Update;
use crate::error::WorkloadError;
use crate::graph::VertexId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    pub n: usize,
    pub events: Vec<Update>,
}

impl Stream {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn edge_only(&self) -> bool {
        self.events.iter().all(Update::is_edge_update)
    }
}

#[derive(Clone, Debug)]
pub struct RandomStreamConfig {
    pub n: usize,
    pub steps: usize,
    pub seed: u64,
    /// Probability that a step tries an insertion.
    pub insert_bias: f64,
    /// Probability that a step is a vertex insertion or deletion.
    pub vertex_rate: f64,
}

impl RandomStreamConfig {
    pub fn new(n: usize, steps: usize, seed: u64) -> Self {
        RandomStreamConfig {
            n,
            steps,
            seed,
            insert_bias: 0.5,
            vertex_rate: 0.0,
        }
    }
}

struct Draw(ChaCha8Rng);

impl Draw {
    fn below(&mut self, k: usize) -> usize {
        ((self.0.next_u64() as u128 * k as u128) >> 64) as usize
    }

    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn key(u: u32, v: u32) -> (u32, u32) {
    (u.min(v), u.max(v))
}

/// Mutable view the generator keeps so it never emits an invalid update.
struct Live {
    present: Vec<bool>,
    present_list: IndexSet<u32>,
    edges: IndexSet<(u32, u32)>,
    adj: Vec<IndexSet<u32>>,
}

impl Live {
    fn new(n: usize) -> Self {
        Live {
            present: vec![true; n],
            present_list: (0..n as u32).collect(),
            edges: IndexSet::new(),
            adj: vec![IndexSet::new(); n],
        }
    }

    fn capacity(&self) -> usize {
        let p = self.present_list.len();
        p * p.saturating_sub(1) / 2
    }

    fn add(&mut self, u: u32, v: u32) {
        self.edges.insert(key(u, v));
        self.adj[u as usize].insert(v);
        self.adj[v as usize].insert(u);
    }

    fn remove(&mut self, u: u32, v: u32) {
        self.edges.swap_remove(&key(u, v));
        self.adj[u as usize].swap_remove(&v);
        self.adj[v as usize].swap_remove(&u);
    }

    fn random_non_edge(&self, d: &mut Draw) -> Option<(u32, u32)> {
        let cap = self.capacity();
        if self.edges.len() >= cap {
            return None;
        }
        let p = self.present_list.len();
        if 2 * self.edges.len() < cap {
            loop {
                let a = self.present_list[d.below(p)];
                let b = self.present_list[d.below(p)];
                if a != b && !self.edges.contains(&key(a, b)) {
                    return Some((a, b));
                }
            }
        }
        let mut sorted: Vec<u32> = self.present_list.iter().copied().collect();
        sorted.sort_unstable();
        let mut free = Vec::new();
        for (i, &a) in sorted.iter().enumerate() {
            for &b in &sorted[i + 1..] {
                if !self.edges.contains(&(a, b)) {
                    free.push((a, b));
                }
            }
        }
        Some(free[d.below(free.len())])
    }
}

/// Random insertions and deletions; with `vertex_rate > 0` also vertex
/// deletions (which drop incident edges) and re-insertions.
pub fn random_stream(cfg: &RandomStreamConfig) -> Result<Stream, WorkloadError> {
    if !(0.0..=1.0).contains(&cfg.insert_bias) {
        return Err(WorkloadError::Bias(cfg.insert_bias));
    }
    let mut d = Draw(ChaCha8Rng::seed_from_u64(cfg.seed));
    let mut live = Live::new(cfg.n);
    let mut events = Vec::with_capacity(cfg.steps);
    while events.len() < cfg.steps && cfg.n >= 2 {
        if cfg.vertex_rate > 0.0 && d.unit() < cfg.vertex_rate {
            let x = d.below(cfg.n) as u32;
            if live.present[x as usize] {
                let nbrs: Vec<u32> = live.adj[x as usize].iter().copied().collect();
                for y in nbrs {
                    live.remove(x, y);
                }
                live.present[x as usize] = false;
                live.present_list.swap_remove(&x);
                events.push(Update::DeleteVertex(VertexId(x)));
            } else {
                live.present[x as usize] = true;
                live.present_list.insert(x);
                events.push(Update::InsertVertex(VertexId(x)));
            }
            continue;
        }
        let want_insert = d.unit() < cfg.insert_bias;
        let ev = if want_insert || live.edges.is_empty() {
            match live.random_non_edge(&mut d) {
                Some((a, b)) => {
                    live.add(a, b);
                    Some(Update::InsertEdge(VertexId(a), VertexId(b)))
                }
                None => None,
            }
        } else {
            None
        };
        let ev = ev.or_else(|| {
            if live.edges.is_empty() {
                return None;
            }
            let (a, b) = live.edges[d.below(live.edges.len())];
            live.remove(a, b);
            Some(Update::DeleteEdge(VertexId(a), VertexId(b)))
        });
        match ev {
            Some(e) => events.push(e),
            None if cfg.vertex_rate > 0.0 => continue,
            None => break,
        }
    }
    Ok(Stream { n: cfg.n, events })
}

/// Vertex ranges of the adversarial construction. `u1`, `u2` are the lowest
/// ids of `l1`, `l2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdversaryLayout {
    pub r1: std::ops::Range<u32>,
    pub l1: std::ops::Range<u32>,
    pub r2: std::ops::Range<u32>,
    pub l2: std::ops::Range<u32>,
}

impl AdversaryLayout {
    pub fn new(n: usize) -> Result<Self, WorkloadError> {
        if n < 8 || !n.is_multiple_of(4) {
            return Err(WorkloadError::AdversarySize(n));
        }
        let q = (n / 4) as u32;
        Ok(AdversaryLayout {
            r1: 0..q,
            l1: q..2 * q,
            r2: 2 * q..3 * q,
            l2: 3 * q..4 * q,
        })
    }

    pub fn u1(&self) -> VertexId {
        VertexId(self.l1.start)
    }

    pub fn u2(&self) -> VertexId {
        VertexId(self.l2.start)
    }
}

/// Two complete bipartite halves built so the `l` sides end up in the MIS,
/// each `l` side then stripped down to one vertex still wired to its whole
/// `r` side, and finally an edge between those two vertices. Under the
/// lower-id-leaves rule the last insertion evicts `u1` and all of `r1` must
/// join.
pub fn adversary_stream(n: usize) -> Result<Stream, WorkloadError> {
    let lay = AdversaryLayout::new(n)?;
    let mut events = Vec::new();
    for (l, r) in [(&lay.l1, &lay.r1), (&lay.l2, &lay.r2)] {
        for a in l.clone() {
            for b in r.clone() {
                events.push(Update::InsertEdge(VertexId(a), VertexId(b)));
            }
        }
    }
    for (l, r) in [(&lay.l1, &lay.r1), (&lay.l2, &lay.r2)] {
        for a in l.clone().skip(1) {
            for b in r.clone() {
                events.push(Update::DeleteEdge(VertexId(a), VertexId(b)));
            }
        }
    }
    events.push(Update::InsertEdge(lay.u1(), lay.u2()));
    Ok(Stream { n, events })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::SimpleGraph;

    fn replay(s: &Stream) -> SimpleGraph {
        let mut g = SimpleGraph::new(s.n);
        let mut present = vec![true; s.n];
        for e in &s.events {
            match *e {
                Update::InsertEdge(u, v) => {
                    assert!(present[u.index()] && present[v.index()]);
                    assert!(g.insert(u, v), "duplicate {u} {v}");
                }
                Update::DeleteEdge(u, v) => assert!(g.remove(u, v), "missing {u} {v}"),
                Update::DeleteVertex(u) => {
                    assert!(present[u.index()]);
                    let nbrs: Vec<_> = crate::oracle::GraphView::neighbors(&g, u).collect();
                    for x in nbrs {
                        g.remove(u, x);
                    }
                    present[u.index()] = false;
                }
                Update::InsertVertex(u) => {
                    assert!(!present[u.index()]);
                    present[u.index()] = true;
                }
            }
        }
        g
    }

    #[test]
    fn random_streams_are_valid_and_seeded() {
        let cfg = RandomStreamConfig::new(30, 2000, 7);
        let a = random_stream(&cfg).unwrap();
        assert_eq!(a.len(), 2000);
        replay(&a);
        assert_eq!(a, random_stream(&cfg).unwrap());
        let b = random_stream(&RandomStreamConfig::new(30, 2000, 8)).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn full_bias_builds_complete_graph() {
        let mut cfg = RandomStreamConfig::new(7, 21, 1);
        cfg.insert_bias = 1.0;
        let s = random_stream(&cfg).unwrap();
        assert!(s.events.iter().all(|e| matches!(e, Update::InsertEdge(..))));
        assert_eq!(replay(&s).edge_count(), 21);
    }

    #[test]
    fn zero_bias_on_empty_graph_still_inserts() {
        let mut cfg = RandomStreamConfig::new(5, 10, 3);
        cfg.insert_bias = 0.0;
        let s = random_stream(&cfg).unwrap();
        assert_eq!(s.len(), 10);
        replay(&s);
    }

    #[test]
    fn vertex_streams_are_valid() {
        let mut cfg = RandomStreamConfig::new(20, 3000, 11);
        cfg.vertex_rate = 0.05;
        let s = random_stream(&cfg).unwrap();
        assert_eq!(s.len(), 3000);
        assert!(s.events.iter().any(|e| matches!(e, Update::DeleteVertex(_))));
        assert!(s.events.iter().any(|e| matches!(e, Update::InsertVertex(_))));
        replay(&s);
    }

    #[test]
    fn bias_out_of_range() {
        let mut cfg = RandomStreamConfig::new(5, 10, 3);
        cfg.insert_bias = 1.5;
        assert_eq!(random_stream(&cfg), Err(WorkloadError::Bias(1.5)));
    }

    #[test]
    fn adversary_shape() {
        let s = adversary_stream(8).unwrap();
        let ins = s.events.iter().filter(|e| matches!(e, Update::InsertEdge(..))).count();
        let del = s.events.iter().filter(|e| matches!(e, Update::DeleteEdge(..))).count();
        assert_eq!((ins, del), (9, 4));
        let g = replay(&s);
        // u1 = 2 keeps r1 = {0, 1}, u2 = 6 keeps r2 = {4, 5}, plus (2, 6)
        assert_eq!(g.edge_count(), 5);
        assert!(g.has_edge(VertexId(2), VertexId(6)));
        let s = adversary_stream(64).unwrap();
        assert_eq!(s.len(), 2 * 256 + 2 * 15 * 16 + 1);
        assert!(adversary_stream(10).is_err());
        assert!(adversary_stream(4).is_err());
    }
}
