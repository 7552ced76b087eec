//! Hand-built graphs that force each resolution path, checked against the
//! message-passing simulation.

use dynmis::congest::Simulator;
use dynmis::engine::{MisEngine, Update};
use dynmis::{SublinearEngine, VertexId};

fn v(i: u32) -> VertexId {
    VertexId(i)
}

fn edges(list: impl IntoIterator<Item = (u32, u32)>) -> Vec<(VertexId, VertexId)> {
    list.into_iter().map(|(a, b)| (v(a), v(b))).collect()
}

/// Star at 0 with leaves 2..=61; vertex 1 has 33 private leaves and shares
/// leaves 2..=5 with the star; 95 is isolated.
fn shared_high_neighbor() -> (usize, Vec<(VertexId, VertexId)>) {
    let mut e: Vec<(u32, u32)> = (2..=61).map(|l| (0, l)).collect();
    e.extend((62..=94).map(|l| (1, l)));
    e.extend((2..=5).map(|l| (1, l)));
    (96, edges(e))
}

/// Star at 0 with 380 leaves; vertex 1 has 25 private leaves and shares three
/// leaves with the star; 407 is isolated.
fn shared_medhigh_neighbor() -> (usize, Vec<(VertexId, VertexId)>) {
    let mut e: Vec<(u32, u32)> = (2..=381).map(|l| (0, l)).collect();
    e.extend((382..=406).map(|l| (1, l)));
    e.extend((2..=4).map(|l| (1, l)));
    (408, edges(e))
}

fn run_both(n: usize, es: &[(VertexId, VertexId)], updates: &[Update]) -> SublinearEngine {
    let mut seq = SublinearEngine::from_edges(n, es).unwrap();
    let mut sim = Simulator::from_edges(n, es).unwrap();
    assert!(seq.audit().is_empty());
    assert!(sim.audit().is_empty(), "{:?}", sim.audit());
    assert_eq!(seq.mis(), sim.mis());
    for u in updates {
        let a = seq.apply(u).unwrap();
        let b = sim.apply(u).unwrap();
        assert!(seq.audit().is_empty(), "{:?}", seq.audit());
        assert!(sim.audit().is_empty(), "{:?}", sim.audit());
        assert_eq!(a.removed, b.removed);
        assert_eq!(a.inserted, b.inserted);
        assert!(a.has_valid_shape());
    }
    seq
}

#[test]
fn greedy_insertion_with_high_sweep() {
    let (n, es) = shared_high_neighbor();
    let e = run_both(n, &es, &[Update::InsertEdge(v(0), v(95))]);
    assert_eq!(e.paths().greedy_high_sweep, 1);
    assert!(!e.in_mis(v(1)));
    assert!((2..=94).all(|i| e.in_mis(v(i))));
    assert_eq!(e.ledger().sweeps, 1);
}

#[test]
fn greedy_insertion_with_wide_sweep() {
    let (n, es) = shared_medhigh_neighbor();
    let e = run_both(n, &es, &[Update::InsertEdge(v(0), v(407))]);
    assert_eq!(e.paths().greedy_wide_sweep, 1);
    assert!(!e.in_mis(v(1)));
    assert!((2..=406).all(|i| e.in_mis(v(i))));
}

#[test]
fn scenarios_survive_follow_up_churn() {
    let (n, es) = shared_high_neighbor();
    let ups = [
        Update::InsertEdge(v(0), v(95)),
        Update::DeleteEdge(v(0), v(95)),
        Update::InsertEdge(v(1), v(95)),
        Update::DeleteEdge(v(1), v(2)),
        Update::InsertEdge(v(62), v(63)),
    ];
    run_both(n, &es, &ups);
}
