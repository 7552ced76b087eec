use proptest::prelude::*;

use dynmis::congest::Simulator;
use dynmis::oracle::{check_mis, greedy_mis, SimpleGraph};
use dynmis::stream::{parse_stream, render_stream};
use dynmis::{AutoEngine, DeltaEngine, MisEngine, Stream, SublinearEngine, Update, VertexId};

/// Raw ops: (is_insert, u, v). Turned into a valid stream by skipping
/// redundant inserts and flipping deletes of missing edges into inserts.
fn ops(n: u32, len: usize) -> impl Strategy<Value = Vec<(bool, u32, u32)>> {
    prop::collection::vec((prop::bool::weighted(0.6), 0..n, 0..n), 0..len)
}

fn edge_stream(n: usize, raw: &[(bool, u32, u32)]) -> Stream {
    let mut g = SimpleGraph::new(n);
    let mut events = Vec::new();
    for &(ins, a, b) in raw {
        if a == b {
            continue;
        }
        let (a, b) = (VertexId(a), VertexId(b));
        if g.has_edge(a, b) && !ins {
            g.remove(a, b);
            events.push(Update::DeleteEdge(a, b));
        } else if !g.has_edge(a, b) {
            g.insert(a, b);
            events.push(Update::InsertEdge(a, b));
        }
    }
    Stream { n, events }
}

fn vertex_stream(n: usize, raw: &[(bool, u32, u32)]) -> Stream {
    let mut g = SimpleGraph::new(n);
    let mut present = vec![true; n];
    let mut events = Vec::new();
    for &(ins, a, b) in raw {
        let (va, vb) = (VertexId(a), VertexId(b));
        if a == b {
            if present[a as usize] {
                for x in g.edges() {
                    if x.0 == va || x.1 == va {
                        g.remove(x.0, x.1);
                    }
                }
                events.push(Update::DeleteVertex(va));
            } else {
                events.push(Update::InsertVertex(va));
            }
            present[a as usize] ^= true;
        } else if present[a as usize] && present[b as usize] {
            if g.has_edge(va, vb) && !ins {
                g.remove(va, vb);
                events.push(Update::DeleteEdge(va, vb));
            } else if !g.has_edge(va, vb) {
                g.insert(va, vb);
                events.push(Update::InsertEdge(va, vb));
            }
        }
    }
    Stream { n, events }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn engines_keep_a_valid_mis(raw in ops(14, 300)) {
        let s = edge_stream(14, &raw);
        let mut engines: Vec<Box<dyn MisEngine>> = vec![
            Box::new(DeltaEngine::new(14, None)),
            Box::new(SublinearEngine::new(14)),
            Box::new(AutoEngine::new(14, Some(13))),
        ];
        for u in &s.events {
            for e in engines.iter_mut() {
                let r = e.apply(u).unwrap();
                prop_assert!(r.has_valid_shape(), "{:?}", r);
                let f = e.audit();
                prop_assert!(f.is_empty(), "{:?} after {}: {:?}", e.active_kind(), u, f);
            }
        }
    }

    #[test]
    fn simulator_tracks_sequential_engine(raw in ops(12, 250)) {
        let s = edge_stream(12, &raw);
        let mut seq = SublinearEngine::new(12);
        let mut sim = Simulator::new(12);
        for u in &s.events {
            let a = seq.apply(u).unwrap();
            let b = sim.apply(u).unwrap();
            prop_assert_eq!(&a.removed, &b.removed);
            prop_assert_eq!(&a.inserted, &b.inserted);
            prop_assert!(sim.audit().is_empty(), "{:?}", sim.audit());
        }
        prop_assert!(sim.totals().max_bits <= sim.bit_limit());
    }

    #[test]
    fn simulator_handles_vertex_churn(raw in ops(10, 250)) {
        let s = vertex_stream(10, &raw);
        let mut sim = Simulator::new(10);
        for u in &s.events {
            sim.apply(u).unwrap();
            let f = sim.audit();
            prop_assert!(f.is_empty(), "after {}: {:?}\n{}", u, f, render_stream(&s));
        }
    }

    #[test]
    fn greedy_in_any_order_is_maximal(raw in ops(10, 40), perm in Just((0..10u32).collect::<Vec<_>>()).prop_shuffle()) {
        let s = edge_stream(10, &raw);
        let mut g = SimpleGraph::new(10);
        for u in &s.events {
            match *u {
                Update::InsertEdge(a, b) => { g.insert(a, b); }
                Update::DeleteEdge(a, b) => { g.remove(a, b); }
                _ => {}
            }
        }
        let order: Vec<VertexId> = perm.into_iter().map(VertexId).collect();
        let m = greedy_mis(&g, &order);
        prop_assert!(check_mis(&g, |v| m[v.index()]).is_empty());
    }

    #[test]
    fn stream_text_round_trips(raw in ops(20, 100)) {
        let s = vertex_stream(20, &raw);
        let back = parse_stream(&render_stream(&s)).unwrap();
        prop_assert_eq!(back.n, s.n);
        prop_assert_eq!(back.events, s.events);
    }
}
