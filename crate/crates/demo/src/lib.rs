//! Browser bindings for the demo page in `www/`. Every call returns a JSON
//! string so the page needs no generated glue beyond wasm-bindgen's.

use dynmis::congest::Simulator;
use dynmis::workload::{adversary_stream, random_stream, RandomStreamConfig};
use dynmis::{DeltaEngine, MisEngine, Stream, SublinearEngine, VertexId};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// A random stream replayed step by step on the sublinear engine.
#[wasm_bindgen]
pub struct Playground {
    engine: SublinearEngine,
    stream: Stream,
    next: usize,
}

#[wasm_bindgen]
impl Playground {
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, steps: usize, seed: u64, insert_bias: f64) -> Result<Playground, JsError> {
        let cfg = RandomStreamConfig {
            insert_bias,
            ..RandomStreamConfig::new(n, steps, seed)
        };
        let stream = random_stream(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
        Ok(Playground {
            engine: SublinearEngine::new(n),
            stream,
            next: 0,
        })
    }

    /// Applies up to `k` updates; returns the state after the last one along
    /// with the MIS changes of every applied update.
    pub fn step(&mut self, k: usize) -> Result<String, JsError> {
        let mut changes = Vec::new();
        for _ in 0..k {
            let Some(u) = self.stream.events.get(self.next) else {
                break;
            };
            let r = self.engine.apply(u).map_err(|e| JsError::new(&e.to_string()))?;
            changes.push(json!({
                "update": u.to_string(),
                "removed": ids(&r.removed),
                "inserted": ids(&r.inserted),
            }));
            self.next += 1;
        }
        let mut v = self.state_value();
        v["changes"] = Value::Array(changes);
        Ok(v.to_string())
    }

    pub fn state(&self) -> String {
        self.state_value().to_string()
    }

    fn state_value(&self) -> Value {
        let g = self.engine.graph();
        let n = g.vertex_count();
        let classes: Vec<&str> = (0..n).map(|i| g.class_of(VertexId(i as u32)).name()).collect();
        let mis: Vec<bool> = (0..n).map(|i| g.in_mis(VertexId(i as u32))).collect();
        let edges: Vec<[u32; 2]> = g.edge_list().iter().map(|e| [e.0 .0, e.1 .0]).collect();
        let e = g.epoch();
        json!({
            "n": n,
            "applied": self.next,
            "remaining": self.stream.len() - self.next,
            "edges": edges,
            "mis": mis,
            "classes": classes,
            "thresholds": [e.t_high, e.t_medhigh, e.t_medlow],
            "adjustments": self.engine.ledger().adjustments(),
        })
    }
}

fn ids(v: &[VertexId]) -> Vec<u32> {
    v.iter().map(|x| x.0).collect()
}

/// Adjustments per update of the lower-bound stream, for both engines.
#[wasm_bindgen]
pub fn adversary_series(n: usize) -> Result<String, JsError> {
    let s = adversary_stream(n).map_err(|e| JsError::new(&e.to_string()))?;
    // drives the engines directly: the runner's wall clock is unavailable in
    // the browser
    let engines: [(&str, Box<dyn MisEngine>); 2] = [
        ("delta", Box::new(DeltaEngine::new(n, None))),
        ("sublinear", Box::new(SublinearEngine::new(n))),
    ];
    let mut out = json!({ "n": n });
    for (name, mut e) in engines {
        let mut series = Vec::with_capacity(s.len());
        for u in &s.events {
            let r = e.apply(u).map_err(|e| JsError::new(&e.to_string()))?;
            series.push(r.adjustments());
        }
        out[name] = json!(series);
    }
    Ok(out.to_string())
}

/// Rounds, messages and adjustments per update of a simulated random stream.
#[wasm_bindgen]
pub fn simulate_series(n: usize, steps: usize, seed: u64, vertex_rate: f64) -> Result<String, JsError> {
    let cfg = RandomStreamConfig {
        insert_bias: 0.6,
        vertex_rate,
        ..RandomStreamConfig::new(n, steps, seed)
    };
    let s = random_stream(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
    let mut sim = Simulator::new(n);
    let (mut rounds, mut messages, mut adj) = (Vec::new(), Vec::new(), Vec::new());
    for u in &s.events {
        let m = sim.apply(u).map_err(|e| JsError::new(&e.to_string()))?;
        rounds.push(m.rounds);
        messages.push(m.messages);
        adj.push(m.adjustments());
    }
    let t = sim.totals();
    Ok(json!({
        "rounds": rounds,
        "messages": messages,
        "adjustments": adj,
        "epochs": t.epochs,
        "max_bits": t.max_bits,
        "bit_limit": sim.bit_limit(),
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn playground_steps_through_stream() {
        let mut p = Playground::new(12, 30, 4, 0.6).unwrap();
        let v: Value = serde_json::from_str(&p.step(10).unwrap()).unwrap();
        assert_eq!(v["applied"], 10);
        assert_eq!(v["changes"].as_array().unwrap().len(), 10);
        assert_eq!(v["mis"].as_array().unwrap().len(), 12);
        let v: Value = serde_json::from_str(&p.step(100).unwrap()).unwrap();
        assert_eq!(v["remaining"], 0);
        assert_eq!(v["changes"].as_array().unwrap().len(), 20);
    }

    #[test]
    fn adversary_series_ends_with_spike() {
        let v: Value = serde_json::from_str(&adversary_series(32).unwrap()).unwrap();
        for k in ["delta", "sublinear"] {
            let s = v[k].as_array().unwrap();
            assert!(s.last().unwrap().as_u64().unwrap() >= 8);
        }
    }

    #[test]
    fn simulate_series_lengths_match() {
        let v: Value = serde_json::from_str(&simulate_series(20, 200, 1, 0.1).unwrap()).unwrap();
        assert_eq!(v["rounds"].as_array().unwrap().len(), 200);
        assert!(v["max_bits"].as_u64() <= v["bit_limit"].as_u64());
    }
}
