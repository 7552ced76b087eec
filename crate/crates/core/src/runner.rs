//! Stream replay and report rendering shared by the command-line tool and the
//! test suites.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use crate::congest::{ProcedureCost, Simulator};
use crate::engine::{EngineKind, MisEngine};
use crate::error::RunError;
use crate::graph::VertexId;
use crate::workload::Stream;
use crate::{AutoEngine, DeltaEngine, SublinearEngine};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Algo {
    Delta,
    Sublinear,
    Auto,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Delta => "delta",
            Algo::Sublinear => "sublinear",
            Algo::Auto => "auto",
        }
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delta" => Ok(Algo::Delta),
            "sublinear" => Ok(Algo::Sublinear),
            "auto" => Ok(Algo::Auto),
            _ => Err(format!("unknown algorithm `{s}`")),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub algo: Algo,
    pub delta_bound: Option<u64>,
    /// Audit the MIS and all counters after every update.
    pub verify: bool,
}

impl RunOptions {
    pub fn new(algo: Algo) -> Self {
        RunOptions {
            algo,
            delta_bound: None,
            verify: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateRecord {
    pub index: u64,
    pub removed: Vec<VertexId>,
    pub inserted: Vec<VertexId>,
    pub ops: Option<u64>,
    pub rounds: Option<u64>,
    pub messages: Option<u64>,
}

impl UpdateRecord {
    pub fn adjustments(&self) -> usize {
        self.removed.len() + self.inserted.len()
    }

    pub fn has_valid_shape(&self) -> bool {
        self.removed.len() <= 1 || self.inserted.len() >= 2 * self.removed.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpochRow {
    /// `None` for simulated runs.
    pub engine: Option<EngineKind>,
    pub start_index: u64,
    pub m_snapshot: u64,
    pub updates: u64,
    /// Elementary operations, or messages for simulated runs.
    pub ops: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SimSummary {
    pub rounds: u64,
    pub messages: u64,
    pub broadcast_rounds: u64,
    pub broadcast_messages: u64,
    pub max_bits: u32,
    pub bit_limit: u32,
    pub procedures: Vec<ProcedureCost>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub algo: String,
    pub n: usize,
    pub updates: u64,
    pub final_m: u64,
    pub mis_size: usize,
    pub removed: u64,
    pub inserted: u64,
    pub max_adjustments: u64,
    pub shape_violations: u64,
    pub ops: Option<u64>,
    pub epochs: Vec<EpochRow>,
    pub sim: Option<SimSummary>,
    pub records: Vec<UpdateRecord>,
    pub wall_time_ms: u128,
}

impl RunReport {
    pub fn adjustments(&self) -> u64 {
        self.removed + self.inserted
    }

    /// `key: value` lines, the epoch table, and the wall time last.
    pub fn render_summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "algo: {}", self.algo);
        let _ = writeln!(s, "n: {}", self.n);
        let _ = writeln!(s, "updates: {}", self.updates);
        let _ = writeln!(s, "final_m: {}", self.final_m);
        let _ = writeln!(s, "mis_size: {}", self.mis_size);
        let _ = writeln!(s, "adjustments: {}", self.adjustments());
        let _ = writeln!(s, "removed: {}", self.removed);
        let _ = writeln!(s, "inserted: {}", self.inserted);
        let _ = writeln!(s, "max_adjustments: {}", self.max_adjustments);
        let _ = writeln!(s, "shape_violations: {}", self.shape_violations);
        if let Some(ops) = self.ops {
            let _ = writeln!(s, "ops: {ops}");
        }
        if let Some(m) = &self.sim {
            let _ = writeln!(s, "rounds: {}", m.rounds);
            let _ = writeln!(s, "messages: {}", m.messages);
            let _ = writeln!(s, "broadcast_rounds: {}", m.broadcast_rounds);
            let _ = writeln!(s, "broadcast_messages: {}", m.broadcast_messages);
            let _ = writeln!(s, "max_message_bits: {} (limit {})", m.max_bits, m.bit_limit);
        }
        let _ = writeln!(s, "epochs: {}", self.epochs.len());
        let work = if self.sim.is_some() { "messages" } else { "ops" };
        let _ = writeln!(
            s,
            "  {:>8} {:>10} {:>10} {:>8} {:>12}",
            "start", "engine", "m_snapshot", "updates", work
        );
        for e in &self.epochs {
            let _ = writeln!(
                s,
                "  {:>8} {:>10} {:>10} {:>8} {:>12}",
                e.start_index,
                e.engine.map_or("congest", EngineKind::name),
                e.m_snapshot,
                e.updates,
                e.ops
            );
        }
        let _ = writeln!(s, "wall_time_ms: {}", self.wall_time_ms);
        s
    }

    /// One line per update.
    pub fn render_updates(&self) -> String {
        let mut s = String::new();
        for r in &self.records {
            let _ = write!(
                s,
                "index={} removed={} inserted={}",
                r.index,
                id_list(&r.removed),
                id_list(&r.inserted)
            );
            if let Some(ops) = r.ops {
                let _ = write!(s, " ops={ops}");
            }
            if let (Some(rounds), Some(messages)) = (r.rounds, r.messages) {
                let _ = write!(s, " rounds={rounds} messages={messages}");
            }
            s.push('\n');
        }
        s
    }
}

fn id_list(v: &[VertexId]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.0.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn new_engine(n: usize, opts: &RunOptions) -> Box<dyn MisEngine> {
    match opts.algo {
        Algo::Delta => Box::new(DeltaEngine::new(n, opts.delta_bound)),
        Algo::Sublinear => Box::new(SublinearEngine::new(n)),
        Algo::Auto => Box::new(AutoEngine::new(n, opts.delta_bound)),
    }
}

/// Replays `stream` on a sequential engine.
pub fn run_stream(stream: &Stream, opts: &RunOptions) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let mut engine = new_engine(stream.n, opts);
    let mut records = Vec::with_capacity(stream.len());
    for (i, u) in stream.events.iter().enumerate() {
        let index = i as u64;
        let r = engine
            .apply(u)
            .map_err(|source| RunError::Engine { index, source })?;
        if opts.verify {
            let findings = engine.audit();
            if !findings.is_empty() {
                return Err(RunError::Audit { index, findings });
            }
        }
        records.push(UpdateRecord {
            index,
            removed: r.removed,
            inserted: r.inserted,
            ops: Some(r.ops),
            rounds: None,
            messages: None,
        });
    }
    let ledger = engine.ledger();
    let epochs = ledger
        .epochs
        .iter()
        .map(|e| EpochRow {
            engine: Some(e.engine),
            start_index: e.start_index,
            m_snapshot: e.m_snapshot,
            updates: e.updates,
            ops: e.ops,
        })
        .collect();
    Ok(RunReport {
        algo: opts.algo.name().to_string(),
        n: stream.n,
        updates: ledger.updates,
        final_m: engine.edge_count(),
        mis_size: engine.mis().len(),
        removed: ledger.removed,
        inserted: ledger.inserted,
        max_adjustments: ledger.max_adjustments,
        shape_violations: ledger.shape_violations,
        ops: Some(ledger.total_ops()),
        epochs,
        sim: None,
        records,
        wall_time_ms: start.elapsed().as_millis(),
    })
}

/// Replays `stream` in the message-passing simulator. Vertex updates are
/// allowed.
pub fn simulate_stream(stream: &Stream, verify: bool) -> Result<RunReport, RunError> {
    let start = Instant::now();
    let mut sim = Simulator::new(stream.n);
    let mut records = Vec::with_capacity(stream.len());
    let mut epochs = vec![EpochRow {
        engine: None,
        start_index: 0,
        m_snapshot: sim.m_snapshot(),
        updates: 0,
        ops: 0,
    }];
    let mut summary = SimSummary::default();
    let (mut removed, mut inserted, mut max_adj, mut bad_shape) = (0, 0, 0, 0);
    for (i, u) in stream.events.iter().enumerate() {
        let index = i as u64;
        let m = sim
            .apply(u)
            .map_err(|source| RunError::Sim { index, source })?;
        if verify {
            let findings = sim.audit();
            if !findings.is_empty() {
                return Err(RunError::Audit { index, findings });
            }
        }
        let row = epochs.last_mut().expect("epoch row");
        row.updates += 1;
        row.ops += m.messages;
        if m.new_epoch {
            row.ops += m.broadcast.messages;
            epochs.push(EpochRow {
                engine: None,
                start_index: index + 1,
                m_snapshot: sim.m_snapshot(),
                updates: 0,
                ops: 0,
            });
        }
        removed += m.removed.len() as u64;
        inserted += m.inserted.len() as u64;
        max_adj = max_adj.max(m.adjustments() as u64);
        let rec = UpdateRecord {
            index,
            removed: m.removed,
            inserted: m.inserted,
            ops: None,
            rounds: Some(m.rounds),
            messages: Some(m.messages),
        };
        if !rec.has_valid_shape() {
            bad_shape += 1;
        }
        records.push(rec);
        summary.procedures.extend(m.procedures);
    }
    let t = sim.totals();
    summary.rounds = t.rounds;
    summary.messages = t.messages;
    summary.broadcast_rounds = t.broadcast_rounds;
    summary.broadcast_messages = t.broadcast_messages;
    summary.max_bits = t.max_bits;
    summary.bit_limit = sim.bit_limit();
    Ok(RunReport {
        algo: "congest".to_string(),
        n: stream.n,
        updates: stream.len() as u64,
        final_m: sim.edge_count(),
        mis_size: sim.mis().len(),
        removed,
        inserted,
        max_adjustments: max_adj,
        shape_violations: bad_shape,
        ops: None,
        epochs,
        sim: Some(summary),
        records,
        wall_time_ms: start.elapsed().as_millis(),
    })
}
