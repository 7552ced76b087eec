use std::collections::{BTreeSet, HashSet};

use super::message::{bit_limit, id_bits, Payload, SimMessage};
use crate::error::SimError;
use crate::graph::VertexId;

/// Physical links and synchronous message delivery. A message sent now is
/// delivered by the next call to [`Network::round`]; each direction of a link
/// carries at most one message per round.
#[derive(Clone, Debug)]
pub struct Network {
    links: Vec<BTreeSet<VertexId>>,
    grace: Vec<(VertexId, VertexId)>,
    pending: Vec<SimMessage>,
    used: HashSet<(VertexId, VertexId)>,
    word: u32,
    limit: u32,
    pub rounds: u64,
    pub messages: u64,
    pub max_bits: u32,
    trace: Option<Vec<(u64, SimMessage)>>,
}

impl Network {
    pub fn new(n: usize) -> Self {
        Network {
            links: vec![BTreeSet::new(); n],
            grace: Vec::new(),
            pending: Vec::new(),
            used: HashSet::new(),
            word: id_bits(n),
            limit: bit_limit(n),
            rounds: 0,
            messages: 0,
            max_bits: 0,
            trace: None,
        }
    }

    pub fn word_bits(&self) -> u32 {
        self.word
    }

    pub fn limit_bits(&self) -> u32 {
        self.limit
    }

    pub fn link(&mut self, u: VertexId, v: VertexId) {
        self.links[u.index()].insert(v);
        self.links[v.index()].insert(u);
    }

    /// The link stays usable until [`Network::end_grace`].
    pub fn unlink_later(&mut self, u: VertexId, v: VertexId) {
        self.grace.push((u, v));
    }

    pub fn end_grace(&mut self) {
        for (u, v) in std::mem::take(&mut self.grace) {
            self.links[u.index()].remove(&v);
            self.links[v.index()].remove(&u);
        }
    }

    pub fn has_link(&self, u: VertexId, v: VertexId) -> bool {
        self.links[u.index()].contains(&v)
    }

    pub fn send(&mut self, src: VertexId, dst: VertexId, payload: Payload) -> Result<(), SimError> {
        if !self.has_link(src, dst) {
            return Err(SimError::NoLink { src, dst });
        }
        if !self.used.insert((src, dst)) {
            return Err(SimError::Congested { src, dst });
        }
        let bits = payload.encoded_bits(self.word).unwrap_or(u32::MAX);
        if bits > self.limit {
            return Err(SimError::Oversized {
                bits,
                limit: self.limit,
            });
        }
        self.max_bits = self.max_bits.max(bits);
        self.messages += 1;
        self.pending.push(SimMessage { src, dst, payload });
        Ok(())
    }

    /// Delivers everything sent since the last round, ordered by recipient
    /// then sender. A round with nothing in flight is not counted.
    pub fn round(&mut self) -> Vec<SimMessage> {
        if self.pending.is_empty() {
            return Vec::new();
        }
        self.rounds += 1;
        self.used.clear();
        let mut out = std::mem::take(&mut self.pending);
        out.sort_by_key(|m| (m.dst, m.src));
        if let Some(t) = self.trace.as_mut() {
            t.extend(out.iter().map(|m| (self.rounds, *m)));
        }
        out
    }

    pub fn set_trace(&mut self, on: bool) {
        self.trace = if on { Some(Vec::new()) } else { None };
    }

    pub fn take_trace(&mut self) -> Vec<(u64, SimMessage)> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }
}
