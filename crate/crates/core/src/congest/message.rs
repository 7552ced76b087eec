use crate::graph::VertexId;

/// What a candidate is asked about.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum QueryMode {
    /// Report MIS membership and whether no counted neighbor is in the MIS;
    /// remember the current counter as the step baseline.
    Probe,
    /// Free to join: outside the MIS with a zero counter.
    Exact,
    /// Free to join: outside the MIS with the counter still at its baseline.
    Baseline,
    /// Check the full neighborhood, then report whether it is MIS-free.
    Scan,
    /// In the MIS while having an MIS neighbor.
    Conflict,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Link { est: u64, in_mis: bool },
    Unlink { in_mis: bool },
    StatusQuery,
    StatusReply { in_mis: bool, est: u64 },
    DegreeAnnounce { est: u64, in_mis: bool, two_hop: Option<u64> },
    TwoHopValue { count: u64 },
    MisChange { joined: bool },
    RelayStatus { origin: VertexId, joined: bool },
    Query { mode: QueryMode },
    Reply { in_mis: bool, flag: bool },
    JoinGrant,
    SweepProbe { wide: bool },
    ViolatorReport { vertex: VertexId },
    Leave { target: VertexId },
    Control { go: bool, target: VertexId },
    TerminateEpoch { seq: u64, m_snapshot: u64 },
}

const TAG_BITS: u32 = 4;

/// Bits needed for a vertex id in a network of `n` vertices.
pub fn id_bits(n: usize) -> u32 {
    let n = n.max(2) as u64;
    64 - (n - 1).leading_zeros()
}

/// Payload limit: four words of `ceil(log2 n)` bits, with `n` taken as at
/// least 16 so tiny networks still fit a tag and two ids.
pub fn bit_limit(n: usize) -> u32 {
    4 * id_bits(n.max(16))
}

fn fits(v: u64, bits: u32) -> bool {
    bits >= 64 || v < (1u64 << bits)
}

impl Payload {
    pub fn tag(&self) -> u8 {
        match self {
            Payload::Link { .. } => 0,
            Payload::Unlink { .. } => 1,
            Payload::StatusQuery => 2,
            Payload::StatusReply { .. } => 3,
            Payload::DegreeAnnounce { .. } => 4,
            Payload::TwoHopValue { .. } => 5,
            Payload::MisChange { .. } => 6,
            Payload::RelayStatus { .. } => 7,
            Payload::Query { .. } => 8,
            Payload::Reply { .. } => 9,
            Payload::JoinGrant => 10,
            Payload::SweepProbe { .. } => 11,
            Payload::ViolatorReport { .. } => 12,
            Payload::Leave { .. } => 13,
            Payload::Control { .. } => 14,
            Payload::TerminateEpoch { .. } => 15,
        }
    }

    /// Encoded size with ids and degree values in `w`-bit fields and edge
    /// counts in `2w`-bit fields. `None` if a value does not fit its field.
    pub fn encoded_bits(&self, w: u32) -> Option<u32> {
        let body = match *self {
            Payload::Link { est, .. } => fits(est, w).then_some(w + 1)?,
            Payload::Unlink { .. } => 1,
            Payload::StatusQuery | Payload::JoinGrant => 0,
            Payload::StatusReply { est, .. } => fits(est, w).then_some(w + 1)?,
            Payload::DegreeAnnounce { est, two_hop, .. } => {
                let extra = match two_hop {
                    Some(c) => fits(c, w).then_some(w)?,
                    None => 0,
                };
                fits(est, w).then_some(w + 2 + extra)?
            }
            Payload::TwoHopValue { count } => fits(count, w).then_some(w)?,
            Payload::MisChange { .. } | Payload::SweepProbe { .. } => 1,
            Payload::RelayStatus { .. } => w + 1,
            Payload::Query { .. } => 3,
            Payload::Reply { .. } => 2,
            Payload::ViolatorReport { .. } | Payload::Leave { .. } => w,
            Payload::Control { .. } => w + 1,
            Payload::TerminateEpoch { seq, m_snapshot } => {
                (fits(seq, w) && fits(m_snapshot, 2 * w)).then_some(3 * w)?
            }
        };
        Some(TAG_BITS + body)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimMessage {
    pub src: VertexId,
    pub dst: VertexId,
    pub payload: Payload,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths() {
        assert_eq!(id_bits(2), 1);
        assert_eq!(id_bits(128), 7);
        assert_eq!(id_bits(129), 8);
        assert_eq!(id_bits(200), 8);
        assert_eq!(bit_limit(8), 16);
        assert_eq!(bit_limit(200), 32);
    }

    #[test]
    fn largest_payloads_fit_the_limit() {
        for n in [16usize, 64, 128, 200, 1000] {
            let w = id_bits(n);
            let top = (1u64 << w) - 1;
            let big = [
                Payload::DegreeAnnounce { est: top, in_mis: true, two_hop: Some(top) },
                Payload::TerminateEpoch { seq: top, m_snapshot: (1u64 << (2 * w)) - 1 },
                Payload::RelayStatus { origin: VertexId(top as u32), joined: true },
                Payload::Control { go: true, target: VertexId(top as u32) },
            ];
            for p in big {
                assert!(p.encoded_bits(w).unwrap() <= bit_limit(n), "{p:?} n={n}");
            }
        }
    }

    #[test]
    fn values_must_fit_fields() {
        assert_eq!(Payload::TwoHopValue { count: 8 }.encoded_bits(3), None);
        assert_eq!(Payload::TwoHopValue { count: 7 }.encoded_bits(3), Some(7));
    }
}
