//! Synchronous message-passing simulation of the sublinear scheme.

mod message;
mod network;
mod sim;

pub use message::{bit_limit, id_bits, Payload, QueryMode, SimMessage};
pub use network::Network;
pub use sim::{
    BroadcastMetrics, ProcedureCost, ProcedureKind, SimNode, SimTotals, Simulator, UpdateMetrics,
};
