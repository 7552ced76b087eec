//! Fully dynamic maximal independent set.
//!
//! Two sequential engines maintain an MIS under edge insertions and deletions:
//! [`DeltaEngine`] keeps exact MIS-neighbor counts and pays O(Δ) per update,
//! [`SublinearEngine`] splits vertices into degree classes so that no update
//! scans a high-degree neighborhood in full. [`AutoEngine`] switches between
//! them per epoch. [`congest::Simulator`] runs the sublinear scheme as a
//! message-passing protocol and accounts rounds and messages.

pub mod congest;
pub mod delta;
pub mod dispatch;
pub mod engine;
pub mod error;
pub mod graph;
pub mod ledger;
pub mod oracle;
pub mod runner;
pub mod stream;
pub mod sublinear;
pub mod workload;

pub use delta::DeltaEngine;
pub use dispatch::AutoEngine;
pub use engine::{AdjustmentReport, EngineKind, MisEngine, Update};
pub use graph::{DegreeClass, DynGraph, EpochConfig, VertexId};
pub use ledger::CostLedger;
pub use sublinear::SublinearEngine;
pub use workload::Stream;
