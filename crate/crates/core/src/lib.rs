//! Event-sequence analysis of software teams with and without bots.
//!
//! The crate covers the whole path from raw activity events to results:
//! ingestion, bot detection, team sequences, matched down-sampling,
//! contrast motifs and rank statistics, plus a synthetic corpus generator.

pub mod bots;
pub mod error;
pub mod event;
pub mod matcher;
pub mod motif;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod teams;

pub use error::{Error, ExitClass, Result};
pub use event::{Event, EventType};
pub use teams::{ReducedSymbol, TeamKind, TeamSequence};
