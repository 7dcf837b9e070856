//! Sensor ingestion: readings arrive over TCP or from trace files, pass the
//! significance filter, land in the store as triples, and drive appliance
//! reasoning.

mod engine;
mod protocol;
mod reason;
mod replay;
mod server;

pub use engine::{Engine, HandleError, Session};
pub use protocol::{decode_line, DecodeError, Inbound, ReadingPayload, WireMessage};
pub use reason::{appliance_query, reason_at, ApplianceCommand};
pub use replay::{replay, replay_lines, ReplayError, ReplayReport, ReplayStats};
pub use server::serve;
