//! Receiver-side equation logs and the transmitter-state tracker.

mod log;
mod replica;

pub use log::{brute_force_decodable, EquationLog};
pub use replica::{replica_close, replica_step, TrackerReplica, UpdateMessage};
