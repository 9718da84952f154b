//! Simulator and analysis library for the two-pair binary intermittent
//! interference network with one-slot-delayed channel state at the
//! transmitters.
//!
//! - [`channel`]: link model, situation numbers, symbolic reception.
//! - [`region`]: outer bound, cornerpoints, zones, policy mixing.
//! - [`protocol`]: virtual queues, control table, XOR combining.
//! - [`receiver`]: GF(2) equation logs and the transmitter-state tracker.
//! - [`sim`]: end-to-end runs, stability sweeps, lifetime fits.

pub mod channel;
pub mod error;
pub mod protocol;
pub mod receiver;
pub mod region;
pub mod rng;
pub mod sim;

pub use error::Error;
