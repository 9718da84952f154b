use std::sync::Arc;

use crate::channel::{ChannelState, Composition};
use crate::error::Error;
use crate::protocol::{ControlTable, Protocol, ProtocolConfig};

/// Arrival counts announced by one update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct UpdateMessage {
    pub slot: usize,
    pub counts: [usize; 2],
}

/// Re-derives both transmitters' queues from delayed channel states, update
/// announcements and the common seed.
#[derive(Clone, Debug)]
pub struct TrackerReplica {
    protocol: Protocol,
    last_sn: Vec<u8>,
}

impl TrackerReplica {
    pub fn new(cfg: ProtocolConfig, table: Arc<ControlTable>) -> Self {
        TrackerReplica { protocol: Protocol::new(cfg, table), last_sn: Vec::new() }
    }

    pub fn protocol(&self) -> &Protocol {
        &self.protocol
    }

    /// Situation numbers seen so far.
    pub fn sn_history(&self) -> &[u8] {
        &self.last_sn
    }

    /// Checks the replica against the true transmitter state.
    pub fn verify(&self, truth: &Protocol, slot: usize) -> Result<(), Error> {
        self.protocol.same_state(truth).map_err(|detail| Error::ReplicaDivergence { slot, detail })
    }
}

/// Advances the replica through one slot up to transmission and returns the
/// compositions it expects each transmitter to send.
pub fn replica_step(
    replica: &mut TrackerReplica,
    slot: usize,
    delayed_state: Option<ChannelState>,
    update: Option<UpdateMessage>,
) -> [Option<Composition>; 2] {
    let p = &mut replica.protocol;
    if let Some(s) = delayed_state {
        replica.last_sn.push(crate::channel::sn_of(s).get());
        p.apply_feedback(s, slot);
    }
    p.xor_step(slot);
    if let Some(u) = update {
        p.announce(u.counts, slot);
    }
    p.transmit()
}

/// Applies the last slot's delayed state without starting a new slot.
pub fn replica_close(replica: &mut TrackerReplica, slot: usize, delayed_state: ChannelState) {
    replica.last_sn.push(crate::channel::sn_of(delayed_state).get());
    replica.protocol.apply_feedback(delayed_state, slot);
}
