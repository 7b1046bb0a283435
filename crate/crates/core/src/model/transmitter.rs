use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ChannelId, SuId};

/// Transmitter states of a secondary user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuState {
    /// Outside the sharing system.
    Inactive,
    /// Waiting for a packet.
    Monitoring,
    /// Looking for a channel with no usable history.
    Initial,
    /// Sending a packet.
    Transmitting,
    /// Looking for a channel, with a previously used channel on record.
    ReRendezvous,
}

impl SuState {
    /// Counted in `M_k`.
    pub fn is_accessing(self) -> bool {
        matches!(self, SuState::Initial | SuState::ReRendezvous)
    }
}

impl fmt::Display for SuState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SuState::Inactive => "inactive",
            SuState::Monitoring => "monitoring",
            SuState::Initial => "initial",
            SuState::Transmitting => "transmitting",
            SuState::ReRendezvous => "re_rendezvous",
        };
        f.write_str(s)
    }
}

/// One SU transmitter. Counters are in slots; transitions live in
/// [`crate::mac`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuTransmitter {
    pub id: SuId,
    pub state: SuState,
    pub previous_channel: Option<ChannelId>,
    pub packet_queue: VecDeque<u32>,
    pub remaining_tx_slots: u32,
    pub backoff_remaining: u32,
    pub sensing_remaining: u32,
    pub rate_weight: f64,
    /// Defer countdown after a declined access attempt.
    pub defer_remaining: u32,
    /// Sensing-to-transmit switch countdown.
    pub transition_remaining: u32,
    /// Size of the packet being served, set when it leaves the queue.
    pub current_packet: Option<u32>,
    /// Channel in use while transmitting, or chosen while transitioning.
    pub current_channel: Option<ChannelId>,
}

impl SuTransmitter {
    pub fn new(id: SuId, rate_weight: f64) -> Self {
        Self {
            id,
            state: SuState::Monitoring,
            previous_channel: None,
            packet_queue: VecDeque::new(),
            remaining_tx_slots: 0,
            backoff_remaining: 0,
            sensing_remaining: 0,
            rate_weight,
            defer_remaining: 0,
            transition_remaining: 0,
            current_packet: None,
            current_channel: None,
        }
    }

    pub fn inactive(id: SuId, rate_weight: f64) -> Self {
        Self {
            state: SuState::Inactive,
            ..Self::new(id, rate_weight)
        }
    }

    pub fn enqueue(&mut self, packet_slots: u32) {
        self.packet_queue.push_back(packet_slots);
    }

    /// Channel occupied this slot, if transmitting.
    pub fn transmitting_on(&self) -> Option<ChannelId> {
        match self.state {
            SuState::Transmitting => self.current_channel,
            _ => None,
        }
    }
}
