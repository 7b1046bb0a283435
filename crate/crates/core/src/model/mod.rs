//! Domain types shared by the analysis and the simulator: channels,
//! transmitters, traffic processes and collision-channel slot resolution.

mod channels;
mod slot;
mod traffic;
mod transmitter;

pub use channels::{ChannelId, ChannelMask, ChannelSet};
pub use slot::{resolve_slot, Occupancy, SlotOutcome, SuId};
pub use traffic::{
    sample_arrivals, sample_backoff, sample_packet_size, ArrivalProcess, DeferPolicy, TrafficModel,
};
pub use transmitter::{SuState, SuTransmitter};
