use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ChannelId;
use crate::error::{Error, Result};

/// Secondary-user index, `1..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SuId(pub u32);

impl fmt::Display for SuId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "su{}", self.0)
    }
}

/// What happened on every channel during one slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SlotOutcome {
    pub slot_index: u64,
    pub transmissions: BTreeMap<ChannelId, BTreeSet<SuId>>,
    pub successes: BTreeSet<(SuId, ChannelId)>,
}

impl SlotOutcome {
    /// Channels carrying two or more transmitters.
    pub fn collided_channels(&self) -> impl Iterator<Item = ChannelId> + '_ {
        self.transmissions
            .iter()
            .filter(|(_, s)| s.len() > 1)
            .map(|(&c, _)| c)
    }
}

/// Collision-channel resolution: a channel delivers iff exactly one SU uses it.
pub fn resolve_slot(
    transmissions: &BTreeMap<ChannelId, BTreeSet<SuId>>,
    slot_index: u64,
) -> Result<SlotOutcome> {
    let mut seen = BTreeMap::new();
    for (&ch, sus) in transmissions {
        for &su in sus {
            if let Some(other) = seen.insert(su, ch) {
                return Err(Error::ModelViolation(format!(
                    "{su} transmits on both {other} and {ch} in slot {slot_index}"
                )));
            }
        }
    }
    let successes = transmissions
        .iter()
        .filter_map(|(&ch, sus)| match sus.len() {
            1 => sus.iter().next().map(|&su| (su, ch)),
            _ => None,
        })
        .collect();
    Ok(SlotOutcome {
        slot_index,
        transmissions: transmissions.clone(),
        successes,
    })
}

/// Per-channel transmitter counts for one slot, reused across slots by the
/// simulator. Applies the same singleton rule as [`resolve_slot`].
#[derive(Debug, Clone)]
pub struct Occupancy {
    count: Vec<u16>,
    sole: Vec<Option<SuId>>,
}

impl Occupancy {
    pub fn new(total_channels: u32) -> Self {
        let n = total_channels as usize + 1;
        Self {
            count: vec![0; n],
            sole: vec![None; n],
        }
    }

    pub fn clear(&mut self) {
        self.count.iter_mut().for_each(|c| *c = 0);
        self.sole.iter_mut().for_each(|s| *s = None);
    }

    pub fn add(&mut self, su: SuId, ch: ChannelId) {
        let i = ch.0 as usize;
        self.count[i] = self.count[i].saturating_add(1);
        self.sole[i] = if self.count[i] == 1 { Some(su) } else { None };
    }

    pub fn transmitters(&self, ch: ChannelId) -> u16 {
        self.count[ch.0 as usize]
    }

    pub fn is_busy(&self, ch: ChannelId) -> bool {
        self.transmitters(ch) > 0
    }

    pub fn is_success(&self, su: SuId, ch: ChannelId) -> bool {
        self.sole[ch.0 as usize] == Some(su)
    }

    pub fn busy_channels(&self) -> impl Iterator<Item = ChannelId> + '_ {
        self.count
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| ChannelId(i as u32))
    }
}
