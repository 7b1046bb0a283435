use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw channel index in `1..=total_channels`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChannelId(pub u32);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ch{}", self.0)
    }
}

/// The `N_c` channels of the band and the subset left free by primary users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelSet {
    total: u32,
    available: Vec<ChannelId>,
}

impl ChannelSet {
    pub fn new(total: u32, available: Vec<ChannelId>) -> Result<Self> {
        if total == 0 {
            return Err(Error::Config("total_channels must be positive".into()));
        }
        for w in available.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Config(format!(
                    "available channels must be strictly increasing, got {} before {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(bad) = available.iter().find(|c| c.0 == 0 || c.0 > total) {
            return Err(Error::Config(format!(
                "available channel {} outside 1..={total}",
                bad.0
            )));
        }
        Ok(Self { total, available })
    }

    /// Every channel of the band is available.
    pub fn full(total: u32) -> Result<Self> {
        Self::new(total, (1..=total).map(ChannelId).collect())
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn available(&self) -> &[ChannelId] {
        &self.available
    }

    pub fn len(&self) -> usize {
        self.available.len()
    }

    pub fn is_empty(&self) -> bool {
        self.available.is_empty()
    }

    pub fn contains(&self, ch: ChannelId) -> bool {
        self.available.binary_search(&ch).is_ok()
    }

    /// Position of `ch` after relabeling the available channels as `1..=N_k`.
    pub fn relabel(&self, ch: ChannelId) -> Option<usize> {
        self.available.binary_search(&ch).ok().map(|i| i + 1)
    }

    /// Channel symmetric to `ch` about the band centre (`N_c + 1 - n`).
    pub fn mirror(&self, ch: ChannelId) -> ChannelId {
        ChannelId(self.total + 1 - ch.0)
    }

    /// Same band, with the channels in `busy` removed from the available set.
    pub fn without(&self, busy: &ChannelMask) -> ChannelSet {
        ChannelSet {
            total: self.total,
            available: self
                .available
                .iter()
                .copied()
                .filter(|&c| !busy.contains(c))
                .collect(),
        }
    }
}

/// Dense membership mask over raw channel indices `1..=total`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelMask {
    bits: Vec<bool>,
}

impl ChannelMask {
    pub fn new(total: u32) -> Self {
        Self {
            bits: vec![false; total as usize + 1],
        }
    }

    pub fn from_channels(total: u32, channels: impl IntoIterator<Item = ChannelId>) -> Self {
        let mut m = Self::new(total);
        for c in channels {
            m.insert(c);
        }
        m
    }

    pub fn contains(&self, ch: ChannelId) -> bool {
        self.bits.get(ch.0 as usize).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, ch: ChannelId) {
        let i = ch.0 as usize;
        if i >= self.bits.len() {
            self.bits.resize(i + 1, false);
        }
        self.bits[i] = true;
    }

    pub fn clear(&mut self) {
        self.bits.iter_mut().for_each(|b| *b = false);
    }

    pub fn union_with(&mut self, other: &ChannelMask) {
        if other.bits.len() > self.bits.len() {
            self.bits.resize(other.bits.len(), false);
        }
        for (a, &b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ChannelId> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| ChannelId(i as u32))
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_or_out_of_range() {
        assert!(ChannelSet::new(4, vec![ChannelId(2), ChannelId(1)]).is_err());
        assert!(ChannelSet::new(4, vec![ChannelId(2), ChannelId(2)]).is_err());
        assert!(ChannelSet::new(4, vec![ChannelId(5)]).is_err());
        assert!(ChannelSet::new(4, vec![ChannelId(0)]).is_err());
        assert!(ChannelSet::new(0, vec![]).is_err());
    }

    #[test]
    fn relabels_contiguously() {
        let set = ChannelSet::new(10, vec![ChannelId(3), ChannelId(7), ChannelId(9)]).unwrap();
        assert_eq!(set.relabel(ChannelId(3)), Some(1));
        assert_eq!(set.relabel(ChannelId(9)), Some(3));
        assert_eq!(set.relabel(ChannelId(4)), None);
        assert_eq!(set.mirror(ChannelId(1)), ChannelId(10));
        assert_eq!(set.mirror(ChannelId(3)), ChannelId(8));
    }

    #[test]
    fn without_removes_busy() {
        let set = ChannelSet::full(5).unwrap();
        let busy = ChannelMask::from_channels(5, [ChannelId(2), ChannelId(5)]);
        let free = set.without(&busy);
        assert_eq!(
            free.available(),
            &[ChannelId(1), ChannelId(3), ChannelId(4)]
        );
    }
}
