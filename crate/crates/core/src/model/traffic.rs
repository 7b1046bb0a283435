use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What an SU does after CSMA-F declines to transmit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeferPolicy {
    /// Wait one slot, then sense again.
    #[default]
    OneSlot,
    /// Wait a full random backoff, then sense again.
    Backoff,
}

/// Per-SU traffic and timing parameters. All durations are in slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficModel {
    /// Mean Poisson inter-arrival time; `inf` disables arrivals.
    pub mean_arrival_interval: f64,
    pub packet_size_min: u32,
    pub packet_size_max: u32,
    pub backoff_mean: f64,
    pub sensing_slots: u32,
    /// Extra slots between a transmit decision and the first data slot.
    pub transition_slots: u32,
    pub defer_policy: DeferPolicy,
}

impl Default for TrafficModel {
    fn default() -> Self {
        Self {
            mean_arrival_interval: 50.0,
            packet_size_min: 50,
            packet_size_max: 50,
            backoff_mean: 10.0,
            sensing_slots: 1,
            transition_slots: 0,
            defer_policy: DeferPolicy::OneSlot,
        }
    }
}

impl TrafficModel {
    pub fn validate(&self) -> Result<()> {
        if self.mean_arrival_interval.is_nan() || self.mean_arrival_interval <= 0.0 {
            return Err(Error::Config(format!(
                "mean_arrival_interval must be positive, got {}",
                self.mean_arrival_interval
            )));
        }
        if self.packet_size_min == 0 || self.packet_size_min > self.packet_size_max {
            return Err(Error::Config(format!(
                "packet sizes need 1 <= min <= max, got [{}, {}]",
                self.packet_size_min, self.packet_size_max
            )));
        }
        if self.backoff_mean.is_nan() || self.backoff_mean < 1.0 {
            return Err(Error::Config(format!(
                "backoff_mean must be at least 1 slot, got {}",
                self.backoff_mean
            )));
        }
        if self.sensing_slots == 0 {
            return Err(Error::Config("sensing_slots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn mean_packet_size(&self) -> f64 {
        (self.packet_size_min as f64 + self.packet_size_max as f64) / 2.0
    }
}

/// Poisson arrival stream in continuous slot-time, reported per slot.
///
/// Successive gaps are exponential with the configured mean; an arrival at
/// time `t` lands in slot `floor(t)`.
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    gap: Option<Exp<f64>>,
    next: f64,
}

impl ArrivalProcess {
    pub fn new<R: Rng + ?Sized>(mean_interval: f64, rng: &mut R) -> Result<Self> {
        if mean_interval.is_nan() || mean_interval <= 0.0 {
            return Err(Error::Config(format!(
                "mean arrival interval must be positive, got {mean_interval}"
            )));
        }
        if mean_interval.is_infinite() {
            return Ok(Self {
                gap: None,
                next: f64::INFINITY,
            });
        }
        let gap = Exp::new(1.0 / mean_interval)
            .map_err(|e| Error::Config(format!("arrival distribution: {e}")))?;
        let next = gap.sample(rng);
        Ok(Self {
            gap: Some(gap),
            next,
        })
    }

    /// Slot of the next pending arrival, if any.
    pub fn peek_slot(&self) -> Option<u64> {
        self.next.is_finite().then(|| self.next.floor() as u64)
    }

    /// Consumes and counts every arrival falling in `slot`. Arrivals in
    /// earlier slots that were never polled are counted too.
    pub fn take_slot<R: Rng + ?Sized>(&mut self, slot: u64, rng: &mut R) -> u32 {
        let Some(gap) = self.gap else { return 0 };
        let end = (slot + 1) as f64;
        let mut n = 0;
        while self.next < end {
            n += 1;
            self.next += gap.sample(rng);
        }
        n
    }
}

/// Arrival slots of a Poisson process with mean gap `mean_interval` over
/// `[0, horizon)`, sorted, one entry per arrival.
pub fn sample_arrivals<R: Rng + ?Sized>(
    rng: &mut R,
    mean_interval: f64,
    horizon: u64,
) -> Result<Vec<u64>> {
    let mut process = ArrivalProcess::new(mean_interval, rng)?;
    let mut out = Vec::new();
    while let Some(slot) = process.peek_slot() {
        if slot >= horizon {
            break;
        }
        let n = process.take_slot(slot, rng);
        out.extend(std::iter::repeat_n(slot, n as usize));
    }
    Ok(out)
}

/// Packet transmission time, uniform on `{min, ..., max}`.
pub fn sample_packet_size<R: Rng + ?Sized>(rng: &mut R, min: u32, max: u32) -> Result<u32> {
    if min == 0 || min > max {
        return Err(Error::Config(format!(
            "packet sizes need 1 <= min <= max, got [{min}, {max}]"
        )));
    }
    Ok(rng.random_range(min..=max))
}

/// Geometric backoff on `{1, 2, ...}` with success probability `1 / mean`.
pub fn sample_backoff<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<u32> {
    if mean.is_nan() || mean < 1.0 {
        return Err(Error::Config(format!(
            "backoff mean must be at least 1 slot, got {mean}"
        )));
    }
    let dist = Geometric::new(1.0 / mean)
        .map_err(|e| Error::Config(format!("backoff distribution: {e}")))?;
    let failures = dist.sample(rng);
    Ok(u32::try_from(failures.saturating_add(1)).unwrap_or(u32::MAX))
}
