use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{sample_backoff, ChannelId, DeferPolicy, SuTransmitter};

/// Access policy run by every SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MacAlgorithm {
    CsmaF,
    CsmaP,
    Csma,
}

impl MacAlgorithm {
    pub const ALL: [MacAlgorithm; 3] =
        [MacAlgorithm::CsmaF, MacAlgorithm::CsmaP, MacAlgorithm::Csma];

    /// The only information mode this policy accepts.
    pub fn required_info(self) -> SuInfoMode {
        match self {
            MacAlgorithm::CsmaF => SuInfoMode::Full,
            MacAlgorithm::CsmaP => SuInfoMode::Partial,
            MacAlgorithm::Csma => SuInfoMode::None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MacAlgorithm::CsmaF => "csma_f",
            MacAlgorithm::CsmaP => "csma_p",
            MacAlgorithm::Csma => "csma",
        }
    }
}

impl fmt::Display for MacAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MacAlgorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csma_f" => Ok(MacAlgorithm::CsmaF),
            "csma_p" => Ok(MacAlgorithm::CsmaP),
            "csma" => Ok(MacAlgorithm::Csma),
            other => Err(Error::Config(format!("unknown mac_algorithm `{other}`"))),
        }
    }
}

/// How much an SU knows about the number of contending SUs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuInfoMode {
    Full,
    Partial,
    None,
}

/// What the oracle hands a deciding SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuInformation {
    /// `M_k` itself.
    Full(u32),
    /// Whether `M_k >= N_k`.
    Partial(bool),
    None,
}

pub fn su_information_oracle(mode: SuInfoMode, true_m_k: u32, n_k: u32) -> SuInformation {
    match mode {
        SuInfoMode::Full => SuInformation::Full(true_m_k),
        SuInfoMode::Partial => SuInformation::Partial(true_m_k >= n_k),
        SuInfoMode::None => SuInformation::None,
    }
}

/// A policy's verdict at the end of a sensing window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacDecision {
    /// Sense again right away.
    Sense,
    /// No channel was free; wait this many slots.
    Backoff(u32),
    Transmit(ChannelId),
    /// Declined to transmit although a channel was free.
    Defer {
        slots: u32,
    },
}

/// Timing knobs shared by all policies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessParams {
    pub backoff_mean: f64,
    pub defer_policy: DeferPolicy,
}

fn backoff<R: Rng + ?Sized>(params: &AccessParams, rng: &mut R) -> Result<MacDecision> {
    sample_backoff(rng, params.backoff_mean).map(MacDecision::Backoff)
}

fn uniform_channel<R: Rng + ?Sized>(available: &[ChannelId], rng: &mut R) -> ChannelId {
    available[rng.random_range(0..available.len())]
}

fn previous_if_free(su: &SuTransmitter, available: &[ChannelId]) -> Option<ChannelId> {
    su.previous_channel
        .filter(|prev| available.binary_search(prev).is_ok())
}

/// Multichannel CSMA with full SU information.
///
/// Keeps the previous channel when `M_k <= N_k` and it is free; otherwise
/// transmits with total probability `min(1, N_k / M_k)` on a uniformly
/// chosen free channel, i.e. `min(1/M_k, 1/N_k)` per channel.
pub fn decide_csma_f<R: Rng + ?Sized>(
    su: &SuTransmitter,
    available: &[ChannelId],
    m_k: u32,
    params: &AccessParams,
    rng: &mut R,
) -> Result<MacDecision> {
    if m_k == 0 {
        return Err(Error::Oracle(format!(
            "{} is deciding but M_k = 0 excludes it",
            su.id
        )));
    }
    if available.is_empty() {
        return backoff(params, rng);
    }
    let n_k = available.len() as u32;
    if m_k <= n_k {
        if let Some(prev) = previous_if_free(su, available) {
            return Ok(MacDecision::Transmit(prev));
        }
        return Ok(MacDecision::Transmit(uniform_channel(available, rng)));
    }
    let p_transmit = n_k as f64 / m_k as f64;
    if rng.random::<f64>() < p_transmit {
        Ok(MacDecision::Transmit(uniform_channel(available, rng)))
    } else {
        let slots = match params.defer_policy {
            DeferPolicy::OneSlot => 1,
            DeferPolicy::Backoff => sample_backoff(rng, params.backoff_mean)?,
        };
        Ok(MacDecision::Defer { slots })
    }
}

/// Multichannel CSMA with partial SU information: re-rendezvous only when
/// the bit says `M_k < N_k`; otherwise always transmit on a uniformly chosen
/// free channel.
pub fn decide_csma_p<R: Rng + ?Sized>(
    su: &SuTransmitter,
    available: &[ChannelId],
    m_k_at_least_n_k: bool,
    params: &AccessParams,
    rng: &mut R,
) -> Result<MacDecision> {
    if available.is_empty() {
        return backoff(params, rng);
    }
    if !m_k_at_least_n_k {
        if let Some(prev) = previous_if_free(su, available) {
            return Ok(MacDecision::Transmit(prev));
        }
    }
    Ok(MacDecision::Transmit(uniform_channel(available, rng)))
}

/// Plain multichannel CSMA: a uniformly chosen free channel, or backoff.
pub fn decide_csma<R: Rng + ?Sized>(
    _su: &SuTransmitter,
    available: &[ChannelId],
    params: &AccessParams,
    rng: &mut R,
) -> Result<MacDecision> {
    if available.is_empty() {
        return backoff(params, rng);
    }
    Ok(MacDecision::Transmit(uniform_channel(available, rng)))
}
