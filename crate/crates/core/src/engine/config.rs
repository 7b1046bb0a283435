use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mac::{MacAlgorithm, SuInfoMode, Timing};
use crate::model::{ChannelId, ChannelMask, ChannelSet, TrafficModel};
use crate::sensing::SensingModel;

/// Channels held by primary users over `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuInterval {
    pub start: u64,
    pub end: u64,
    pub busy: Vec<u32>,
}

/// When an SU is part of the system. Outside `[join, leave)` it is inactive.
/// A leave request waits until the SU is back to monitoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuPresence {
    pub su: u32,
    #[serde(default)]
    pub join: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leave: Option<u64>,
}

/// Complete description of one experiment. Omitted fields take the values
/// of [`ScenarioConfig::default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// `N_c`.
    pub total_channels: u32,
    /// Channels free of primary users; all of them when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub available: Option<Vec<u32>>,
    /// `M`.
    pub num_sus: u32,
    pub mac_algorithm: MacAlgorithm,
    pub su_info: SuInfoMode,
    pub traffic: TrafficModel,
    pub sensing: SensingModel,
    /// Measured slots per replication (after warm-up).
    pub horizon: u64,
    /// Slots simulated before measurement starts; `5 (T_s + E[T_d])` when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warmup: Option<u64>,
    pub seed: u64,
    pub replications: u32,
    /// Per-SU payload per successful slot (`R_m`); all 1 when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pu_schedule: Vec<PuInterval>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub su_schedule: Vec<SuPresence>,
    /// When false, a lost packet clears the SU's channel record and its next
    /// packet starts from initial access.
    pub rerendezvous_after_loss: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            total_channels: 20,
            available: None,
            num_sus: 20,
            mac_algorithm: MacAlgorithm::Csma,
            su_info: SuInfoMode::None,
            traffic: TrafficModel::default(),
            sensing: SensingModel::Perfect,
            horizon: 100_000,
            warmup: None,
            seed: 1,
            replications: 20,
            rates: None,
            pu_schedule: Vec::new(),
            su_schedule: Vec::new(),
            rerendezvous_after_loss: true,
        }
    }
}

impl ScenarioConfig {
    /// Switches policy and the matching information mode together.
    pub fn with_algorithm(mut self, algorithm: MacAlgorithm) -> Self {
        self.mac_algorithm = algorithm;
        self.su_info = algorithm.required_info();
        self
    }

    pub fn channel_set(&self) -> Result<ChannelSet> {
        match &self.available {
            None => ChannelSet::full(self.total_channels),
            Some(list) => ChannelSet::new(
                self.total_channels,
                list.iter().copied().map(ChannelId).collect(),
            ),
        }
    }

    pub fn timing(&self) -> Timing {
        Timing {
            sensing_slots: self.traffic.sensing_slots,
            transition_slots: self.traffic.transition_slots,
        }
    }

    pub fn warmup_slots(&self) -> u64 {
        self.warmup.unwrap_or_else(|| {
            let cycle = self.traffic.sensing_slots as f64 + self.traffic.mean_packet_size();
            (5.0 * cycle).ceil() as u64
        })
    }

    pub fn rate_weights(&self) -> Vec<f64> {
        self.rates
            .clone()
            .unwrap_or_else(|| vec![1.0; self.num_sus as usize])
    }

    /// Primary-user busy mask at `slot`.
    pub fn pu_busy_at(&self, slot: u64) -> ChannelMask {
        ChannelMask::from_channels(
            self.total_channels,
            self.pu_schedule
                .iter()
                .filter(|iv| iv.start <= slot && slot < iv.end)
                .flat_map(|iv| iv.busy.iter().copied().map(ChannelId)),
        )
    }

    /// Checks every cross-field rule; run before slot 0.
    pub fn validate(&self) -> Result<()> {
        self.channel_set()?;
        if self.num_sus == 0 {
            return Err(Error::Config("num_sus must be at least 1".into()));
        }
        let needed = self.mac_algorithm.required_info();
        if self.su_info != needed {
            return Err(Error::Config(format!(
                "mac_algorithm {} requires su_info = {}, got {}",
                self.mac_algorithm,
                info_name(needed),
                info_name(self.su_info)
            )));
        }
        self.traffic.validate()?;
        self.sensing.validate()?;
        let min_horizon = 10.0 * self.traffic.mean_packet_size();
        if (self.horizon as f64) < min_horizon {
            return Err(Error::Config(format!(
                "horizon {} is shorter than 10 mean packet times ({min_horizon})",
                self.horizon
            )));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if let Some(rates) = &self.rates {
            if rates.len() != self.num_sus as usize {
                return Err(Error::Config(format!(
                    "rates has {} entries for {} SUs",
                    rates.len(),
                    self.num_sus
                )));
            }
            if rates.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
                return Err(Error::Config(
                    "rates must be finite and non-negative".into(),
                ));
            }
            if rates.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config("rates sum to zero".into()));
            }
        }
        for iv in &self.pu_schedule {
            if iv.start >= iv.end {
                return Err(Error::Config(format!(
                    "primary-user interval [{}, {}) is empty",
                    iv.start, iv.end
                )));
            }
            if let Some(c) = iv.busy.iter().find(|&&c| c == 0 || c > self.total_channels) {
                return Err(Error::Config(format!(
                    "primary-user channel {c} out of range"
                )));
            }
        }
        for p in &self.su_schedule {
            if p.su == 0 || p.su > self.num_sus {
                return Err(Error::Config(format!(
                    "su_schedule names unknown SU {}",
                    p.su
                )));
            }
            if matches!(p.leave, Some(l) if l <= p.join) {
                return Err(Error::Config(format!("SU {} leaves before it joins", p.su)));
            }
        }
        Ok(())
    }
}

fn info_name(mode: SuInfoMode) -> &'static str {
    match mode {
        SuInfoMode::Full => "full",
        SuInfoMode::Partial => "partial",
        SuInfoMode::None => "none",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        ScenarioConfig::default().validate().unwrap();
    }

    #[test]
    fn mismatched_information_is_rejected() {
        let cfg = ScenarioConfig {
            mac_algorithm: MacAlgorithm::CsmaF,
            su_info: SuInfoMode::None,
            ..ScenarioConfig::default()
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("requires su_info = full"), "{err}");
        for a in MacAlgorithm::ALL {
            ScenarioConfig::default()
                .with_algorithm(a)
                .validate()
                .unwrap();
        }
    }

    #[test]
    fn short_horizon_and_bad_rates() {
        let cfg = ScenarioConfig {
            horizon: 100,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ScenarioConfig {
            num_sus: 2,
            rates: Some(vec![1.0]),
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ScenarioConfig {
            num_sus: 2,
            rates: Some(vec![0.0, 0.0]),
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn omitted_fields_take_defaults() {
        let cfg: ScenarioConfig = toml::from_str("num_sus = 3").unwrap();
        assert_eq!(cfg.num_sus, 3);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.replications, 20);
        assert!(cfg.rerendezvous_after_loss);
        assert!(toml::from_str::<ScenarioConfig>("num_suss = 3").is_err());
    }

    #[test]
    fn warmup_default() {
        assert_eq!(ScenarioConfig::default().warmup_slots(), 255);
    }

    #[test]
    fn pu_schedule_mask() {
        let cfg = ScenarioConfig {
            pu_schedule: vec![PuInterval {
                start: 10,
                end: 20,
                busy: vec![3, 4],
            }],
            ..ScenarioConfig::default()
        };
        assert_eq!(cfg.pu_busy_at(9).count(), 0);
        assert_eq!(cfg.pu_busy_at(10).count(), 2);
        assert_eq!(cfg.pu_busy_at(20).count(), 0);
    }
}
