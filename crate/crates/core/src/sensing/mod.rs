//! Spectrum observation models: perfect knowledge, independent per-channel
//! Bernoulli errors, and an averaged energy detector with side-lobe and
//! IQ-image leakage.

mod curves;
mod energy;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelId, ChannelMask, ChannelSet};

pub use curves::{detection_curves, estimate_error_rates, CurveRow, Scenario};
pub use energy::{energy_statistic, EnergyDetector, InterferenceContext};

/// Error rates applied to one channel under the Bernoulli model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelErrorRates {
    pub channel: u32,
    pub p_false_alarm: f64,
    pub p_miss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensingModel {
    #[default]
    Perfect,
    Bernoulli {
        p_false_alarm: f64,
        p_miss: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        overrides: Vec<ChannelErrorRates>,
    },
    EnergyDetector(EnergyDetector),
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} = {p} is not a probability")));
    }
    Ok(())
}

impl SensingModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            SensingModel::Perfect => Ok(()),
            SensingModel::Bernoulli {
                p_false_alarm,
                p_miss,
                overrides,
            } => {
                check_probability("p_false_alarm", *p_false_alarm)?;
                check_probability("p_miss", *p_miss)?;
                for o in overrides {
                    check_probability("p_false_alarm", o.p_false_alarm)?;
                    check_probability("p_miss", o.p_miss)?;
                }
                Ok(())
            }
            SensingModel::EnergyDetector(det) => det.validate(),
        }
    }

    /// True when observations always equal the ground truth.
    pub fn is_perfect(&self) -> bool {
        match self {
            SensingModel::Perfect => true,
            SensingModel::Bernoulli {
                p_false_alarm,
                p_miss,
                overrides,
            } => {
                *p_false_alarm == 0.0
                    && *p_miss == 0.0
                    && overrides
                        .iter()
                        .all(|o| o.p_false_alarm == 0.0 && o.p_miss == 0.0)
            }
            SensingModel::EnergyDetector(_) => false,
        }
    }
}

/// Channels an SU believes are free after one sensing window.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SenseOutcome {
    pub available: Vec<ChannelId>,
    /// Free channels reported busy.
    pub false_alarms: u32,
    /// Busy channels reported free.
    pub misses: u32,
}

/// Observes the channels of `channels` (those not held by primary users)
/// given the set that is actually busy. `true_busy` may also mark channels
/// outside the available set; they only matter as leakage sources.
pub fn sense<R: Rng + ?Sized>(
    model: &SensingModel,
    true_busy: &ChannelMask,
    channels: &ChannelSet,
    rng: &mut R,
) -> SenseOutcome {
    let mut out = SenseOutcome::default();
    for &ch in channels.available() {
        let busy = true_busy.contains(ch);
        let reported_busy = match model {
            SensingModel::Perfect => busy,
            SensingModel::Bernoulli {
                p_false_alarm,
                p_miss,
                overrides,
            } => {
                let (pf, pm) = overrides
                    .iter()
                    .find(|o| o.channel == ch.0)
                    .map_or((*p_false_alarm, *p_miss), |o| (o.p_false_alarm, o.p_miss));
                if busy {
                    !rng.random_bool(pm)
                } else {
                    rng.random_bool(pf)
                }
            }
            SensingModel::EnergyDetector(det) => {
                let ctx = InterferenceContext::from_mask(ch, true_busy, channels);
                let y = energy_statistic(det, busy, &ctx, rng);
                y > det.threshold()
            }
        };
        match (busy, reported_busy) {
            (false, false) => out.available.push(ch),
            (false, true) => out.false_alarms += 1,
            (true, false) => {
                out.misses += 1;
                out.available.push(ch);
            }
            (true, true) => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn perfect_is_the_complement() {
        let set = ChannelSet::full(10).unwrap();
        let busy = ChannelMask::from_channels(10, [ChannelId(1), ChannelId(2)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = sense(&SensingModel::Perfect, &busy, &set, &mut rng);
        assert_eq!(out.available, (3..=10).map(ChannelId).collect::<Vec<_>>());
        assert_eq!((out.false_alarms, out.misses), (0, 0));
    }

    #[test]
    fn bernoulli_false_alarm_mean() {
        let set = ChannelSet::full(10).unwrap();
        let busy = ChannelMask::new(10);
        let model = SensingModel::Bernoulli {
            p_false_alarm: 0.1,
            p_miss: 0.0,
            overrides: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trials = 100_000;
        let total: u64 = (0..trials)
            .map(|_| sense(&model, &busy, &set, &mut rng).false_alarms as u64)
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean false alarms {mean}");
    }

    #[test]
    fn bernoulli_miss_rate() {
        let set = ChannelSet::full(10).unwrap();
        let busy = ChannelMask::from_channels(10, [ChannelId(4)]);
        let model = SensingModel::Bernoulli {
            p_false_alarm: 0.0,
            p_miss: 0.2,
            overrides: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| {
                sense(&model, &busy, &set, &mut rng)
                    .available
                    .contains(&ChannelId(4))
            })
            .count();
        let f = hits as f64 / trials as f64;
        assert!((f - 0.2).abs() < 0.01, "miss fraction {f}");
    }

    #[test]
    fn overrides_apply_per_channel() {
        let set = ChannelSet::full(3).unwrap();
        let busy = ChannelMask::new(3);
        let model = SensingModel::Bernoulli {
            p_false_alarm: 0.0,
            p_miss: 0.0,
            overrides: vec![ChannelErrorRates {
                channel: 2,
                p_false_alarm: 1.0,
                p_miss: 0.0,
            }],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = sense(&model, &busy, &set, &mut rng);
        assert_eq!(out.available, vec![ChannelId(1), ChannelId(3)]);
        assert!(!model.is_perfect());
    }

    #[test]
    fn validation_rejects_bad_probabilities() {
        let model = SensingModel::Bernoulli {
            p_false_alarm: 1.2,
            p_miss: 0.0,
            overrides: vec![],
        };
        assert!(model.validate().is_err());
    }
}
