use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChannelId, ChannelMask, ChannelSet};

/// Averaged energy detector over `samples_per_channel` complex samples per
/// channel and `averaging_depth` (K) averaging steps.
///
/// Leakage levels are relative to the power of the leaking signal, so with
/// the defaults (42 dB SNR, -30 dB side lobe, -19.5 dB image) a neighbour
/// shows up 12 dB and a mirror image 22.5 dB above the noise floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyDetector {
    /// Noise power per complex sample (linear).
    pub noise_power: f64,
    /// Per-sample SNR of an occupying signal.
    pub snr_db: f64,
    /// Threshold relative to the mean noise-only statistic.
    pub threshold_tnr_db: f64,
    pub averaging_depth: u32,
    pub samples_per_channel: u32,
    /// Power leaked into each adjacent channel, relative to the signal.
    pub sidelobe_rel_db: f64,
    /// Power leaked into the mirror channel, relative to the signal.
    pub iq_image_rel_db: f64,
}

impl Default for EnergyDetector {
    fn default() -> Self {
        Self {
            noise_power: 1.0,
            snr_db: 42.0,
            threshold_tnr_db: 17.0,
            averaging_depth: 10,
            samples_per_channel: 120,
            sidelobe_rel_db: -30.0,
            iq_image_rel_db: -19.5,
        }
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl EnergyDetector {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Config(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            )));
        }
        if self.averaging_depth == 0 {
            return Err(Error::Config("averaging_depth must be at least 1".into()));
        }
        if self.samples_per_channel == 0 {
            return Err(Error::Config(
                "samples_per_channel must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Mean of the statistic on an idle, interference-free channel.
    pub fn noise_floor(&self) -> f64 {
        self.samples_per_channel as f64 * self.noise_power
    }

    /// Decision threshold for a given threshold-to-noise ratio.
    pub fn threshold_at(&self, tnr_db: f64) -> f64 {
        self.noise_floor() * db_to_linear(tnr_db)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold_at(self.threshold_tnr_db)
    }

    pub fn signal_power(&self) -> f64 {
        self.noise_power * db_to_linear(self.snr_db)
    }

    pub fn with_depth(&self, k: u32) -> Self {
        Self {
            averaging_depth: k,
            ..self.clone()
        }
    }
}

/// Which neighbours of the observed channel are transmitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InterferenceContext {
    /// Occupied channels directly next to this one (0, 1 or 2).
    pub adjacent_occupied: u32,
    /// Whether the channel mirrored about the band centre is occupied.
    pub mirror_occupied: bool,
}

impl InterferenceContext {
    pub fn from_mask(ch: ChannelId, busy: &ChannelMask, band: &ChannelSet) -> Self {
        let adjacent_occupied = [ch.0.checked_sub(1), ch.0.checked_add(1)]
            .into_iter()
            .flatten()
            .filter(|&c| c >= 1 && c <= band.total() && busy.contains(ChannelId(c)))
            .count() as u32;
        let mirror = band.mirror(ch);
        Self {
            adjacent_occupied,
            mirror_occupied: mirror != ch && busy.contains(mirror),
        }
    }
}

/// Draws `y = (1/K) sum_k sum_i |x_ik + w_ik|^2` for one channel.
///
/// `w` is circular Gaussian noise; `x` collects the channel's own signal
/// (when occupied) and the leakage from occupied neighbours. All components
/// are independent circular Gaussians, so each sample of `x + w` is drawn
/// as a single circular Gaussian with the summed power.
pub fn energy_statistic<R: Rng + ?Sized>(
    det: &EnergyDetector,
    occupied: bool,
    ctx: &InterferenceContext,
    rng: &mut R,
) -> f64 {
    let signal = det.signal_power();
    let mut power = det.noise_power;
    if occupied {
        power += signal;
    }
    power += ctx.adjacent_occupied as f64 * signal * db_to_linear(det.sidelobe_rel_db);
    if ctx.mirror_occupied {
        power += signal * db_to_linear(det.iq_image_rel_db);
    }
    let sigma = (power / 2.0).sqrt();
    let k = det.averaging_depth;
    let mut total = 0.0;
    for _ in 0..k {
        for _ in 0..det.samples_per_channel {
            let re: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            let im: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
            total += re * re + im * im;
        }
    }
    total / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn idle_statistic_concentrates_at_noise_floor() {
        let det = EnergyDetector {
            averaging_depth: 100,
            ..EnergyDetector::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ctx = InterferenceContext::default();
        for _ in 0..1000 {
            let y = energy_statistic(&det, false, &ctx, &mut rng);
            assert!((y / det.noise_floor() - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn idle_mean_is_depth_free_and_variance_shrinks_with_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ctx = InterferenceContext::default();
        let base = EnergyDetector::default();
        let draw = |k: u32, rng: &mut ChaCha8Rng| -> Vec<f64> {
            let det = base.with_depth(k);
            (0..4000)
                .map(|_| energy_statistic(&det, false, &ctx, rng))
                .collect()
        };
        let (m1, v1) = mean_var(&draw(1, &mut rng));
        let (m4, v4) = mean_var(&draw(4, &mut rng));
        assert!((m1 / m4 - 1.0).abs() < 0.01);
        let ratio = v1 / v4;
        assert!((ratio / 4.0 - 1.0).abs() < 0.10, "variance ratio {ratio}");
    }

    #[test]
    fn minus_infinity_threshold_flags_everything() {
        let det = EnergyDetector {
            threshold_tnr_db: f64::NEG_INFINITY,
            ..EnergyDetector::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ctx = InterferenceContext::default();
        assert!((0..1000).all(|_| energy_statistic(&det, false, &ctx, &mut rng) > det.threshold()));
    }

    #[test]
    fn image_false_alarms_vanish_above_the_image() {
        // image 22.5 dB over noise; threshold 1.5 dB higher still
        let det = EnergyDetector::default();
        let image_tnr = 10.0 * (1.0 + db_to_linear(det.snr_db + det.iq_image_rel_db)).log10();
        let det = EnergyDetector {
            threshold_tnr_db: image_tnr + 1.5,
            ..det
        };
        let ctx = InterferenceContext {
            adjacent_occupied: 0,
            mirror_occupied: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 2000;
        let alarms = (0..trials)
            .filter(|_| energy_statistic(&det, false, &ctx, &mut rng) > det.threshold())
            .count();
        assert!((alarms as f64 / trials as f64) < 0.01);
    }

    #[test]
    fn interference_context_from_mask() {
        let band = ChannelSet::full(10).unwrap();
        let busy = ChannelMask::from_channels(10, [ChannelId(1), ChannelId(3)]);
        let ctx = InterferenceContext::from_mask(ChannelId(2), &busy, &band);
        assert_eq!(ctx.adjacent_occupied, 2);
        assert!(!ctx.mirror_occupied);
        let ctx = InterferenceContext::from_mask(ChannelId(10), &busy, &band);
        assert!(ctx.mirror_occupied);
        assert_eq!(ctx.adjacent_occupied, 0);
    }
}
