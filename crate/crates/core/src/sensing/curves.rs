use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{energy_statistic, EnergyDetector, InterferenceContext};
use crate::error::{Error, Result};

/// Channel condition under which a detection curve is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Scenario {
    /// Idle channel, nothing nearby.
    Noise,
    /// Idle channel next to an occupied one.
    Sidelobe,
    /// Idle channel whose mirror is occupied.
    IqImage,
    /// Occupied channel.
    Signal,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Noise,
        Scenario::Sidelobe,
        Scenario::IqImage,
        Scenario::Signal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Noise => "noise",
            Scenario::Sidelobe => "sidelobe",
            Scenario::IqImage => "iq-image",
            Scenario::Signal => "signal",
        }
    }

    fn occupied(self) -> bool {
        self == Scenario::Signal
    }

    fn context(self) -> InterferenceContext {
        match self {
            Scenario::Sidelobe => InterferenceContext {
                adjacent_occupied: 1,
                mirror_occupied: false,
            },
            Scenario::IqImage => InterferenceContext {
                adjacent_occupied: 0,
                mirror_occupied: true,
            },
            Scenario::Noise | Scenario::Signal => InterferenceContext::default(),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One point of a detection curve. Idle scenarios report `p_f`, the
/// occupied scenario reports `p_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub tnr_db: f64,
    pub scenario: Scenario,
    pub trials: u32,
    pub p_f: Option<f64>,
    pub p_m: Option<f64>,
    pub k: u32,
}

fn stream_rng(seed: u64, scenario: Scenario, k: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((scenario as u64) << 32) | k as u64);
    rng
}

fn draw(det: &EnergyDetector, scenario: Scenario, trials: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let ctx = scenario.context();
    let mut ys: Vec<f64> = (0..trials)
        .map(|_| energy_statistic(det, scenario.occupied(), &ctx, rng))
        .collect();
    ys.sort_by(f64::total_cmp);
    ys
}

/// Empirical false-alarm and miss rates across a sweep of thresholds, for
/// every scenario and averaging depth.
///
/// All thresholds of one (scenario, K) pair are applied to the same draws,
/// so each curve is exactly monotone in the threshold. Every pair has its
/// own random stream derived from `seed`.
pub fn detection_curves(
    det: &EnergyDetector,
    tnr_sweep: &[f64],
    depths: &[u32],
    trials: u32,
    seed: u64,
) -> Result<Vec<CurveRow>> {
    det.validate()?;
    if tnr_sweep.is_empty() {
        return Err(Error::Config("threshold sweep is empty".into()));
    }
    if depths.is_empty() || depths.contains(&0) {
        return Err(Error::Config(
            "averaging depths must be a non-empty list of positive counts".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let mut rows = Vec::with_capacity(Scenario::ALL.len() * depths.len() * tnr_sweep.len());
    for scenario in Scenario::ALL {
        for &k in depths {
            let det_k = det.with_depth(k);
            let ys = draw(&det_k, scenario, trials, &mut stream_rng(seed, scenario, k));
            for &tnr in tnr_sweep {
                let gamma = det_k.threshold_at(tnr);
                // ys is sorted: index of the first draw strictly above gamma
                let at_or_below = ys.partition_point(|&y| y <= gamma);
                let above = ys.len() - at_or_below;
                let (p_f, p_m) = if scenario.occupied() {
                    (None, Some(at_or_below as f64 / trials as f64))
                } else {
                    (Some(above as f64 / trials as f64), None)
                };
                rows.push(CurveRow {
                    tnr_db: tnr,
                    scenario,
                    trials,
                    p_f,
                    p_m,
                    k,
                });
            }
        }
    }
    Ok(rows)
}

/// Noise-only false-alarm and clean-signal miss rates at the detector's
/// configured threshold, e.g. to parameterise the Bernoulli model.
pub fn estimate_error_rates(det: &EnergyDetector, trials: u32, seed: u64) -> Result<(f64, f64)> {
    let rows = detection_curves(
        det,
        &[det.threshold_tnr_db],
        &[det.averaging_depth],
        trials,
        seed,
    )?;
    let p_f = rows
        .iter()
        .find(|r| r.scenario == Scenario::Noise)
        .and_then(|r| r.p_f)
        .unwrap_or(0.0);
    let p_m = rows
        .iter()
        .find(|r| r.scenario == Scenario::Signal)
        .and_then(|r| r.p_m)
        .unwrap_or(0.0);
    Ok((p_f, p_m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep() -> Vec<f64> {
        (0..=90).map(|i| -2.0 + 0.5 * i as f64).collect()
    }

    #[test]
    fn noise_curve_falls_to_zero() {
        let det = EnergyDetector::default();
        let rows = detection_curves(&det, &sweep(), &[10], 2000, 1).unwrap();
        let noise: Vec<f64> = rows
            .iter()
            .filter(|r| r.scenario == Scenario::Noise)
            .map(|r| r.p_f.unwrap())
            .collect();
        assert!(noise.windows(2).all(|w| w[1] <= w[0]));
        assert!(noise[0] > 0.9);
        assert!(*noise.last().unwrap() < 1e-3);
    }

    #[test]
    fn signal_never_missed_two_db_below_signal_power() {
        let det = EnergyDetector::default();
        let tnr = 10.0 * (1.0 + 10f64.powf(det.snr_db / 10.0)).log10() - 2.0;
        let rows = detection_curves(&det, &[tnr], &[2, 5, 10], 10_000, 2).unwrap();
        for r in rows.iter().filter(|r| r.scenario == Scenario::Signal) {
            assert_eq!(r.p_m, Some(0.0), "K={}", r.k);
        }
    }

    #[test]
    fn deeper_averaging_misses_less() {
        let det = EnergyDetector::default();
        // just below the mean occupied statistic
        let edge = 10.0 * (1.0 + 10f64.powf(det.snr_db / 10.0)).log10();
        let tnrs: Vec<f64> = (-8..=-1).map(|d| edge + 0.25 * d as f64).collect();
        let rows = detection_curves(&det, &tnrs, &[1, 10], 5000, 3).unwrap();
        let pm = |k: u32| -> Vec<f64> {
            rows.iter()
                .filter(|r| r.scenario == Scenario::Signal && r.k == k)
                .map(|r| r.p_m.unwrap())
                .collect()
        };
        for (deep, shallow) in pm(10).iter().zip(pm(1)) {
            assert!(*deep <= shallow + 0.02, "{deep} vs {shallow}");
        }
    }

    #[test]
    fn rejects_empty_sweep() {
        let det = EnergyDetector::default();
        assert!(detection_curves(&det, &[], &[1], 1000, 0).is_err());
        assert!(detection_curves(&det, &[0.0], &[0], 1000, 0).is_err());
    }

    #[test]
    fn estimated_rates_at_default_threshold() {
        let det = EnergyDetector::default();
        let (pf, pm) = estimate_error_rates(&det, 2000, 5).unwrap();
        assert_eq!(pf, 0.0);
        assert_eq!(pm, 0.0);
    }
}
