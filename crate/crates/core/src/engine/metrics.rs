use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Slot accounting and delivered payload of one SU over the measured window.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuMetrics {
    /// `D_m`: rate-weighted slots of delivered packets.
    pub delivered: f64,
    /// `G_m = D_m / horizon`.
    pub goodput: f64,
    pub packets_arrived: u64,
    pub packets_delivered: u64,
    pub packets_lost: u64,
    pub inactive_slots: u64,
    pub idle_slots: u64,
    pub sensing_slots: u64,
    pub transition_slots: u64,
    pub backoff_slots: u64,
    pub defer_slots: u64,
    pub transmitting_slots: u64,
}

impl SuMetrics {
    /// Sum of all per-activity counters; equals the horizon.
    pub fn accounted_slots(&self) -> u64 {
        self.inactive_slots
            + self.idle_slots
            + self.sensing_slots
            + self.transition_slots
            + self.backoff_slots
            + self.defer_slots
            + self.transmitting_slots
    }
}

/// Outcome of a single replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationMetrics {
    pub index: u32,
    pub horizon: u64,
    pub efficiency: f64,
    pub per_su: Vec<SuMetrics>,
    /// Channel-slots carrying two or more transmitters, or an SU on a
    /// primary-user channel.
    pub collision_slots: u64,
    /// Available channel-slots with no transmitter and no primary user.
    pub idle_channel_slots: u64,
    pub false_alarms: u64,
    pub miss_detections: u64,
}

impl ReplicationMetrics {
    /// `G = sum_m G_m`.
    pub fn total_goodput(&self) -> f64 {
        self.per_su.iter().map(|s| s.goodput).sum()
    }
}

/// Replications of one configuration, merged in index order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub replications: Vec<ReplicationMetrics>,
    pub efficiency_mean: f64,
    /// Standard error of the mean across replications.
    pub efficiency_se: f64,
    /// Half-width of the Student-t 95% interval; NaN with one replication.
    pub efficiency_ci95: f64,
    pub e_upper: f64,
    /// Mean `G_m` per SU.
    pub goodput_per_su: Vec<f64>,
    pub total_goodput: f64,
    /// Means per replication.
    pub collision_slots: f64,
    pub idle_channel_slots: f64,
    pub false_alarms: f64,
    pub miss_detections: f64,
}

impl MetricsReport {
    pub fn from_replications(mut reps: Vec<ReplicationMetrics>, e_upper: f64) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::Config("no replications to merge".into()));
        }
        reps.sort_by_key(|r| r.index);
        let effs: Vec<f64> = reps.iter().map(|r| r.efficiency).collect();
        let (efficiency_mean, efficiency_se) = mean_and_se(&effs);
        let efficiency_ci95 = ci95_half_width(efficiency_se, effs.len());
        let n = reps.len() as f64;
        let users = reps[0].per_su.len();
        let goodput_per_su = (0..users)
            .map(|m| reps.iter().map(|r| r.per_su[m].goodput).sum::<f64>() / n)
            .collect();
        let mean_of = |f: fn(&ReplicationMetrics) -> f64| reps.iter().map(f).sum::<f64>() / n;
        Ok(Self {
            efficiency_mean,
            efficiency_se,
            efficiency_ci95,
            e_upper,
            goodput_per_su,
            total_goodput: mean_of(|r| r.total_goodput()),
            collision_slots: mean_of(|r| r.collision_slots as f64),
            idle_channel_slots: mean_of(|r| r.idle_channel_slots as f64),
            false_alarms: mean_of(|r| r.false_alarms as f64),
            miss_detections: mean_of(|r| r.miss_detections as f64),
            replications: reps,
        })
    }

    /// Student-t 95% interval of the efficiency.
    pub fn efficiency_interval(&self) -> (f64, f64) {
        (
            self.efficiency_mean - self.efficiency_ci95,
            self.efficiency_mean + self.efficiency_ci95,
        )
    }
}

/// Sample mean and standard error of the mean (0 for a single value).
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn ci95_half_width(se: f64, n: usize) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    t * se
}

/// `E = sum_m D_m / (horizon * sum_m R_m)`.
pub fn compute_efficiency(delivered: &[f64], rates: &[f64], horizon: u64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::Domain("horizon must be positive".into()));
    }
    if delivered.len() != rates.len() {
        return Err(Error::Shape(format!(
            "{} delivered totals for {} rates",
            delivered.len(),
            rates.len()
        )));
    }
    let rate_sum: f64 = rates.iter().sum();
    if rate_sum <= 0.0 {
        return Err(Error::Config("rates sum to zero".into()));
    }
    Ok(delivered.iter().sum::<f64>() / (horizon as f64 * rate_sum))
}

/// Collision-free, backoff-free efficiency:
/// `min(1, N/M) * E[T_d] / (T_s + E[T_d])`.
pub fn upper_bound(m: u32, n: u32, t_s: f64, mean_t_d: f64) -> f64 {
    let share = (n as f64 / m as f64).min(1.0);
    share * mean_t_d / (t_s + mean_t_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn upper_bound_examples() {
        assert_abs_diff_eq!(upper_bound(10, 20, 1.0, 50.0), 50.0 / 51.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            upper_bound(40, 20, 1.0, 50.0),
            0.5 * 50.0 / 51.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(upper_bound(40, 20, 0.0, 50.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(upper_bound(3, 20, 0.0, 50.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(
            compute_efficiency(&[1000.0, 1000.0], &[1.0, 1.0], 1000).unwrap(),
            1.0
        );
        assert_eq!(
            compute_efficiency(&[500.0, 0.0], &[1.0, 1.0], 1000).unwrap(),
            0.25
        );
        assert_eq!(
            compute_efficiency(&[600.0, 150.0], &[2.0, 1.0], 1000).unwrap(),
            0.25
        );
        assert!(matches!(
            compute_efficiency(&[1.0], &[0.0], 10),
            Err(Error::Config(_))
        ));
        assert!(compute_efficiency(&[1.0], &[1.0], 0).is_err());
    }

    #[test]
    fn interval_uses_student_t() {
        let (m, se) = mean_and_se(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert_abs_diff_eq!(se, (1.0f64 / 3.0).sqrt(), epsilon = 1e-15);
        // t_{0.975, 2} = 4.302653
        assert_abs_diff_eq!(ci95_half_width(1.0, 3), 4.302653, epsilon = 1e-6);
        assert!(ci95_half_width(1.0, 1).is_nan());
    }
}
