use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::metrics::{
    compute_efficiency, upper_bound, MetricsReport, ReplicationMetrics, SuMetrics,
};
use crate::error::{Error, Result};
use crate::mac::{
    decide_csma, decide_csma_f, decide_csma_p, step_state_machine, su_information_oracle,
    AccessParams, MacAlgorithm, MacDecision, SlotActivity, SuInformation,
};
use crate::model::{
    sample_packet_size, ArrivalProcess, ChannelMask, ChannelSet, Occupancy, SuId, SuState,
    SuTransmitter,
};
use crate::sensing::sense;

/// Independent random streams of one SU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Arrivals = 1,
    PacketSizes = 2,
    Mac = 3,
    Sensing = 4,
}

/// Stream for `(seed, replication, su, purpose)`. Traffic streams do not
/// depend on the access policy, so runs that differ only in the policy see
/// the same arrivals and packet sizes.
pub fn stream_rng(seed: u64, replication: u32, su: u32, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((replication as u64) << 40) | ((su as u64) << 8) | purpose as u64);
    rng
}

/// Extra outputs of a replication, off by default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_arrivals: bool,
    pub event_log: bool,
}

/// One packet arrival: slot, SU, packet size in slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrivalRecord {
    pub slot: u64,
    pub su: SuId,
    pub size: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRun {
    pub metrics: ReplicationMetrics,
    /// Every arrival, including those of inactive SUs and warm-up.
    pub arrivals: Vec<ArrivalRecord>,
    /// One line per state change: `<slot> <su> <old>-><new>`.
    pub events: String,
}

struct SuRuntime {
    tx: SuTransmitter,
    arrivals: ArrivalProcess,
    arrival_rng: ChaCha8Rng,
    size_rng: ChaCha8Rng,
    mac_rng: ChaCha8Rng,
    sense_rng: ChaCha8Rng,
    /// Channels seen busy during the current sensing window.
    window: ChannelMask,
    collided: bool,
    measured_tx_slots: u64,
    leave_pending: bool,
    stats: SuMetrics,
}

fn log_changes(log: &mut String, slot: u64, sus: &[SuRuntime], states: &mut [SuState]) {
    for (su, last) in sus.iter().zip(states.iter_mut()) {
        if su.tx.state != *last {
            let _ = writeln!(log, "{slot} {} {last}->{}", su.tx.id, su.tx.state);
            *last = su.tx.state;
        }
    }
}

/// Runs replication `index` of `cfg`.
pub fn run_replication(
    cfg: &ScenarioConfig,
    index: u32,
    opts: RunOptions,
) -> Result<ReplicationRun> {
    cfg.validate()?;
    let band = cfg.channel_set()?;
    let total = cfg.total_channels;
    let timing = cfg.timing();
    let params = AccessParams {
        backoff_mean: cfg.traffic.backoff_mean,
        defer_policy: cfg.traffic.defer_policy,
    };
    let rates = cfg.rate_weights();
    let warmup = cfg.warmup_slots();
    let end = warmup + cfg.horizon;

    let mut sus = Vec::with_capacity(cfg.num_sus as usize);
    for m in 0..cfg.num_sus {
        let id = m + 1;
        let mut arrival_rng = stream_rng(cfg.seed, index, id, StreamPurpose::Arrivals);
        let arrivals = ArrivalProcess::new(cfg.traffic.mean_arrival_interval, &mut arrival_rng)?;
        let scheduled = cfg.su_schedule.iter().any(|p| p.su == id);
        let tx = if scheduled {
            SuTransmitter::inactive(SuId(id), rates[m as usize])
        } else {
            SuTransmitter::new(SuId(id), rates[m as usize])
        };
        sus.push(SuRuntime {
            tx,
            arrivals,
            arrival_rng,
            size_rng: stream_rng(cfg.seed, index, id, StreamPurpose::PacketSizes),
            mac_rng: stream_rng(cfg.seed, index, id, StreamPurpose::Mac),
            sense_rng: stream_rng(cfg.seed, index, id, StreamPurpose::Sensing),
            window: ChannelMask::new(total),
            collided: false,
            measured_tx_slots: 0,
            leave_pending: false,
            stats: SuMetrics::default(),
        });
    }

    let mut out = ReplicationRun {
        metrics: ReplicationMetrics {
            index,
            horizon: cfg.horizon,
            efficiency: 0.0,
            per_su: Vec::new(),
            collision_slots: 0,
            idle_channel_slots: 0,
            false_alarms: 0,
            miss_detections: 0,
        },
        arrivals: Vec::new(),
        events: String::new(),
    };
    let mut occupancy = Occupancy::new(total);
    let mut busy = ChannelMask::new(total);
    let mut pu_busy = ChannelMask::new(total);
    let has_pu = !cfg.pu_schedule.is_empty();
    let mut open_band: ChannelSet = band.clone();

    let mut states: Vec<SuState> = sus.iter().map(|s| s.tx.state).collect();
    for slot in 0..end {
        let measured = slot >= warmup;

        for p in &cfg.su_schedule {
            let su = &mut sus[(p.su - 1) as usize];
            if p.join == slot && su.tx.state == SuState::Inactive {
                su.tx.join()?;
            }
            if p.leave == Some(slot) {
                su.leave_pending = true;
            }
        }

        for su in sus.iter_mut() {
            let n = su.arrivals.take_slot(slot, &mut su.arrival_rng);
            for _ in 0..n {
                let size = sample_packet_size(
                    &mut su.size_rng,
                    cfg.traffic.packet_size_min,
                    cfg.traffic.packet_size_max,
                )?;
                if opts.record_arrivals {
                    out.arrivals.push(ArrivalRecord {
                        slot,
                        su: su.tx.id,
                        size,
                    });
                }
                if su.tx.state != SuState::Inactive {
                    su.tx.enqueue(size);
                    if measured {
                        su.stats.packets_arrived += 1;
                    }
                }
            }
            if su.leave_pending && su.tx.state == SuState::Monitoring {
                su.tx.leave()?;
                su.leave_pending = false;
            }
            su.tx.admit(&timing);
        }
        if opts.event_log {
            log_changes(&mut out.events, slot, &sus, &mut states);
        }

        if has_pu {
            pu_busy = cfg.pu_busy_at(slot);
            open_band = band.without(&pu_busy);
        }
        occupancy.clear();
        for su in &sus {
            if let SlotActivity::Transmitting(ch) = su.tx.activity() {
                occupancy.add(su.tx.id, ch);
            }
        }
        busy.clear();
        busy.union_with(&pu_busy);
        for ch in occupancy.busy_channels() {
            busy.insert(ch);
        }
        for su in sus.iter_mut() {
            if let SlotActivity::Transmitting(ch) = su.tx.activity() {
                if occupancy.transmitters(ch) > 1 || pu_busy.contains(ch) {
                    su.collided = true;
                }
            }
        }
        if measured {
            for &ch in band.available() {
                let n = occupancy.transmitters(ch);
                if n > 1 || (n == 1 && pu_busy.contains(ch)) {
                    out.metrics.collision_slots += 1;
                } else if n == 0 && !pu_busy.contains(ch) {
                    out.metrics.idle_channel_slots += 1;
                }
            }
        }

        let m_k = sus.iter().filter(|s| s.tx.state.is_accessing()).count() as u32;

        for su in sus.iter_mut() {
            let activity = su.tx.activity();
            if activity == SlotActivity::Sensing {
                if su.tx.sensing_remaining == timing.sensing_slots {
                    su.window.clear();
                }
                su.window.union_with(&busy);
            }
            let SuRuntime {
                tx,
                window,
                mac_rng,
                sense_rng,
                ..
            } = su;
            let mut errors = (0u32, 0u32);
            let report = step_state_machine(tx, &timing, |t| {
                let seen = sense(&cfg.sensing, window, &open_band, sense_rng);
                errors = (seen.false_alarms, seen.misses);
                let n_k = seen.available.len() as u32;
                match cfg.mac_algorithm {
                    MacAlgorithm::CsmaF => {
                        let SuInformation::Full(m) = su_information_oracle(cfg.su_info, m_k, n_k)
                        else {
                            return Err(Error::Oracle("CSMA-F needs the SU count".into()));
                        };
                        decide_csma_f(t, &seen.available, m, &params, mac_rng)
                    }
                    MacAlgorithm::CsmaP => {
                        let SuInformation::Partial(bit) =
                            su_information_oracle(cfg.su_info, m_k, n_k)
                        else {
                            return Err(Error::Oracle("CSMA-P needs the contention bit".into()));
                        };
                        decide_csma_p(t, &seen.available, bit, &params, mac_rng)
                    }
                    MacAlgorithm::Csma => decide_csma(t, &seen.available, &params, mac_rng),
                }
            })?;

            if let Some(MacDecision::Transmit(_)) = report.decision {
                su.collided = false;
                su.measured_tx_slots = 0;
            }
            if measured {
                out.metrics.false_alarms += errors.0 as u64;
                out.metrics.miss_detections += errors.1 as u64;
                let s = &mut su.stats;
                match report.activity {
                    SlotActivity::Inactive => s.inactive_slots += 1,
                    SlotActivity::Idle => s.idle_slots += 1,
                    SlotActivity::Sensing => s.sensing_slots += 1,
                    SlotActivity::Transition => s.transition_slots += 1,
                    SlotActivity::Backoff => s.backoff_slots += 1,
                    SlotActivity::Defer => s.defer_slots += 1,
                    SlotActivity::Transmitting(_) => {
                        s.transmitting_slots += 1;
                        su.measured_tx_slots += 1;
                    }
                }
            }
            if report.completed.is_some() {
                if su.collided {
                    if !cfg.rerendezvous_after_loss {
                        su.tx.previous_channel = None;
                    }
                    if measured {
                        su.stats.packets_lost += 1;
                    }
                } else {
                    su.stats.delivered += su.tx.rate_weight * su.measured_tx_slots as f64;
                    if su.measured_tx_slots > 0 {
                        su.stats.packets_delivered += 1;
                    }
                }
            }
        }
        if opts.event_log {
            log_changes(&mut out.events, slot, &sus, &mut states);
        }
    }

    let delivered: Vec<f64> = sus.iter().map(|s| s.stats.delivered).collect();
    out.metrics.efficiency = compute_efficiency(&delivered, &rates, cfg.horizon)?;
    out.metrics.per_su = sus
        .into_iter()
        .map(|s| {
            let mut stats = s.stats;
            stats.goodput = stats.delivered / cfg.horizon as f64;
            stats
        })
        .collect();
    Ok(out)
}

/// Bound matching `cfg`: sensing plus transition slots count as overhead.
pub fn scenario_upper_bound(cfg: &ScenarioConfig) -> Result<f64> {
    let n = cfg.channel_set()?.len() as u32;
    let overhead = (cfg.traffic.sensing_slots + cfg.traffic.transition_slots) as f64;
    Ok(upper_bound(
        cfg.num_sus,
        n,
        overhead,
        cfg.traffic.mean_packet_size(),
    ))
}

/// Runs all replications of `cfg` (in parallel) and merges them.
pub fn run(cfg: &ScenarioConfig) -> Result<MetricsReport> {
    cfg.validate()?;
    let reps = (0..cfg.replications)
        .into_par_iter()
        .map(|i| run_replication(cfg, i, RunOptions::default()).map(|r| r.metrics))
        .collect::<Result<Vec<_>>>()?;
    MetricsReport::from_replications(reps, scenario_upper_bound(cfg)?)
}
