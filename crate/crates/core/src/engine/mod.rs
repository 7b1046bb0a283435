//! Slotted simulation of SUs sharing a band: configuration, the per-slot
//! loop, replication statistics and parameter sweeps.

mod config;
mod metrics;
mod sim;
mod sweep;

pub use config::{PuInterval, ScenarioConfig, SuPresence};
pub use metrics::{
    compute_efficiency, mean_and_se, upper_bound, MetricsReport, ReplicationMetrics, SuMetrics,
};
pub use sim::{
    run, run_replication, scenario_upper_bound, stream_rng, ArrivalRecord, ReplicationRun,
    RunOptions, StreamPurpose,
};
pub use sweep::{
    apply_parameter, config_hash, sweep, sweep_points, SweepRow, SweepSpec, SWEEP_PARAMETERS,
};
