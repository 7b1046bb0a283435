//! Slotted multichannel spectrum-sharing toolkit.
//!
//! Secondary users (SUs) share `N` collision channels. Each SU runs a
//! transmitter state machine and one of three multichannel CSMA policies,
//! which differ only in how much they know about the number of contending
//! SUs (`M_k`): the exact count, one bit (`M_k >= N_k`), or nothing.
//!
//! * [`model`] holds domain types, traffic/backoff sampling and slot resolution.
//! * [`analysis`] evaluates the slot-level throughput expressions and checks
//!   them against exhaustive enumeration.
//! * [`mac`] implements the transmitter state machine and the access policies.
//! * [`sensing`] models spectrum observation (perfect, Bernoulli, energy detector).
//! * [`engine`] runs the slotted simulation, replications and sweeps.
//! * [`cli`] is the command-line front end used by the `mcsma` binary.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod mac;
pub mod model;
pub mod sensing;

pub use error::{Error, Result};
