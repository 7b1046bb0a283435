//! Slot-level throughput of `M_k` contending SUs on `N_k` collision
//! channels: closed forms, their optimisers, and exact enumeration oracles
//! used to check them.

mod access;
mod appendix;
mod oracle;
mod theorems;
mod throughput;

pub use access::{AccessDistribution, AccessMatrix};
pub use appendix::{
    appendix_f, appendix_f_double_prime, appendix_f_prime, check_appendix, AppendixReport,
};
pub use oracle::{
    enumerate_expected_successes, exact_expected_successes, occupancy_expected_successes,
    OracleMethod, ENUMERATION_LIMIT, OCCUPANCY_STATE_LIMIT,
};
pub use theorems::{verify_theorem1, verify_theorem2, Theorem1Report, Theorem2Report};
pub use throughput::{
    expected_successes, max_expected_successes, optimal_symmetric_probability,
    rerendezvous_expected_successes, rerendezvous_expected_successes_as_printed,
    symmetric_expected_successes,
};
