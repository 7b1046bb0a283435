//! Transmitter state machine and the three multichannel CSMA access
//! policies. The policies differ only in what they know about `M_k`:
//! CSMA-F gets the count, CSMA-P one bit (`M_k >= N_k`), CSMA nothing.
//! Each policy's signature only admits the information it is allowed.

mod policy;
mod state;

pub use policy::{
    decide_csma, decide_csma_f, decide_csma_p, su_information_oracle, AccessParams, MacAlgorithm,
    MacDecision, SuInfoMode, SuInformation,
};
pub use state::{step_state_machine, SlotActivity, StepReport, Timing};
