use std::fmt;

use super::MacDecision;
use crate::error::{Error, Result};
use crate::model::{ChannelId, SuState, SuTransmitter};

/// Slot counts the state machine needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Timing {
    pub sensing_slots: u32,
    pub transition_slots: u32,
}

/// How an SU spent one slot. Exactly one per SU per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotActivity {
    Inactive,
    /// Monitoring with nothing to send.
    Idle,
    Sensing,
    Transition,
    Backoff,
    Defer,
    Transmitting(ChannelId),
}

impl fmt::Display for SlotActivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotActivity::Inactive => f.write_str("inactive"),
            SlotActivity::Idle => f.write_str("idle"),
            SlotActivity::Sensing => f.write_str("sensing"),
            SlotActivity::Transition => f.write_str("transition"),
            SlotActivity::Backoff => f.write_str("backoff"),
            SlotActivity::Defer => f.write_str("defer"),
            SlotActivity::Transmitting(c) => write!(f, "transmitting:{}", c.0),
        }
    }
}

/// Result of advancing one SU by one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    pub activity: SlotActivity,
    /// Decision taken when a sensing window closed in this slot.
    pub decision: Option<MacDecision>,
    /// Channel of a packet whose last slot was this one.
    pub completed: Option<ChannelId>,
}

fn violation(su: &SuTransmitter, what: &str) -> Error {
    Error::ModelViolation(format!("{} in state {}: {what}", su.id, su.state))
}

impl SuTransmitter {
    /// Enter the sharing system.
    pub fn join(&mut self) -> Result<()> {
        if self.state != SuState::Inactive {
            return Err(violation(self, "join requires inactive"));
        }
        self.state = SuState::Monitoring;
        Ok(())
    }

    /// Leave the sharing system; only allowed between packets.
    pub fn leave(&mut self) -> Result<()> {
        if self.state != SuState::Monitoring {
            return Err(violation(self, "leave requires monitoring"));
        }
        self.state = SuState::Inactive;
        self.packet_queue.clear();
        Ok(())
    }

    /// Starts serving the head-of-line packet if the SU is monitoring.
    /// Goes to re-rendezvous when a previous channel is on record.
    pub fn admit(&mut self, timing: &Timing) -> bool {
        if self.state != SuState::Monitoring {
            return false;
        }
        let Some(size) = self.packet_queue.pop_front() else {
            return false;
        };
        self.current_packet = Some(size);
        self.state = if self.previous_channel.is_some() {
            SuState::ReRendezvous
        } else {
            SuState::Initial
        };
        self.sensing_remaining = timing.sensing_slots;
        true
    }

    /// What this SU does in the current slot, before stepping.
    pub fn activity(&self) -> SlotActivity {
        match self.state {
            SuState::Inactive => SlotActivity::Inactive,
            SuState::Monitoring => SlotActivity::Idle,
            SuState::Transmitting => match self.current_channel {
                Some(c) => SlotActivity::Transmitting(c),
                None => SlotActivity::Idle,
            },
            SuState::Initial | SuState::ReRendezvous => {
                if self.transition_remaining > 0 {
                    SlotActivity::Transition
                } else if self.backoff_remaining > 0 {
                    SlotActivity::Backoff
                } else if self.defer_remaining > 0 {
                    SlotActivity::Defer
                } else {
                    SlotActivity::Sensing
                }
            }
        }
    }

    fn start_transmitting(&mut self, ch: ChannelId) -> Result<()> {
        let size = self
            .current_packet
            .ok_or_else(|| violation(self, "transmit without a packet"))?;
        self.state = SuState::Transmitting;
        self.current_channel = Some(ch);
        self.remaining_tx_slots = size;
        Ok(())
    }

    fn apply(&mut self, decision: MacDecision, timing: &Timing) -> Result<()> {
        match decision {
            MacDecision::Sense => self.sensing_remaining = timing.sensing_slots,
            MacDecision::Backoff(0) | MacDecision::Defer { slots: 0 } => {
                return Err(violation(self, "zero-length wait"));
            }
            MacDecision::Backoff(slots) => {
                self.backoff_remaining = slots;
                // no channel found: re-rendezvous falls back to initial access
                self.state = SuState::Initial;
            }
            MacDecision::Defer { slots } => self.defer_remaining = slots,
            MacDecision::Transmit(ch) => {
                if timing.transition_slots > 0 {
                    self.transition_remaining = timing.transition_slots;
                    self.current_channel = Some(ch);
                } else {
                    self.start_transmitting(ch)?;
                }
            }
        }
        Ok(())
    }
}

/// Advances `su` through one slot.
///
/// `decide` is consulted only when the SU's sensing window closes in this
/// slot; what it returns takes effect from the next slot. A packet whose
/// last slot is this one returns the SU to monitoring with the channel
/// recorded for re-rendezvous.
pub fn step_state_machine(
    su: &mut SuTransmitter,
    timing: &Timing,
    decide: impl FnOnce(&SuTransmitter) -> Result<MacDecision>,
) -> Result<StepReport> {
    let activity = su.activity();
    let mut report = StepReport {
        activity,
        decision: None,
        completed: None,
    };
    match activity {
        SlotActivity::Inactive | SlotActivity::Idle => {}
        SlotActivity::Transmitting(ch) => {
            su.remaining_tx_slots -= 1;
            if su.remaining_tx_slots == 0 {
                su.state = SuState::Monitoring;
                su.previous_channel = Some(ch);
                su.current_channel = None;
                su.current_packet = None;
                report.completed = Some(ch);
            }
        }
        SlotActivity::Transition => {
            su.transition_remaining -= 1;
            if su.transition_remaining == 0 {
                let ch = su
                    .current_channel
                    .ok_or_else(|| violation(su, "transition without a channel"))?;
                su.start_transmitting(ch)?;
            }
        }
        SlotActivity::Backoff => {
            su.backoff_remaining -= 1;
            if su.backoff_remaining == 0 {
                su.sensing_remaining = timing.sensing_slots;
            }
        }
        SlotActivity::Defer => {
            su.defer_remaining -= 1;
            if su.defer_remaining == 0 {
                su.sensing_remaining = timing.sensing_slots;
            }
        }
        SlotActivity::Sensing => {
            if su.sensing_remaining == 0 {
                return Err(violation(su, "sensing with an empty window"));
            }
            su.sensing_remaining -= 1;
            if su.sensing_remaining == 0 {
                let decision = decide(su)?;
                su.apply(decision, timing)?;
                report.decision = Some(decision);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SuId;

    const TIMING: Timing = Timing {
        sensing_slots: 1,
        transition_slots: 0,
    };

    fn never(_: &SuTransmitter) -> Result<MacDecision> {
        panic!("no decision expected")
    }

    #[test]
    fn arrival_with_history_goes_to_rerendezvous() {
        let mut su = SuTransmitter::new(SuId(1), 1.0);
        su.previous_channel = Some(ChannelId(3));
        su.enqueue(5);
        assert!(su.admit(&TIMING));
        assert_eq!(su.state, SuState::ReRendezvous);

        let mut fresh = SuTransmitter::new(SuId(2), 1.0);
        fresh.enqueue(5);
        assert!(fresh.admit(&TIMING));
        assert_eq!(fresh.state, SuState::Initial);

        let mut empty = SuTransmitter::new(SuId(3), 1.0);
        assert!(!empty.admit(&TIMING));
        assert_eq!(empty.state, SuState::Monitoring);
    }

    #[test]
    fn last_transmit_slot_returns_to_monitoring() {
        let mut su = SuTransmitter::new(SuId(1), 1.0);
        su.state = SuState::Transmitting;
        su.current_channel = Some(ChannelId(2));
        su.current_packet = Some(10);
        su.remaining_tx_slots = 1;
        let r = step_state_machine(&mut su, &TIMING, never).unwrap();
        assert_eq!(r.completed, Some(ChannelId(2)));
        assert_eq!(su.state, SuState::Monitoring);
        assert_eq!(su.previous_channel, Some(ChannelId(2)));
        assert_eq!(su.remaining_tx_slots, 0);
    }

    #[test]
    fn empty_sensing_result_backs_off_in_initial() {
        let mut su = SuTransmitter::new(SuId(1), 1.0);
        su.enqueue(4);
        su.admit(&TIMING);
        let r = step_state_machine(&mut su, &TIMING, |_| Ok(MacDecision::Backoff(3))).unwrap();
        assert_eq!(r.activity, SlotActivity::Sensing);
        assert_eq!(su.state, SuState::Initial);
        assert_eq!(su.backoff_remaining, 3);
        for _ in 0..3 {
            assert_eq!(
                step_state_machine(&mut su, &TIMING, never)
                    .unwrap()
                    .activity,
                SlotActivity::Backoff
            );
        }
        assert_eq!(su.activity(), SlotActivity::Sensing);
    }

    #[test]
    fn rerendezvous_backoff_falls_back_to_initial() {
        let mut su = SuTransmitter::new(SuId(1), 1.0);
        su.previous_channel = Some(ChannelId(1));
        su.enqueue(4);
        su.admit(&TIMING);
        step_state_machine(&mut su, &TIMING, |_| Ok(MacDecision::Backoff(2))).unwrap();
        assert_eq!(su.state, SuState::Initial);
    }

    #[test]
    fn full_packet_cycle_accounts_every_slot() {
        let timing = Timing {
            sensing_slots: 2,
            transition_slots: 1,
        };
        let mut su = SuTransmitter::new(SuId(1), 1.0);
        su.enqueue(3);
        su.admit(&timing);
        let mut trace = Vec::new();
        let mut decisions = vec![
            MacDecision::Transmit(ChannelId(4)),
            MacDecision::Defer { slots: 1 },
        ];
        loop {
            let r = step_state_machine(&mut su, &timing, |_| Ok(decisions.pop().unwrap())).unwrap();
            trace.push(r.activity);
            if r.completed.is_some() {
                break;
            }
        }
        use SlotActivity::*;
        let tx = Transmitting(ChannelId(4));
        assert_eq!(
            trace,
            vec![Sensing, Sensing, Defer, Sensing, Sensing, Transition, tx, tx, tx]
        );
        assert_eq!(su.state, SuState::Monitoring);
    }

    #[test]
    fn join_and_leave_are_guarded() {
        let mut su = SuTransmitter::inactive(SuId(1), 1.0);
        assert_eq!(su.activity(), SlotActivity::Inactive);
        assert!(su.leave().is_err());
        su.join().unwrap();
        assert!(su.join().is_err());
        su.leave().unwrap();
        assert_eq!(su.state, SuState::Inactive);

        let mut busy = SuTransmitter::new(SuId(2), 1.0);
        busy.enqueue(2);
        busy.admit(&TIMING);
        assert!(matches!(busy.leave(), Err(Error::ModelViolation(_))));
    }

    #[test]
    fn zero_length_backoff_is_rejected() {
        let mut su = SuTransmitter::new(SuId(1), 1.0);
        su.enqueue(1);
        su.admit(&TIMING);
        let err = step_state_machine(&mut su, &TIMING, |_| Ok(MacDecision::Backoff(0)));
        assert!(matches!(err, Err(Error::ModelViolation(_))));
    }
}
