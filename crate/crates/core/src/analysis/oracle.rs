//! Exact expectations by exhaustive enumeration. Neither routine uses the
//! product form of the throughput expression, so both serve as independent
//! checks on it.

use super::AccessMatrix;
use crate::error::{Error, Result};

/// Budget on `(N_k + 1)^M_k` joint actions for [`enumerate_expected_successes`].
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Budget on `3^N_k` occupancy states for [`occupancy_expected_successes`].
pub const OCCUPANCY_STATE_LIMIT: f64 = 1e7;

/// Which oracle [`exact_expected_successes`] used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    JointActions,
    OccupancyStates,
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

struct Walk<'a> {
    // action probabilities per SU: index 0 is "silent", n + 1 is channel n
    actions: &'a [Vec<f64>],
    counts: Vec<u32>,
    singles: u32,
    acc: CompensatedSum,
}

impl Walk<'_> {
    fn visit(&mut self, su: usize, weight: f64) {
        if su == self.actions.len() {
            self.acc.add(weight * self.singles as f64);
            return;
        }
        for (a, &p) in self.actions[su].iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if a == 0 {
                self.visit(su + 1, weight * p);
                continue;
            }
            let ch = a - 1;
            let before = self.singles;
            match self.counts[ch] {
                0 => self.singles += 1,
                1 => self.singles -= 1,
                _ => {}
            }
            self.counts[ch] += 1;
            self.visit(su + 1, weight * p);
            self.counts[ch] -= 1;
            self.singles = before;
        }
    }
}

fn action_table(p: &AccessMatrix) -> Vec<Vec<f64>> {
    p.columns()
        .iter()
        .map(|col| {
            std::iter::once(col.silence())
                .chain(col.probabilities().iter().copied())
                .collect()
        })
        .collect()
}

/// Walks every joint action (each SU silent or on one channel), weights it
/// by its probability and counts the channels holding exactly one SU.
pub fn enumerate_expected_successes(p: &AccessMatrix) -> Result<f64> {
    let outcomes = (p.channels() as f64 + 1.0).powi(p.users() as i32);
    if outcomes > ENUMERATION_LIMIT {
        return Err(Error::Tractability {
            outcomes,
            limit: ENUMERATION_LIMIT,
        });
    }
    let actions = action_table(p);
    let mut walk = Walk {
        actions: &actions,
        counts: vec![0; p.channels()],
        singles: 0,
        acc: CompensatedSum::default(),
    };
    walk.visit(0, 1.0);
    Ok(walk.acc.total())
}

/// Propagates the distribution of per-channel occupancy (empty, one, many)
/// through the SUs one at a time, then reads off the expected number of
/// single-occupancy channels. Cost grows with `3^N_k` rather than with
/// `(N_k + 1)^M_k`.
pub fn occupancy_expected_successes(p: &AccessMatrix) -> Result<f64> {
    let n = p.channels();
    let states = 3f64.powi(n as i32);
    if states > OCCUPANCY_STATE_LIMIT {
        return Err(Error::Tractability {
            outcomes: states,
            limit: OCCUPANCY_STATE_LIMIT,
        });
    }
    let states = states as usize;
    let place: Vec<usize> = (0..n).map(|i| 3usize.pow(i as u32)).collect();
    let digit = |s: usize, ch: usize| (s / place[ch]) % 3;

    let mut dist = vec![0.0; states];
    dist[0] = 1.0;
    let mut next = vec![0.0; states];
    for col in action_table(p) {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            if col[0] != 0.0 {
                next[s] += mass * col[0];
            }
            for ch in 0..n {
                let pa = col[ch + 1];
                if pa == 0.0 {
                    continue;
                }
                let target = if digit(s, ch) < 2 { s + place[ch] } else { s };
                next[target] += mass * pa;
            }
        }
        std::mem::swap(&mut dist, &mut next);
    }
    let mut acc = CompensatedSum::default();
    for (s, &mass) in dist.iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        let singles = (0..n).filter(|&ch| digit(s, ch) == 1).count();
        acc.add(mass * singles as f64);
    }
    Ok(acc.total())
}

/// Joint-action enumeration when it fits the budget, otherwise the
/// occupancy-state propagation.
pub fn exact_expected_successes(p: &AccessMatrix) -> Result<(f64, OracleMethod)> {
    match enumerate_expected_successes(p) {
        Ok(y) => Ok((y, OracleMethod::JointActions)),
        Err(Error::Tractability { .. }) => {
            occupancy_expected_successes(p).map(|y| (y, OracleMethod::OccupancyStates))
        }
        Err(e) => Err(e),
    }
}
