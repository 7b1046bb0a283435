use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Channel-selection probabilities of one SU over the `N_k` available
/// channels. Whatever is left of the unit mass is the probability of
/// staying silent.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessDistribution {
    probabilities: Vec<f64>,
}

impl AccessDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = probabilities
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::Shape(format!(
                "access probability {p} for channel {} not in [0, 1]",
                i + 1
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if total > 1.0 + SUM_TOLERANCE {
            return Err(Error::Shape(format!(
                "access probabilities sum to {total} > 1"
            )));
        }
        Ok(Self { probabilities })
    }

    /// Equal probability `p` on each of `n` channels.
    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n])
    }

    /// Transmit on channel `index` (0-based) with certainty.
    pub fn certain(n: usize, index: usize) -> Result<Self> {
        if index >= n {
            return Err(Error::Shape(format!("channel {index} outside 0..{n}")));
        }
        let mut p = vec![0.0; n];
        p[index] = 1.0;
        Self::new(p)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Probability of not transmitting at all.
    pub fn silence(&self) -> f64 {
        (1.0 - self.probabilities.iter().sum::<f64>()).max(0.0)
    }
}

/// Access distributions of all `M_k` contending SUs, one column each.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessMatrix {
    channels: usize,
    columns: Vec<AccessDistribution>,
}

impl AccessMatrix {
    pub fn new(channels: usize, columns: Vec<AccessDistribution>) -> Result<Self> {
        if let Some((m, col)) = columns
            .iter()
            .enumerate()
            .find(|(_, c)| c.len() != channels)
        {
            return Err(Error::Shape(format!(
                "column {} has {} entries, expected {channels}",
                m + 1,
                col.len()
            )));
        }
        Ok(Self { channels, columns })
    }

    pub fn from_rows(channels: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let cols = columns
            .into_iter()
            .map(AccessDistribution::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels, cols)
    }

    /// Every one of `m` SUs uses the same distribution `p` over `n` channels.
    pub fn symmetric(m: usize, p: &AccessDistribution) -> Self {
        Self {
            channels: p.len(),
            columns: vec![p.clone(); m],
        }
    }

    /// `l` re-rendezvous SUs pinned to channels `1..=l`, the other `m - l`
    /// picking uniformly among all `n` channels.
    pub fn rerendezvous(m: usize, n: usize, l: usize) -> Result<Self> {
        if l > m || l > n {
            return Err(Error::Domain(format!(
                "need l <= min(M, N), got l={l}, M={m}, N={n}"
            )));
        }
        let mut columns = (0..l)
            .map(|i| AccessDistribution::certain(n, i))
            .collect::<Result<Vec<_>>>()?;
        let uniform = AccessDistribution::uniform(n, 1.0 / n as f64)?;
        columns.extend(std::iter::repeat_n(uniform, m - l));
        Self::new(n, columns)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn users(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[AccessDistribution] {
        &self.columns
    }
}
