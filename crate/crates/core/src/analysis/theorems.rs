use super::{
    exact_expected_successes, max_expected_successes, optimal_symmetric_probability,
    AccessDistribution, AccessMatrix, OracleMethod,
};
use crate::error::{Error, Result};

const VALUE_TOLERANCE: f64 = 1e-9;
const GAP_TOLERANCE: f64 = 1e-12;

/// Outcome of the grid search for the best common access probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Report {
    pub m: u32,
    pub n: u32,
    pub argmax_p: f64,
    pub max_value: f64,
    pub predicted_p: f64,
    pub predicted_value: f64,
    pub formula_match: bool,
}

fn symmetric_value(m: u32, n: u32, p: f64) -> f64 {
    n as f64 * m as f64 * p * (1.0 - p).powi(m as i32 - 1)
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        }
    }
    // the optimum may sit on a bracket end (the simplex boundary when M <= N)
    [(a, fa), (b, fb), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold(
            (lo, f64::NEG_INFINITY),
            |best, c| if c.1 > best.1 { c } else { best },
        )
}

/// Searches the common per-channel probability `p` over `[0, min(1, 1/N)]`
/// on a grid of spacing `grid_step`, refines around the best cell, and
/// compares the result against the closed-form optimiser and maximum.
pub fn verify_theorem1(m: u32, n: u32, grid_step: f64) -> Result<Theorem1Report> {
    if m < 1 || n < 1 {
        return Err(Error::Domain(format!(
            "need M >= 1 and N >= 1, got M={m}, N={n}"
        )));
    }
    if !(grid_step > 0.0 && grid_step < 1.0) {
        return Err(Error::Domain(format!(
            "grid step {grid_step} not in (0, 1)"
        )));
    }
    let upper = (1.0 / n as f64).min(1.0);
    let f = |p: f64| symmetric_value(m, n, p);

    let cells = (upper / grid_step).floor() as usize;
    let (best_p, _) = (0..=cells)
        .map(|i| (i as f64 * grid_step).min(upper))
        .chain(std::iter::once(upper))
        .map(|p| (p, f(p)))
        .fold((0.0, f64::NEG_INFINITY), |best, c| {
            if c.1 > best.1 {
                c
            } else {
                best
            }
        });

    let lo = (best_p - grid_step).max(0.0);
    let hi = (best_p + grid_step).min(upper);
    let (argmax_p, max_value) = golden_max(f, lo, hi);

    let predicted_p = optimal_symmetric_probability(m, n)?;
    let predicted_value = max_expected_successes(m, n)?;
    let formula_match = (argmax_p - predicted_p).abs() <= grid_step
        && (max_value - predicted_value).abs() <= VALUE_TOLERANCE;
    Ok(Theorem1Report {
        m,
        n,
        argmax_p,
        max_value,
        predicted_p,
        predicted_value,
        formula_match,
    })
}

/// Gap between re-rendezvous and purely random access, per `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem2Report {
    pub m: u32,
    pub n: u32,
    /// `Y'(l) - Y` for `l = 0..=M`, both sides from an exact oracle.
    pub gaps: Vec<f64>,
    pub all_nonnegative: bool,
    /// Values of `l` where the gap is below `1e-12`.
    pub equality_set: Vec<u32>,
    pub method: OracleMethod,
}

impl Theorem2Report {
    /// Non-negative everywhere, zero exactly at `l = 0, 1`, positive beyond.
    pub fn holds(&self) -> bool {
        self.all_nonnegative
            && self.equality_set == [0, 1]
            && self.gaps.iter().skip(2).all(|&g| g > GAP_TOLERANCE)
    }
}

/// Compares, by exact enumeration, the throughput of `l` re-rendezvous SUs
/// pinned to distinct channels plus `M - l` uniform SUs against every SU
/// using the optimal symmetric distribution.
pub fn verify_theorem2(m: u32, n: u32) -> Result<Theorem2Report> {
    if m < 2 || m > n {
        return Err(Error::Domain(format!(
            "theorem scope is 2 <= M <= N, got M={m}, N={n}"
        )));
    }
    let (mu, nu) = (m as usize, n as usize);
    let p = optimal_symmetric_probability(m, n)?;
    let baseline = AccessMatrix::symmetric(mu, &AccessDistribution::uniform(nu, p)?);
    let (y, mut method) = exact_expected_successes(&baseline)?;

    let mut gaps = Vec::with_capacity(mu + 1);
    for l in 0..=mu {
        let profile = AccessMatrix::rerendezvous(mu, nu, l)?;
        let (y_prime, used) = exact_expected_successes(&profile)?;
        if used == OracleMethod::OccupancyStates {
            method = used;
        }
        gaps.push(y_prime - y);
    }
    let all_nonnegative = gaps.iter().all(|&g| g > -GAP_TOLERANCE);
    let equality_set = gaps
        .iter()
        .enumerate()
        .filter(|(_, g)| g.abs() < GAP_TOLERANCE)
        .map(|(l, _)| l as u32)
        .collect();
    Ok(Theorem2Report {
        m,
        n,
        gaps,
        all_nonnegative,
        equality_set,
        method,
    })
}
