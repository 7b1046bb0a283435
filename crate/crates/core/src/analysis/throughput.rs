use super::{AccessDistribution, AccessMatrix};
use crate::error::{Error, Result};

/// Expected number of collision-free transmissions in one slot:
/// `sum_n sum_m p[m][n] * prod_{j != m} (1 - p[j][n])`.
pub fn expected_successes(p: &AccessMatrix) -> f64 {
    let cols = p.columns();
    (0..p.channels())
        .map(|n| {
            cols.iter()
                .enumerate()
                .map(|(m, col)| {
                    let others: f64 = cols
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != m)
                        .map(|(_, c)| 1.0 - c.probabilities()[n])
                        .product();
                    col.probabilities()[n] * others
                })
                .sum::<f64>()
        })
        .sum()
}

/// Same quantity when all `m` SUs share the distribution `p`:
/// `sum_n m p_n (1 - p_n)^(m-1)`.
pub fn symmetric_expected_successes(p: &[f64], m: u32) -> Result<f64> {
    let dist = AccessDistribution::new(p.to_vec())?;
    if m == 0 {
        return Ok(0.0);
    }
    Ok(dist
        .probabilities()
        .iter()
        .map(|&pn| m as f64 * pn * (1.0 - pn).powi(m as i32 - 1))
        .sum())
}

fn check_counts(m: u32, n: u32) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Domain(format!(
            "need at least one SU and one channel, got M={m}, N={n}"
        )));
    }
    Ok(())
}

/// Per-channel access probability that maximises the symmetric throughput:
/// `min(1/N, 1/M)`.
pub fn optimal_symmetric_probability(m: u32, n: u32) -> Result<f64> {
    check_counts(m, n)?;
    Ok((1.0 / n as f64).min(1.0 / m as f64))
}

/// Maximum of the symmetric throughput, attained at
/// [`optimal_symmetric_probability`].
pub fn max_expected_successes(m: u32, n: u32) -> Result<f64> {
    check_counts(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    Ok(if m > n {
        nf * (1.0 - 1.0 / mf).powi(m as i32 - 1)
    } else {
        mf * (1.0 - 1.0 / nf).powi(m as i32 - 1)
    })
}

fn check_rerendezvous(m: u32, n: u32, l: u32) -> Result<()> {
    check_counts(m, n)?;
    if m > n {
        return Err(Error::Domain(format!(
            "re-rendezvous throughput needs M <= N, got M={m}, N={n}"
        )));
    }
    if l > m {
        return Err(Error::Domain(format!(
            "re-rendezvous count l={l} exceeds M={m}"
        )));
    }
    Ok(())
}

/// Expected successes when `l` re-rendezvous SUs sit on distinct previous
/// channels and the other `M - l` SUs pick uniformly among all `N`:
///
/// `l q^(M-l) + (N-l) (M-l)/N q^(M-l-1)`, with `q = 1 - 1/N`.
///
/// A pinned channel succeeds iff none of the `M - l` random SUs lands on
/// it; a free channel succeeds iff exactly one of them does.
pub fn rerendezvous_expected_successes(m: u32, n: u32, l: u32) -> Result<f64> {
    check_rerendezvous(m, n, l)?;
    let (nf, lf) = (n as f64, l as f64);
    let q = 1.0 - 1.0 / nf;
    let random = (m - l) as i32;
    let pinned = lf * q.powi(random);
    let free = if random == 0 {
        0.0
    } else {
        (nf - lf) * (random as f64 / nf) * q.powi(random - 1)
    };
    Ok(pinned + free)
}

/// The commonly quoted variant of the re-rendezvous throughput, with
/// exponents `N - l` and `N - l - 1` in place of `M - l` and `M - l - 1`.
/// It agrees with [`rerendezvous_expected_successes`] only when `M = N`.
/// Kept for comparison; enumeration shows the other form is exact.
pub fn rerendezvous_expected_successes_as_printed(m: u32, n: u32, l: u32) -> Result<f64> {
    check_rerendezvous(m, n, l)?;
    let (mf, nf, lf) = (m as f64, n as f64, l as f64);
    let q = 1.0 - 1.0 / nf;
    let first = lf * q.powi((n - l) as i32);
    let second = if n == l {
        0.0
    } else {
        (nf - lf) * (mf - lf) / nf * q.powi((n - l) as i32 - 1)
    };
    Ok(first + second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn two_users_one_channel_half() {
        let p = AccessMatrix::from_rows(1, vec![vec![0.5], vec![0.5]]).unwrap();
        assert_abs_diff_eq!(expected_successes(&p), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn lone_user_and_silent_users() {
        let p = AccessMatrix::from_rows(3, vec![vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(expected_successes(&p), 1.0);
        let p = AccessMatrix::from_rows(2, vec![vec![0.0, 0.0]; 3]).unwrap();
        assert_eq!(expected_successes(&p), 0.0);
    }

    #[test]
    fn symmetric_examples() {
        assert_abs_diff_eq!(
            symmetric_expected_successes(&[0.25, 0.25], 4).unwrap(),
            0.84375,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            symmetric_expected_successes(&[0.5, 0.5], 2).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(
            symmetric_expected_successes(&[1.0, 0.0, 0.0], 2).unwrap(),
            0.0
        );
        assert!(symmetric_expected_successes(&[0.7, 0.7], 2).is_err());
    }

    #[test]
    fn optimum_examples() {
        assert_eq!(optimal_symmetric_probability(4, 2).unwrap(), 0.25);
        assert_eq!(optimal_symmetric_probability(2, 20).unwrap(), 0.05);
        assert_eq!(optimal_symmetric_probability(1, 1).unwrap(), 1.0);
        assert!(optimal_symmetric_probability(0, 3).is_err());
        assert_abs_diff_eq!(
            max_expected_successes(4, 2).unwrap(),
            0.84375,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            max_expected_successes(3, 3).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(max_expected_successes(1, 7).unwrap(), 1.0);
        assert!(max_expected_successes(2, 0).is_err());
    }

    #[test]
    fn rerendezvous_examples() {
        assert_abs_diff_eq!(
            rerendezvous_expected_successes(3, 3, 2).unwrap(),
            5.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            rerendezvous_expected_successes(2, 3, 1).unwrap(),
            4.0 / 3.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            rerendezvous_expected_successes(3, 3, 3).unwrap(),
            3.0,
            epsilon = 1e-15
        );
        assert!(rerendezvous_expected_successes(4, 3, 1).is_err());
        assert!(rerendezvous_expected_successes(3, 4, 4).is_err());
    }

    #[test]
    fn rerendezvous_at_zero_is_the_symmetric_maximum() {
        for n in 1..=8 {
            for m in 1..=n {
                assert_abs_diff_eq!(
                    rerendezvous_expected_successes(m, n, 0).unwrap(),
                    max_expected_successes(m, n).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn printed_variant_agrees_only_on_square_instances() {
        for l in 0..=4 {
            assert_abs_diff_eq!(
                rerendezvous_expected_successes_as_printed(4, 4, l).unwrap(),
                rerendezvous_expected_successes(4, 4, l).unwrap(),
                epsilon = 1e-12
            );
        }
        let printed = rerendezvous_expected_successes_as_printed(2, 8, 0).unwrap();
        let exact = rerendezvous_expected_successes(2, 8, 0).unwrap();
        assert!((printed - exact).abs() > 1e-3);
    }
}
