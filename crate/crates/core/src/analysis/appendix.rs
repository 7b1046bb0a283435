//! The auxiliary function whose positivity for `l > 1` gives the
//! re-rendezvous gap: `Y'(l) - Y = q^(M-l-1) f(l)` with `q = 1 - 1/N`.

use crate::error::{Error, Result};

fn check(m: u32, n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "need N >= 2 (ln(1 - 1/N)), got N={n}"
        )));
    }
    if m < 1 {
        return Err(Error::Domain("need M >= 1".into()));
    }
    Ok(1.0 - 1.0 / n as f64)
}

/// `f(l) = (MN + l^2 - Ml - l)/N - M q^l`.
pub fn appendix_f(m: u32, n: u32, l: f64) -> Result<f64> {
    let q = check(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    Ok((mf * nf + l * l - mf * l - l) / nf - mf * q.powf(l))
}

/// `f'(l) = (2l - M - 1)/N - M q^l ln q`.
pub fn appendix_f_prime(m: u32, n: u32, l: f64) -> Result<f64> {
    let q = check(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    Ok((2.0 * l - mf - 1.0) / nf - mf * q.powf(l) * q.ln())
}

/// `f''(l) = 2/N - M q^l (ln q)^2`.
pub fn appendix_f_double_prime(m: u32, n: u32, l: f64) -> Result<f64> {
    let q = check(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    let ln_q = q.ln();
    Ok(2.0 / nf - mf * q.powf(l) * ln_q * ln_q)
}

/// `(f(l+h) - 2 f(l) + f(l-h)) / h^2`, grouped so that the cancelling
/// terms never meet in floating point: the quadratic part contributes
/// `2h^2/N` and the exponential part `M q^l (q^h + q^-h - 2)`.
fn second_difference(m: u32, n: u32, l: f64, h: f64) -> Result<f64> {
    let q = check(m, n)?;
    let (mf, nf) = (m as f64, n as f64);
    let hl = h * q.ln();
    let bump = hl.exp_m1() + (-hl).exp_m1();
    Ok((2.0 * h * h / nf - mf * q.powf(l) * bump) / (h * h))
}

fn first_difference(m: u32, n: u32, l: f64, h: f64) -> Result<f64> {
    Ok((appendix_f(m, n, l + h)? - appendix_f(m, n, l - h)?) / (2.0 * h))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AppendixReport {
    pub m: u32,
    pub n: u32,
    pub f_at_0: f64,
    pub f_at_1: f64,
    /// Worst `|f' - centred difference|` over the sampled `l`.
    pub first_derivative_error: f64,
    /// Worst `|f'' - second difference|` over the sampled `l`.
    pub second_derivative_error: f64,
    /// Smallest `f''(l)` over sampled `l >= 1`.
    pub min_curvature_beyond_one: f64,
}

impl AppendixReport {
    pub fn holds(&self, root_tol: f64, derivative_tol: f64) -> bool {
        self.f_at_0.abs() < root_tol
            && self.f_at_1.abs() < root_tol
            && self.first_derivative_error < derivative_tol
            && self.second_derivative_error < derivative_tol
            && self.min_curvature_beyond_one > 0.0
    }
}

/// Samples `l` on `[0, M]` (spacing `1/samples_per_unit`) and compares the
/// closed-form derivatives against centred finite differences of `f` with
/// step `h`.
pub fn check_appendix(m: u32, n: u32, h: f64, samples_per_unit: u32) -> Result<AppendixReport> {
    check(m, n)?;
    let count = m * samples_per_unit.max(1);
    let mut first_err: f64 = 0.0;
    let mut second_err: f64 = 0.0;
    let mut min_curv = f64::INFINITY;
    for i in 0..=count {
        let l = m as f64 * i as f64 / count as f64;
        first_err =
            first_err.max((appendix_f_prime(m, n, l)? - first_difference(m, n, l, h)?).abs());
        let curv = appendix_f_double_prime(m, n, l)?;
        second_err = second_err.max((curv - second_difference(m, n, l, h)?).abs());
        if l >= 1.0 {
            min_curv = min_curv.min(curv);
        }
    }
    Ok(AppendixReport {
        m,
        n,
        f_at_0: appendix_f(m, n, 0.0)?,
        f_at_1: appendix_f(m, n, 1.0)?,
        first_derivative_error: first_err,
        second_derivative_error: second_err,
        min_curvature_beyond_one: min_curv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{max_expected_successes, rerendezvous_expected_successes};

    #[test]
    fn roots_at_zero_and_one() {
        for n in 2..=8 {
            for m in 2..=n {
                assert!(appendix_f(m, n, 0.0).unwrap().abs() < 1e-12);
                assert!(appendix_f(m, n, 1.0).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m3_n4_convexity_and_slope() {
        assert!(appendix_f_prime(3, 4, 1.0).unwrap() > 0.0);
        for l in [1.0, 1.5, 2.0, 3.0] {
            assert!(appendix_f_double_prime(3, 4, l).unwrap() > 0.0);
            let h = 1e-6;
            let fd1 = first_difference(3, 4, l, h).unwrap();
            assert!((fd1 - appendix_f_prime(3, 4, l).unwrap()).abs() < 1e-4);
            let fd2 = second_difference(3, 4, l, h).unwrap();
            assert!((fd2 - appendix_f_double_prime(3, 4, l).unwrap()).abs() < 1e-4);
        }
    }

    #[test]
    fn stable_second_difference_matches_naive_at_coarse_step() {
        let h = 1e-3;
        for l in [0.0, 0.7, 2.5] {
            let naive = (appendix_f(4, 6, l + h).unwrap() - 2.0 * appendix_f(4, 6, l).unwrap()
                + appendix_f(4, 6, l - h).unwrap())
                / (h * h);
            assert!((naive - second_difference(4, 6, l, h).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn gap_factorises_through_f() {
        for n in 2..=8u32 {
            for m in 2..=n {
                let q: f64 = 1.0 - 1.0 / n as f64;
                let y = max_expected_successes(m, n).unwrap();
                for l in 0..m {
                    let gap = rerendezvous_expected_successes(m, n, l).unwrap() - y;
                    let via_f =
                        q.powi(m as i32 - l as i32 - 1) * appendix_f(m, n, l as f64).unwrap();
                    assert!((gap - via_f).abs() < 1e-12, "M={m} N={n} l={l}");
                }
            }
        }
    }

    #[test]
    fn rejects_single_channel() {
        assert!(appendix_f(2, 1, 0.0).is_err());
        assert!(check_appendix(2, 1, 1e-6, 10).is_err());
    }
}
