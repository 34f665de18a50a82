//! Small statistics helpers shared by the harnesses: binomial standard
//! errors, chi-square goodness-of-fit p-values, and subset ranking for
//! support histograms.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Standard error `sqrt(p(1-p)/trials)` of an empirical rate.
pub fn binomial_std_err(successes: u64, trials: u64) -> f64 {
    if trials == 0 {
        return 0.0;
    }
    let p = successes as f64 / trials as f64;
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Pearson statistic `sum (obs - exp)^2 / exp`.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Goodness-of-fit p-value with `len - 1` degrees of freedom.
pub fn chi_square_p_value(observed: &[u64], expected: &[f64]) -> Result<f64> {
    if observed.len() != expected.len() {
        return Err(Error::Dimension(format!(
            "observed {} bins, expected {} bins",
            observed.len(),
            expected.len()
        )));
    }
    if observed.len() < 2 {
        return Err(Error::Parameter("chi-square needs at least two bins".into()));
    }
    if expected.iter().any(|&e| e <= 0.0) {
        return Err(Error::Parameter("expected bin counts must be positive".into()));
    }
    let stat = chi_square_statistic(observed, expected);
    let df = (observed.len() - 1) as f64;
    let dist = ChiSquared::new(df).map_err(|e| Error::Parameter(e.to_string()))?;
    Ok(1.0 - dist.cdf(stat))
}

/// `C(n, k)` as u64; `None` on overflow.
pub fn binomial_u64(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// Lexicographic rank of a sorted `k`-subset of `{0..n}` among all
/// `C(n, k)` subsets. Used to bin row supports for uniformity tests.
pub fn subset_rank(sorted_support: &[usize], n: usize) -> u64 {
    let k = sorted_support.len();
    let mut rank = 0u64;
    let mut prev: isize = -1;
    for (i, &s) in sorted_support.iter().enumerate() {
        for j in (prev + 1) as usize..s {
            rank += binomial_u64(n - 1 - j, k - 1 - i).expect("desk-scale subset rank");
        }
        prev = s as isize;
    }
    rank
}
