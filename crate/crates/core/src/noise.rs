//! Bernoulli noise over `F_2` and `F_q`, and the exact k-fold transform laws.
//!
//! `Ber(eta)` is 1 with probability eta. `Ber_q(eta)` returns a uniform
//! element of `F_q` with probability eta and 0 otherwise, so
//! `Pr[0] = (1-eta) + eta/q` and `Pr[x] = eta/q` for each nonzero `x`.
//! The XOR of k independent `Ber(eta)` draws is `Ber(theta_k(eta))` with
//! `theta_k(eta) = (1 - (1-2 eta)^k)/2`, and the `F_q` sum of k independent
//! `Ber_q(eta)` draws is `Ber_q(phi_k(eta))` with `phi_k(eta) = 1 - (1-eta)^k`.

use rand::Rng;

use crate::field::PrimeModulus;
use crate::seeding::TrialRng;
use crate::{Error, Result};

/// One Bernoulli noise distribution over `F_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    modulus: PrimeModulus,
    eta: f64,
}

impl NoiseSpec {
    pub fn new(modulus: PrimeModulus, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(NoiseSpec { modulus, eta })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Probability that one draw is nonzero: eta for q = 2 interpreted as
    /// `Ber`, and `(1 - 1/q) eta` for `Ber_q`.
    pub fn nonzero_prob(&self) -> f64 {
        let q = f64::from(self.modulus.get());
        (1.0 - 1.0 / q) * self.eta
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Parameter(format!("eta must lie in [0,1], got {eta}")));
    }
    Ok(())
}

/// One `Ber(eta)` draw.
pub fn sample_ber(eta: f64, rng: &mut TrialRng) -> Result<bool> {
    check_eta(eta)?;
    Ok(rng.random::<f64>() < eta)
}

/// One `Ber_q(eta)` draw.
pub fn sample_ber_q(spec: &NoiseSpec, rng: &mut TrialRng) -> Result<u32> {
    if rng.random::<f64>() < spec.eta {
        Ok(rng.random_range(0..spec.modulus.get()))
    } else {
        Ok(0)
    }
}

/// Noise rate of the XOR of `k` independent `Ber(eta)` draws.
///
/// Computed as `-expm1(k ln(1-2 eta))/2` for eta <= 1/2, which stays exact
/// down to the low-noise regimes (eta ~ n^-c) where the direct power loses
/// precision.
pub fn theta_k(eta: f64, k: u32) -> f64 {
    assert!((0.0..=1.0).contains(&eta), "eta must lie in [0,1]");
    assert!(k >= 1, "k must be >= 1");
    if k == 1 {
        return eta;
    }
    if eta <= 0.5 {
        -0.5 * f64::exp_m1(f64::from(k) * f64::ln_1p(-2.0 * eta))
    } else {
        0.5 * (1.0 - (1.0 - 2.0 * eta).powi(k as i32))
    }
}

/// Noise rate of the `F_q` sum of `k` independent `Ber_q(eta)` draws.
pub fn phi_k(eta: f64, k: u32) -> f64 {
    assert!((0.0..=1.0).contains(&eta), "eta must lie in [0,1]");
    assert!(k >= 1, "k must be >= 1");
    if k == 1 {
        return eta;
    }
    -f64::exp_m1(f64::from(k) * f64::ln_1p(-eta))
}

/// Fraction of nonzero entries and its binomial standard error.
pub fn estimate_nonzero_rate(samples: &[u32]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::Parameter("empty sample".into()));
    }
    let n = samples.len() as f64;
    let nonzero = samples.iter().filter(|&&s| s != 0).count() as f64;
    let rate = nonzero / n;
    Ok((rate, (rate * (1.0 - rate) / n).sqrt()))
}
