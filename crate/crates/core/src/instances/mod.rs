//! Sampling, verification, and brute-force decodability analysis for the
//! six LPN variants: dense, exact-sparse, and approximate-sparse challenge
//! rows, each over `F_2` or a prime `F_q`.
//!
//! A sampled instance keeps its ground-truth `(secret, noise)` witness for
//! harness scoring; solver-facing APIs only ever see a [`PublicInstance`].

mod io;

pub use io::{read_instance, write_instance, write_public_instance, ReadInstance};

use rand::Rng;

use crate::field::{FieldMatrix, FieldVec, PrimeModulus};
use crate::seeding::TrialRng;
use crate::{Error, Result};

/// Enumeration guard for the exhaustive decodability oracles.
pub const DESK_SCALE_CANDIDATES: u64 = 1 << 26;

/// Row distribution of the challenge matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparsityMode {
    /// Rows uniform over `F_q^n`.
    Dense,
    /// Rows uniform over weight-`sigma` vectors.
    Exact(usize),
    /// Entries i.i.d. with expected row weight `sigma`.
    Approx(usize),
}

impl SparsityMode {
    pub fn sigma(&self) -> Option<usize> {
        match self {
            SparsityMode::Dense => None,
            SparsityMode::Exact(s) | SparsityMode::Approx(s) => Some(*s),
        }
    }
}

/// Full parameterization `(q, eta, n, m, sparsity)` of one LPN distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    modulus: PrimeModulus,
    eta: f64,
    n: usize,
    m: usize,
    sparsity: SparsityMode,
}

impl VariantSpec {
    pub fn new(
        modulus: PrimeModulus,
        eta: f64,
        n: usize,
        m: usize,
        sparsity: SparsityMode,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Parameter(format!("eta must lie in [0,1], got {eta}")));
        }
        if n == 0 || m == 0 {
            return Err(Error::Parameter(format!("need n >= 1 and m >= 1, got n={n} m={m}")));
        }
        match sparsity {
            SparsityMode::Dense => {}
            SparsityMode::Exact(sigma) => {
                if sigma == 0 || sigma > n {
                    return Err(Error::Parameter(format!(
                        "exact sparsity needs 1 <= sigma <= n, got sigma={sigma} n={n}"
                    )));
                }
            }
            SparsityMode::Approx(sigma) => {
                if sigma == 0 || sigma > n {
                    return Err(Error::Parameter(format!(
                        "approx sparsity needs 1 <= sigma <= n, got sigma={sigma} n={n}"
                    )));
                }
                let q = f64::from(modulus.get());
                let alpha = q * sigma as f64 / ((q - 1.0) * n as f64);
                if modulus.get() > 2 && alpha > 1.0 {
                    return Err(Error::Parameter(format!(
                        "per-entry rate q*sigma/((q-1)n) = {alpha} exceeds 1"
                    )));
                }
            }
        }
        Ok(VariantSpec { modulus, eta, n, m, sparsity })
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn q(&self) -> u32 {
        self.modulus.get()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sparsity(&self) -> SparsityMode {
        self.sparsity
    }

    /// Same distribution with a different sample count.
    pub fn with_m(&self, m: usize) -> Result<Self> {
        VariantSpec::new(self.modulus, self.eta, self.n, m, self.sparsity)
    }

    /// Per-entry probability that a challenge-row coordinate is nonzero
    /// (the `Ber`/`Ber_q` parameter for Approx rows).
    pub(crate) fn row_entry_param(&self) -> Option<f64> {
        match self.sparsity {
            SparsityMode::Approx(sigma) => {
                if self.modulus.is_binary() {
                    Some(sigma as f64 / self.n as f64)
                } else {
                    let q = f64::from(self.modulus.get());
                    Some(q * sigma as f64 / ((q - 1.0) * self.n as f64))
                }
            }
            _ => None,
        }
    }
}

/// Solver-facing view of a sample `(A, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicInstance {
    spec: VariantSpec,
    a: FieldMatrix,
    b: FieldVec,
}

impl PublicInstance {
    pub fn new(spec: VariantSpec, a: FieldMatrix, b: FieldVec) -> Result<Self> {
        check_dims(&spec, &a, &b)?;
        check_exact_rows(&spec, &a)?;
        Ok(PublicInstance { spec, a, b })
    }

    pub fn spec(&self) -> &VariantSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.a
    }

    pub fn b(&self) -> &FieldVec {
        &self.b
    }
}

/// A sample together with its ground-truth secret and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessedInstance {
    spec: VariantSpec,
    a: FieldMatrix,
    b: FieldVec,
    secret: FieldVec,
    noise: FieldVec,
}

impl WitnessedInstance {
    /// Validates dimensions, the Exact row-weight invariant, and the
    /// construction identity `b = A s + e`.
    pub fn new(
        spec: VariantSpec,
        a: FieldMatrix,
        b: FieldVec,
        secret: FieldVec,
        noise: FieldVec,
    ) -> Result<Self> {
        check_dims(&spec, &a, &b)?;
        check_exact_rows(&spec, &a)?;
        if secret.len() != spec.n || secret.modulus() != spec.modulus {
            return Err(Error::Dimension(format!(
                "secret must be a length-{} vector mod {}",
                spec.n,
                spec.q()
            )));
        }
        if noise.len() != spec.m || noise.modulus() != spec.modulus {
            return Err(Error::Dimension(format!(
                "noise must be a length-{} vector mod {}",
                spec.m,
                spec.q()
            )));
        }
        let expected = a.mul_vec(&secret)?.add(&noise)?;
        if expected != b {
            return Err(Error::Parameter("witness identity b = A s + e fails".into()));
        }
        Ok(WitnessedInstance { spec, a, b, secret, noise })
    }

    pub fn spec(&self) -> &VariantSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.a
    }

    pub fn b(&self) -> &FieldVec {
        &self.b
    }

    pub fn secret(&self) -> &FieldVec {
        &self.secret
    }

    pub fn noise(&self) -> &FieldVec {
        &self.noise
    }

    pub fn public(&self) -> PublicInstance {
        PublicInstance { spec: self.spec.clone(), a: self.a.clone(), b: self.b.clone() }
    }
}

fn check_dims(spec: &VariantSpec, a: &FieldMatrix, b: &FieldVec) -> Result<()> {
    if a.modulus() != spec.modulus || b.modulus() != spec.modulus {
        return Err(Error::Dimension("instance modulus mismatch".into()));
    }
    if a.rows() != spec.m || a.cols() != spec.n {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, spec wants {}x{}",
            a.rows(),
            a.cols(),
            spec.m,
            spec.n
        )));
    }
    if b.len() != spec.m {
        return Err(Error::Dimension(format!(
            "b has length {}, spec wants {}",
            b.len(),
            spec.m
        )));
    }
    Ok(())
}

fn check_exact_rows(spec: &VariantSpec, a: &FieldMatrix) -> Result<()> {
    if let SparsityMode::Exact(sigma) = spec.sparsity {
        for r in 0..a.rows() {
            let w = a.row_weight(r);
            if w != sigma {
                return Err(Error::Parameter(format!(
                    "row {r} has weight {w}, exact mode requires {sigma}"
                )));
            }
        }
    }
    Ok(())
}

/// Uniform `k`-subset of `{0..n}` by Floyd's algorithm, returned sorted.
pub(crate) fn floyd_subset(rng: &mut TrialRng, n: usize, k: usize) -> Vec<usize> {
    debug_assert!(k <= n);
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    for j in n - k..n {
        let t = rng.random_range(0..=j);
        if chosen.contains(&t) {
            chosen.push(j);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    chosen
}

fn sample_uniform_vec(modulus: PrimeModulus, len: usize, rng: &mut TrialRng) -> FieldVec {
    if modulus.is_binary() {
        let residues: Vec<u32> = (0..len).map(|_| rng.random_range(0..2u32)).collect();
        FieldVec::new(modulus, &residues).expect("residues in range")
    } else {
        let q = modulus.get();
        let residues: Vec<u32> = (0..len).map(|_| rng.random_range(0..q)).collect();
        FieldVec::new(modulus, &residues).expect("residues in range")
    }
}

fn sample_matrix(spec: &VariantSpec, rng: &mut TrialRng) -> FieldMatrix {
    let q = spec.q();
    let (n, m) = (spec.n, spec.m);
    if spec.modulus.is_binary() {
        let words_per_row = n.div_ceil(64);
        let mut words = vec![0u64; m * words_per_row];
        match spec.sparsity {
            SparsityMode::Dense => {
                let tail = n % 64;
                let mask = if tail == 0 { u64::MAX } else { (1u64 << tail) - 1 };
                for r in 0..m {
                    for w in 0..words_per_row {
                        let mut word = rng.random::<u64>();
                        if w + 1 == words_per_row {
                            word &= mask;
                        }
                        words[r * words_per_row + w] = word;
                    }
                }
            }
            SparsityMode::Exact(sigma) => {
                for r in 0..m {
                    for c in floyd_subset(rng, n, sigma) {
                        words[r * words_per_row + c / 64] |= 1u64 << (c % 64);
                    }
                }
            }
            SparsityMode::Approx(_) => {
                let p = spec.row_entry_param().expect("approx mode");
                for r in 0..m {
                    for c in 0..n {
                        if rng.random::<f64>() < p {
                            words[r * words_per_row + c / 64] |= 1u64 << (c % 64);
                        }
                    }
                }
            }
        }
        FieldMatrix::from_packed_rows(spec.modulus, m, n, words)
    } else {
        let mut entries = vec![0u32; m * n];
        match spec.sparsity {
            SparsityMode::Dense => {
                for e in entries.iter_mut() {
                    *e = rng.random_range(0..q);
                }
            }
            SparsityMode::Exact(sigma) => {
                for r in 0..m {
                    for c in floyd_subset(rng, n, sigma) {
                        entries[r * n + c] = rng.random_range(1..q);
                    }
                }
            }
            SparsityMode::Approx(_) => {
                let alpha = spec.row_entry_param().expect("approx mode");
                for e in entries.iter_mut() {
                    if rng.random::<f64>() < alpha {
                        *e = rng.random_range(0..q);
                    }
                }
            }
        }
        FieldMatrix::from_row_major(spec.modulus, m, n, &entries).expect("entries in range")
    }
}

fn sample_noise(spec: &VariantSpec, rng: &mut TrialRng) -> FieldVec {
    let q = spec.q();
    let residues: Vec<u32> = if spec.modulus.is_binary() {
        (0..spec.m)
            .map(|_| u32::from(rng.random::<f64>() < spec.eta))
            .collect()
    } else {
        (0..spec.m)
            .map(|_| {
                if rng.random::<f64>() < spec.eta {
                    rng.random_range(0..q)
                } else {
                    0
                }
            })
            .collect()
    };
    FieldVec::new(spec.modulus, &residues).expect("residues in range")
}

/// Draw one witnessed instance: uniform secret, rows per the sparsity mode,
/// noise `Ber(eta)` for `q = 2` and `Ber_q(eta)` otherwise, `b = A s + e`.
pub fn sample_instance(spec: &VariantSpec, rng: &mut TrialRng) -> WitnessedInstance {
    let secret = sample_uniform_vec(spec.modulus, spec.n, rng);
    let a = sample_matrix(spec, rng);
    let noise = sample_noise(spec, rng);
    let b = a.mul_vec(&secret).expect("dims").add(&noise).expect("dims");
    WitnessedInstance::new(spec.clone(), a, b, secret, noise)
        .expect("construction satisfies the witness identity")
}

/// Probability that one Approx row coordinate is nonzero; equals `sigma/n`
/// for both the binary and the q-ary samplers.
pub fn nonzero_entry_rate(spec: &VariantSpec) -> Result<f64> {
    match spec.sparsity {
        SparsityMode::Approx(sigma) => Ok(sigma as f64 / spec.n as f64),
        _ => Err(Error::Parameter("nonzero_entry_rate requires Approx mode".into())),
    }
}

/// Hamming-distance acceptance radius of the unique-decoding test.
///
/// Dense: `2 eta m`. Approx over `F_2`: `(eta + c sigma/n) m`. Approx over
/// `F_q`: `((1 - 1/q) eta + c sigma/n) m`. Both with `c = 0.25 - eta`.
/// No radius is defined for Exact mode.
pub fn decode_threshold(spec: &VariantSpec) -> Result<f64> {
    let m = spec.m as f64;
    match spec.sparsity {
        SparsityMode::Dense => Ok(2.0 * spec.eta * m),
        SparsityMode::Approx(sigma) => {
            let c = 0.25 - spec.eta;
            let rate = sigma as f64 / spec.n as f64;
            if spec.modulus.is_binary() {
                Ok((spec.eta + c * rate) * m)
            } else {
                let q = f64::from(spec.q());
                Ok(((1.0 - 1.0 / q) * spec.eta + c * rate) * m)
            }
        }
        SparsityMode::Exact(_) => Err(Error::UnsupportedMode(
            "no decoding threshold is defined for exact-sparse instances".into(),
        )),
    }
}

/// Accept `v` iff `|b - A v|_0 <= decode_threshold(spec)`.
pub fn verify_candidate(inst: &PublicInstance, v: &FieldVec) -> Result<bool> {
    if v.len() != inst.spec.n || v.modulus() != inst.spec.modulus {
        return Err(Error::Dimension(format!(
            "candidate must be a length-{} vector mod {}",
            inst.spec.n,
            inst.spec.q()
        )));
    }
    let threshold = decode_threshold(&inst.spec)?;
    let residual = inst.b.sub(&inst.a.mul_vec(v)?)?;
    Ok(residual.hamming_weight() as f64 <= threshold)
}

/// Number of candidate vectors `q^n`, or `None` past 2^62.
pub(crate) fn total_candidates(q: u32, n: usize) -> Option<u64> {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(u128::from(q))?;
        if acc > (1u128 << 62) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Exhaustively count candidates passing the threshold test, stopping at
/// `stop_after`. Returns the clamped count and the first passer in
/// lexicographic order. `max_candidates` guards the enumeration size.
pub(crate) fn scan_threshold_passers(
    inst: &PublicInstance,
    stop_after: usize,
    max_candidates: u64,
) -> Result<(usize, Option<FieldVec>)> {
    let spec = &inst.spec;
    let total = total_candidates(spec.q(), spec.n)
        .filter(|&t| t <= max_candidates)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "q^n = {}^{} exceeds the enumeration guard {max_candidates}",
                spec.q(),
                spec.n
            ))
        })?;
    let threshold = decode_threshold(spec)?;
    let radius = threshold.floor() as i64;
    if radius < 0 {
        return Ok((0, None));
    }
    let radius = radius as usize;

    // F_2 fast path: rows fit one word each, candidates are word counters.
    if let (true, Some(rows)) = (spec.n <= 63, inst.a.single_word_rows()) {
        let b_words = inst.b.words().expect("binary instance");
        let mut count = 0usize;
        let mut first = None;
        for c in 0..total {
            // Reverse so candidate order is lexicographic over (v_0..v_{n-1}).
            let v = c.reverse_bits() >> (64 - spec.n);
            let mut weight = 0usize;
            for (r, &row) in rows.iter().enumerate() {
                let bit = (row & v).count_ones() & 1;
                let b_bit = ((b_words[r / 64] >> (r % 64)) & 1) as u32;
                weight += (bit ^ b_bit) as usize;
                if weight > radius {
                    break;
                }
            }
            if weight <= radius {
                if first.is_none() {
                    let residues: Vec<u32> =
                        (0..spec.n).map(|i| ((v >> i) & 1) as u32).collect();
                    first = Some(FieldVec::new(spec.modulus, &residues)?);
                }
                count += 1;
                if count >= stop_after {
                    return Ok((count, first));
                }
            }
        }
        return Ok((count, first));
    }

    // Generic path: lexicographic odometer over residue vectors.
    let q = spec.q();
    let mut digits = vec![0u32; spec.n];
    let mut count = 0usize;
    let mut first = None;
    loop {
        let v = FieldVec::new(spec.modulus, &digits)?;
        let mut weight = 0usize;
        for r in 0..spec.m {
            let dot = crate::field::inner_product(&inst.a.row(r), &v)?;
            if dot != inst.b.get(r) {
                weight += 1;
                if weight > radius {
                    break;
                }
            }
        }
        if weight <= radius {
            if first.is_none() {
                first = Some(v);
            }
            count += 1;
            if count >= stop_after {
                return Ok((count, first));
            }
        }
        // Lexicographic successor: bump the rightmost digit.
        let mut pos = spec.n;
        while pos > 0 {
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < q {
                break;
            }
            digits[pos] = 0;
            if pos == 0 {
                return Ok((count, first));
            }
        }
    }
}

/// True iff exactly one vector passes the threshold test and it is the
/// witness secret. Guarded by `q^n <= 2^26`.
pub fn is_uniquely_decodable(inst: &WitnessedInstance) -> Result<bool> {
    let public = inst.public();
    let (count, first) = scan_threshold_passers(&public, 2, DESK_SCALE_CANDIDATES)?;
    Ok(count == 1 && first.as_ref() == Some(&inst.secret))
}

/// True iff some vector other than the witness secret passes the threshold
/// test. Guarded by `q^n <= 2^26`.
pub fn wrong_passer_exists(inst: &WitnessedInstance) -> Result<bool> {
    let public = inst.public();
    let (count, first) = scan_threshold_passers(&public, 2, DESK_SCALE_CANDIDATES)?;
    Ok(count >= 2 || (count == 1 && first.as_ref() != Some(&inst.secret)))
}

/// Minimum Hamming weight of a nonzero codeword of the code generated by
/// `A` (columns as generators). Guarded by `q^n <= 2^26`.
pub fn min_code_distance(a: &FieldMatrix) -> Result<usize> {
    let q = a.modulus().get();
    let n = a.cols();
    let total = total_candidates(q, n)
        .filter(|&t| t <= DESK_SCALE_CANDIDATES)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "q^n = {q}^{n} exceeds the enumeration guard {DESK_SCALE_CANDIDATES}"
            ))
        })?;

    let mut best = a.rows() + 1;
    if let (true, Some(rows)) = (n <= 63, a.single_word_rows()) {
        for c in 1..total {
            let v = c.reverse_bits() >> (64 - n);
            let mut weight = 0usize;
            for &row in rows {
                weight += ((row & v).count_ones() & 1) as usize;
                if weight >= best {
                    break;
                }
            }
            best = best.min(weight);
            if best == 0 {
                break;
            }
        }
    } else {
        let modulus = a.modulus();
        let mut digits = vec![0u32; n];
        'outer: loop {
            let mut pos = n;
            loop {
                if pos == 0 {
                    break 'outer;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < q {
                    break;
                }
                digits[pos] = 0;
            }
            let v = FieldVec::new(modulus, &digits)?;
            let weight = a.mul_vec(&v)?.hamming_weight();
            best = best.min(weight);
            if best == 0 {
                break;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::trial_rng;
    use crate::stats::{binomial_u64, chi_square_p_value, subset_rank};

    fn modulus(q: u32) -> PrimeModulus {
        PrimeModulus::new(q).unwrap()
    }

    fn spec(q: u32, eta: f64, n: usize, m: usize, sparsity: SparsityMode) -> VariantSpec {
        VariantSpec::new(modulus(q), eta, n, m, sparsity).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(VariantSpec::new(modulus(2), -0.1, 4, 4, SparsityMode::Dense).is_err());
        assert!(VariantSpec::new(modulus(2), 0.1, 0, 4, SparsityMode::Dense).is_err());
        assert!(VariantSpec::new(modulus(2), 0.1, 4, 4, SparsityMode::Exact(5)).is_err());
        assert!(VariantSpec::new(modulus(2), 0.1, 4, 4, SparsityMode::Approx(0)).is_err());
        // q=3, sigma=5, n=6: alpha = 3*5/(2*6) = 1.25 > 1.
        assert!(VariantSpec::new(modulus(3), 0.1, 6, 4, SparsityMode::Approx(5)).is_err());
        assert!(VariantSpec::new(modulus(3), 0.1, 6, 4, SparsityMode::Approx(4)).is_ok());
    }

    #[test]
    fn noiseless_instances_are_exact() {
        let mut rng = trial_rng(31, 0);
        for s in [
            spec(2, 0.0, 6, 20, SparsityMode::Dense),
            spec(5, 0.0, 6, 20, SparsityMode::Exact(2)),
            spec(3, 0.0, 6, 20, SparsityMode::Approx(2)),
        ] {
            let inst = sample_instance(&s, &mut rng);
            assert_eq!(inst.noise().hamming_weight(), 0);
            assert_eq!(&inst.matrix().mul_vec(inst.secret()).unwrap(), inst.b());
        }
    }

    #[test]
    fn exact_rows_have_exact_weight() {
        let mut rng = trial_rng(31, 1);
        let s = spec(2, 0.1, 9, 10_000, SparsityMode::Exact(3));
        let inst = sample_instance(&s, &mut rng);
        for r in 0..s.m() {
            assert_eq!(inst.matrix().row_weight(r), 3);
        }
        let s = spec(7, 0.1, 9, 2_000, SparsityMode::Exact(4));
        let inst = sample_instance(&s, &mut rng);
        for r in 0..s.m() {
            assert_eq!(inst.matrix().row_weight(r), 4);
        }
    }

    #[test]
    fn approx_mean_row_weight_matches_sigma() {
        let mut rng = trial_rng(31, 2);
        let s = spec(2, 0.1, 12, 100_000, SparsityMode::Approx(3));
        let inst = sample_instance(&s, &mut rng);
        let total: usize = (0..s.m()).map(|r| inst.matrix().row_weight(r)).sum();
        let mean = total as f64 / s.m() as f64;
        // Per-row weight is Bin(12, 1/4): sd = sqrt(12 * 3/16) = 1.5.
        let se = 1.5 / (s.m() as f64).sqrt();
        assert!((mean - 3.0).abs() < 4.0 * se, "mean {mean}");
    }

    #[test]
    fn approx_entry_rate_matches_sigma_over_n_for_qary() {
        let mut rng = trial_rng(31, 3);
        let s = spec(3, 0.1, 6, 60_000, SparsityMode::Approx(2));
        assert_eq!(nonzero_entry_rate(&s).unwrap(), 2.0 / 6.0);
        let inst = sample_instance(&s, &mut rng);
        let total: usize = (0..s.m()).map(|r| inst.matrix().row_weight(r)).sum();
        let cells = (s.m() * s.n()) as f64;
        let rate = total as f64 / cells;
        let expect = 1.0 / 3.0;
        let se = (expect * (1.0 - expect) / cells).sqrt();
        assert!((rate - expect).abs() < 4.0 * se, "rate {rate}");

        assert!(nonzero_entry_rate(&spec(2, 0.1, 4, 4, SparsityMode::Dense)).is_err());
    }

    #[test]
    fn exact_supports_and_values_are_uniform() {
        // Supports uniform over C(6,2)=15 subsets; values uniform over F_5 \ {0}.
        let mut rng = trial_rng(31, 4);
        let s = spec(5, 0.0, 6, 100_000, SparsityMode::Exact(2));
        let inst = sample_instance(&s, &mut rng);
        let bins = binomial_u64(6, 2).unwrap() as usize;
        let mut support_counts = vec![0u64; bins];
        let mut value_counts = vec![0u64; 4];
        for r in 0..s.m() {
            let mut support = Vec::new();
            for c in 0..s.n() {
                let e = inst.matrix().get(r, c);
                if e != 0 {
                    support.push(c);
                    value_counts[(e - 1) as usize] += 1;
                }
            }
            support_counts[subset_rank(&support, 6) as usize] += 1;
        }
        let expected = vec![s.m() as f64 / bins as f64; bins];
        let p = chi_square_p_value(&support_counts, &expected).unwrap();
        assert!(p >= 1e-4, "support uniformity p = {p}");
        let total_values: u64 = value_counts.iter().sum();
        let expected = vec![total_values as f64 / 4.0; 4];
        let p = chi_square_p_value(&value_counts, &expected).unwrap();
        assert!(p >= 1e-4, "value uniformity p = {p}");
    }

    #[test]
    fn decode_threshold_formulas() {
        let dense = spec(2, 0.05, 10, 100, SparsityMode::Dense);
        assert!((decode_threshold(&dense).unwrap() - 10.0).abs() < 1e-12);

        let approx = spec(2, 0.05, 16, 1000, SparsityMode::Approx(4));
        assert!((decode_threshold(&approx).unwrap() - 100.0).abs() < 1e-12);

        let noiseless = spec(2, 0.0, 10, 100, SparsityMode::Dense);
        assert_eq!(decode_threshold(&noiseless).unwrap(), 0.0);

        let exact = spec(2, 0.05, 10, 100, SparsityMode::Exact(3));
        assert!(matches!(decode_threshold(&exact), Err(Error::UnsupportedMode(_))));
    }

    #[test]
    fn verify_candidate_accepts_secret_and_rejects_at_zero_threshold() {
        let mut rng = trial_rng(31, 5);
        let s = spec(2, 0.0, 8, 40, SparsityMode::Dense);
        for _ in 0..50 {
            let inst = sample_instance(&s, &mut rng);
            let public = inst.public();
            assert!(verify_candidate(&public, inst.secret()).unwrap());
            // Flip one secret coordinate; with a zero threshold any difference
            // in A v shows up, and a random 40x8 binary A has full column rank
            // almost surely, so equality of images forces equality of inputs.
            let mut other = inst.secret().to_residues();
            other[0] ^= 1;
            let other = FieldVec::new(modulus(2), &other).unwrap();
            let image_dist = inst
                .b()
                .sub(&inst.matrix().mul_vec(&other).unwrap())
                .unwrap()
                .hamming_weight();
            if image_dist > 0 {
                assert!(!verify_candidate(&public, &other).unwrap());
            }
        }
    }

    #[test]
    fn unique_decoding_on_clean_full_rank_instances() {
        let mut rng = trial_rng(31, 6);
        let s = spec(2, 0.0, 8, 40, SparsityMode::Dense);
        let mut decodable = 0;
        for _ in 0..20 {
            let inst = sample_instance(&s, &mut rng);
            if is_uniquely_decodable(&inst).unwrap() {
                decodable += 1;
                assert!(!wrong_passer_exists(&inst).unwrap());
            }
        }
        assert!(decodable >= 19, "noiseless instances should decode: {decodable}/20");
    }

    #[test]
    fn degenerate_single_cell_instance_is_ambiguous() {
        // n=1, m=1, A=[0]: every candidate ties, so never uniquely decodable.
        let s = spec(3, 0.5, 1, 1, SparsityMode::Dense);
        let a = FieldMatrix::zeros(modulus(3), 1, 1);
        let b = FieldVec::new(modulus(3), &[0]).unwrap();
        let secret = FieldVec::new(modulus(3), &[2]).unwrap();
        let noise = FieldVec::new(modulus(3), &[0]).unwrap();
        // b - A s = 0 = e, identity holds with weight 0 <= 2*0.5*1.
        let inst = WitnessedInstance::new(s, a, b, secret, noise).unwrap();
        assert!(!is_uniquely_decodable(&inst).unwrap());
    }

    #[test]
    fn capacity_guard_fires() {
        let s = spec(2, 0.05, 30, 10, SparsityMode::Dense);
        let mut rng = trial_rng(31, 7);
        let inst = sample_instance(&s, &mut rng);
        assert!(matches!(is_uniquely_decodable(&inst), Err(Error::Capacity(_))));
    }

    #[test]
    fn min_distance_examples() {
        let id = FieldMatrix::identity(modulus(2), 4);
        assert_eq!(min_code_distance(&id).unwrap(), 1);

        let repetition = FieldMatrix::from_row_major(modulus(3), 5, 1, &[1; 5]).unwrap();
        assert_eq!(min_code_distance(&repetition).unwrap(), 5);
    }

    #[test]
    fn min_distance_matches_generic_path() {
        let mut rng = trial_rng(31, 8);
        // Same matrices walked through the packed and the generic enumeration.
        for _ in 0..10 {
            let s = spec(2, 0.1, 6, 14, SparsityMode::Dense);
            let inst = sample_instance(&s, &mut rng);
            let packed = min_code_distance(inst.matrix()).unwrap();
            let mut naive = usize::MAX;
            for c in 1u64..(1 << 6) {
                let residues: Vec<u32> = (0..6).map(|i| ((c >> i) & 1) as u32).collect();
                let v = FieldVec::new(modulus(2), &residues).unwrap();
                naive = naive.min(inst.matrix().mul_vec(&v).unwrap().hamming_weight());
            }
            assert_eq!(packed, naive);
        }
    }

    #[test]
    fn witness_identity_is_checked() {
        let s = spec(2, 0.5, 2, 2, SparsityMode::Dense);
        let a = FieldMatrix::identity(modulus(2), 2);
        let b = FieldVec::new(modulus(2), &[1, 1]).unwrap();
        let secret = FieldVec::new(modulus(2), &[1, 0]).unwrap();
        let noise = FieldVec::zeros(modulus(2), 2);
        // b != A s + e.
        assert!(WitnessedInstance::new(s, a, b, secret, noise).is_err());
    }
}
