//! Exact arithmetic over prime fields `F_q`.
//!
//! Vectors and matrices over `F_2` are bit-packed into 64-bit words,
//! least-significant-bit first within each word, and all `F_2` inner
//! products go through `popcount`. For `q > 2` entries are stored as
//! 32-bit residues. Higher-level modules never see the packing.

use crate::{Error, Result};

/// A checked prime modulus `q` with `2 <= q <= 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus(u32);

impl PrimeModulus {
    pub fn new(q: u32) -> Result<Self> {
        if q < 2 || u64::from(q) > (1u64 << 31) {
            return Err(Error::Parameter(format!(
                "modulus must satisfy 2 <= q <= 2^31, got {q}"
            )));
        }
        if !is_prime(q) {
            return Err(Error::Parameter(format!("modulus {q} is not prime")));
        }
        Ok(PrimeModulus(q))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_binary(self) -> bool {
        self.0 == 2
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        ((u64::from(a) + u64::from(b)) % u64::from(self.0)) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        ((u64::from(a) + u64::from(self.0) - u64::from(b)) % u64::from(self.0)) as u32
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((u64::from(a) * u64::from(b)) % u64::from(self.0)) as u32
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    pub fn pow(self, mut base: u32, mut exp: u64) -> u32 {
        let mut acc = 1u32;
        base %= self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat; `a` must be nonzero.
    pub fn inv(self, a: u32) -> u32 {
        debug_assert!(a % self.0 != 0, "inverse of zero");
        self.pow(a, u64::from(self.0) - 2)
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    if q % 2 == 0 {
        return q == 2;
    }
    let mut d = 3u64;
    let q64 = u64::from(q);
    while d * d <= q64 {
        if q64 % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum VecStorage {
    /// q = 2, LSB-first bits; trailing bits of the last word are zero.
    Packed(Vec<u64>),
    /// q > 2, residues in `[0, q)`.
    Dense(Vec<u32>),
}

/// A vector over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldVec {
    modulus: PrimeModulus,
    len: usize,
    storage: VecStorage,
}

impl FieldVec {
    pub fn new(modulus: PrimeModulus, residues: &[u32]) -> Result<Self> {
        let q = modulus.get();
        if let Some(&bad) = residues.iter().find(|&&r| r >= q) {
            return Err(Error::Parameter(format!(
                "residue {bad} out of range for modulus {q}"
            )));
        }
        let len = residues.len();
        let storage = if modulus.is_binary() {
            let mut words = vec![0u64; words_for(len)];
            for (i, &r) in residues.iter().enumerate() {
                if r != 0 {
                    words[i / 64] |= 1u64 << (i % 64);
                }
            }
            VecStorage::Packed(words)
        } else {
            VecStorage::Dense(residues.to_vec())
        };
        Ok(FieldVec { modulus, len, storage })
    }

    pub fn zeros(modulus: PrimeModulus, len: usize) -> Self {
        let storage = if modulus.is_binary() {
            VecStorage::Packed(vec![0u64; words_for(len)])
        } else {
            VecStorage::Dense(vec![0u32; len])
        };
        FieldVec { modulus, len, storage }
    }

    /// Build a binary vector directly from packed words (trailing bits must be zero).
    pub(crate) fn from_words(modulus: PrimeModulus, len: usize, words: Vec<u64>) -> Self {
        debug_assert!(modulus.is_binary());
        debug_assert_eq!(words.len(), words_for(len));
        debug_assert!(len % 64 == 0 || words.last().map_or(true, |w| w >> (len % 64) == 0));
        FieldVec { modulus, len, storage: VecStorage::Packed(words) }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        assert!(i < self.len, "index {i} out of bounds for length {}", self.len);
        match &self.storage {
            VecStorage::Packed(words) => ((words[i / 64] >> (i % 64)) & 1) as u32,
            VecStorage::Dense(v) => v[i],
        }
    }

    pub fn to_residues(&self) -> Vec<u32> {
        match &self.storage {
            VecStorage::Packed(_) => (0..self.len).map(|i| self.get(i)).collect(),
            VecStorage::Dense(v) => v.clone(),
        }
    }

    /// Packed words when `q = 2`.
    pub(crate) fn words(&self) -> Option<&[u64]> {
        match &self.storage {
            VecStorage::Packed(words) => Some(words),
            VecStorage::Dense(_) => None,
        }
    }

    /// Number of nonzero entries.
    pub fn hamming_weight(&self) -> usize {
        match &self.storage {
            VecStorage::Packed(words) => words.iter().map(|w| w.count_ones() as usize).sum(),
            VecStorage::Dense(v) => v.iter().filter(|&&r| r != 0).count(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::Dimension(format!(
                "modulus mismatch: {} vs {}",
                self.modulus.get(),
                other.modulus.get()
            )));
        }
        if self.len != other.len {
            return Err(Error::Dimension(format!(
                "length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let storage = match (&self.storage, &other.storage) {
            (VecStorage::Packed(a), VecStorage::Packed(b)) => {
                VecStorage::Packed(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
            }
            (VecStorage::Dense(a), VecStorage::Dense(b)) => VecStorage::Dense(
                a.iter().zip(b).map(|(&x, &y)| self.modulus.add(x, y)).collect(),
            ),
            _ => unreachable!("storage variant is determined by the modulus"),
        };
        Ok(FieldVec { modulus: self.modulus, len: self.len, storage })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let storage = match (&self.storage, &other.storage) {
            (VecStorage::Packed(a), VecStorage::Packed(b)) => {
                VecStorage::Packed(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
            }
            (VecStorage::Dense(a), VecStorage::Dense(b)) => VecStorage::Dense(
                a.iter().zip(b).map(|(&x, &y)| self.modulus.sub(x, y)).collect(),
            ),
            _ => unreachable!("storage variant is determined by the modulus"),
        };
        Ok(FieldVec { modulus: self.modulus, len: self.len, storage })
    }

    /// Concatenation of `parts` (all sharing one modulus).
    pub fn concat(parts: &[FieldVec]) -> Result<FieldVec> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Parameter("concat of zero vectors".into()))?;
        let modulus = first.modulus;
        if parts.iter().any(|p| p.modulus != modulus) {
            return Err(Error::Dimension("modulus mismatch in concat".into()));
        }
        let mut residues = Vec::with_capacity(parts.iter().map(|p| p.len).sum());
        for p in parts {
            residues.extend(p.to_residues());
        }
        FieldVec::new(modulus, &residues)
    }
}

/// `<a, v> = sum_i a_i v_i mod q`.
pub fn inner_product(a: &FieldVec, v: &FieldVec) -> Result<u32> {
    a.check_same_shape(v)?;
    match (&a.storage, &v.storage) {
        (VecStorage::Packed(x), VecStorage::Packed(y)) => {
            let ones: u32 = x.iter().zip(y).map(|(w, u)| (w & u).count_ones()).sum();
            Ok(ones & 1)
        }
        (VecStorage::Dense(x), VecStorage::Dense(y)) => {
            let q = u64::from(a.modulus.get());
            let mut acc = 0u64;
            for (&xi, &yi) in x.iter().zip(y) {
                acc = (acc + u64::from(xi) * u64::from(yi)) % q;
            }
            Ok(acc as u32)
        }
        _ => unreachable!("storage variant is determined by the modulus"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum MatStorage {
    /// q = 2: rows bit-packed, row `r` in `words[r*wpr..(r+1)*wpr]`.
    Packed { words_per_row: usize, words: Vec<u64> },
    /// q > 2: row-major residues.
    Dense(Vec<u32>),
}

/// An `m x n` matrix over `F_q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    modulus: PrimeModulus,
    rows: usize,
    cols: usize,
    storage: MatStorage,
}

impl FieldMatrix {
    pub fn from_row_major(
        modulus: PrimeModulus,
        rows: usize,
        cols: usize,
        entries: &[u32],
    ) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {rows}x{cols}={} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let q = modulus.get();
        if let Some(&bad) = entries.iter().find(|&&r| r >= q) {
            return Err(Error::Parameter(format!(
                "residue {bad} out of range for modulus {q}"
            )));
        }
        let storage = if modulus.is_binary() {
            let wpr = words_for(cols);
            let mut words = vec![0u64; rows * wpr];
            for r in 0..rows {
                for c in 0..cols {
                    if entries[r * cols + c] != 0 {
                        words[r * wpr + c / 64] |= 1u64 << (c % 64);
                    }
                }
            }
            MatStorage::Packed { words_per_row: wpr, words }
        } else {
            MatStorage::Dense(entries.to_vec())
        };
        Ok(FieldMatrix { modulus, rows, cols, storage })
    }

    pub fn from_rows(rows: &[FieldVec]) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| Error::Parameter("matrix needs at least one row".into()))?;
        let modulus = first.modulus();
        let cols = first.len();
        for row in rows {
            if row.modulus() != modulus {
                return Err(Error::Dimension("modulus mismatch among rows".into()));
            }
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row length mismatch: {} vs {}",
                    row.len(),
                    cols
                )));
            }
        }
        if modulus.is_binary() {
            let wpr = words_for(cols);
            let mut words = Vec::with_capacity(rows.len() * wpr);
            for row in rows {
                words.extend_from_slice(row.words().expect("binary row is packed"));
            }
            Ok(FieldMatrix {
                modulus,
                rows: rows.len(),
                cols,
                storage: MatStorage::Packed { words_per_row: wpr, words },
            })
        } else {
            let mut entries = Vec::with_capacity(rows.len() * cols);
            for row in rows {
                entries.extend(row.to_residues());
            }
            FieldMatrix::from_row_major(modulus, rows.len(), cols, &entries)
        }
    }

    /// Build a binary matrix directly from packed row words.
    pub(crate) fn from_packed_rows(
        modulus: PrimeModulus,
        rows: usize,
        cols: usize,
        words: Vec<u64>,
    ) -> Self {
        debug_assert!(modulus.is_binary());
        let wpr = words_for(cols);
        debug_assert_eq!(words.len(), rows * wpr);
        FieldMatrix { modulus, rows, cols, storage: MatStorage::Packed { words_per_row: wpr, words } }
    }

    pub fn zeros(modulus: PrimeModulus, rows: usize, cols: usize) -> Self {
        let storage = if modulus.is_binary() {
            MatStorage::Packed { words_per_row: words_for(cols), words: vec![0u64; rows * words_for(cols)] }
        } else {
            MatStorage::Dense(vec![0u32; rows * cols])
        };
        FieldMatrix { modulus, rows, cols, storage }
    }

    pub fn identity(modulus: PrimeModulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    fn set(&mut self, r: usize, c: usize, value: u32) {
        debug_assert!(value < self.modulus.get());
        match &mut self.storage {
            MatStorage::Packed { words_per_row, words } => {
                let w = &mut words[r * *words_per_row + c / 64];
                if value != 0 {
                    *w |= 1u64 << (c % 64);
                } else {
                    *w &= !(1u64 << (c % 64));
                }
            }
            MatStorage::Dense(entries) => entries[r * self.cols + c] = value,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        match &self.storage {
            MatStorage::Packed { words_per_row, words } => {
                ((words[r * words_per_row + c / 64] >> (c % 64)) & 1) as u32
            }
            MatStorage::Dense(entries) => entries[r * self.cols + c],
        }
    }

    pub fn row(&self, r: usize) -> FieldVec {
        assert!(r < self.rows, "row {r} out of bounds");
        match &self.storage {
            MatStorage::Packed { words_per_row, words } => FieldVec::from_words(
                self.modulus,
                self.cols,
                words[r * words_per_row..(r + 1) * words_per_row].to_vec(),
            ),
            MatStorage::Dense(entries) => FieldVec {
                modulus: self.modulus,
                len: self.cols,
                storage: VecStorage::Dense(entries[r * self.cols..(r + 1) * self.cols].to_vec()),
            },
        }
    }

    /// Packed words of row `r` when `q = 2`.
    pub(crate) fn row_words(&self, r: usize) -> Option<&[u64]> {
        match &self.storage {
            MatStorage::Packed { words_per_row, words } => {
                Some(&words[r * words_per_row..(r + 1) * words_per_row])
            }
            MatStorage::Dense(_) => None,
        }
    }

    /// All rows as single words when `q = 2` and `cols <= 64`.
    pub(crate) fn single_word_rows(&self) -> Option<&[u64]> {
        match &self.storage {
            MatStorage::Packed { words_per_row: 1, words } => Some(words),
            _ => None,
        }
    }

    /// `A v`, a length-`rows` vector of row inner products.
    pub fn mul_vec(&self, v: &FieldVec) -> Result<FieldVec> {
        if self.modulus != v.modulus() {
            return Err(Error::Dimension(format!(
                "modulus mismatch: {} vs {}",
                self.modulus.get(),
                v.modulus().get()
            )));
        }
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "matrix has {} cols, vector has length {}",
                self.cols,
                v.len()
            )));
        }
        match (&self.storage, &v.storage) {
            (MatStorage::Packed { words_per_row, words }, VecStorage::Packed(vw)) => {
                let mut out = vec![0u64; words_for(self.rows)];
                for r in 0..self.rows {
                    let row = &words[r * words_per_row..(r + 1) * words_per_row];
                    let ones: u32 = row.iter().zip(vw).map(|(a, b)| (a & b).count_ones()).sum();
                    if ones & 1 == 1 {
                        out[r / 64] |= 1u64 << (r % 64);
                    }
                }
                Ok(FieldVec::from_words(self.modulus, self.rows, out))
            }
            (MatStorage::Dense(entries), VecStorage::Dense(x)) => {
                let q = u64::from(self.modulus.get());
                let mut out = Vec::with_capacity(self.rows);
                for r in 0..self.rows {
                    let mut acc = 0u64;
                    for (e, &xi) in entries[r * self.cols..(r + 1) * self.cols].iter().zip(x) {
                        acc = (acc + u64::from(*e) * u64::from(xi)) % q;
                    }
                    out.push(acc as u32);
                }
                Ok(FieldVec { modulus: self.modulus, len: self.rows, storage: VecStorage::Dense(out) })
            }
            _ => unreachable!("storage variant is determined by the modulus"),
        }
    }

    /// Column-wise concatenation `(A_1 A_2 ... A_k)`.
    pub fn hconcat(blocks: &[FieldMatrix]) -> Result<FieldMatrix> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Parameter("hconcat of zero blocks".into()))?;
        let modulus = first.modulus;
        let rows = first.rows;
        for b in blocks {
            if b.modulus != modulus {
                return Err(Error::Dimension("modulus mismatch among blocks".into()));
            }
            if b.rows != rows {
                return Err(Error::Dimension(format!(
                    "row count mismatch: {} vs {}",
                    b.rows, rows
                )));
            }
        }
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        if modulus.is_binary() {
            let wpr = words_for(cols);
            let mut words = vec![0u64; rows * wpr];
            for r in 0..rows {
                let mut offset = 0usize;
                for b in blocks {
                    let src = b.row_words(r).expect("binary block is packed");
                    copy_bits(src, b.cols, &mut words[r * wpr..(r + 1) * wpr], offset);
                    offset += b.cols;
                }
            }
            Ok(FieldMatrix { modulus, rows, cols, storage: MatStorage::Packed { words_per_row: wpr, words } })
        } else {
            let mut entries = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for b in blocks {
                    match &b.storage {
                        MatStorage::Dense(e) => {
                            entries.extend_from_slice(&e[r * b.cols..(r + 1) * b.cols])
                        }
                        MatStorage::Packed { .. } => unreachable!(),
                    }
                }
            }
            FieldMatrix::from_row_major(modulus, rows, cols, &entries)
        }
    }

    /// The submatrix made of columns `[start, start+len)`.
    pub fn col_slice(&self, start: usize, len: usize) -> Result<FieldMatrix> {
        if start + len > self.cols {
            return Err(Error::Dimension(format!(
                "column slice [{start}, {}) out of bounds for {} cols",
                start + len,
                self.cols
            )));
        }
        let mut out = FieldMatrix::zeros(self.modulus, self.rows, len);
        for r in 0..self.rows {
            for c in 0..len {
                out.set(r, c, self.get(r, start + c));
            }
        }
        Ok(out)
    }

    /// The submatrix made of the given rows, in the given order.
    pub fn row_submatrix(&self, indices: &[usize]) -> Result<FieldMatrix> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.rows) {
            return Err(Error::Dimension(format!(
                "row index {bad} out of bounds for {} rows",
                self.rows
            )));
        }
        match &self.storage {
            MatStorage::Packed { words_per_row, words } => {
                let mut out = Vec::with_capacity(indices.len() * words_per_row);
                for &i in indices {
                    out.extend_from_slice(&words[i * words_per_row..(i + 1) * words_per_row]);
                }
                Ok(FieldMatrix {
                    modulus: self.modulus,
                    rows: indices.len(),
                    cols: self.cols,
                    storage: MatStorage::Packed { words_per_row: *words_per_row, words: out },
                })
            }
            MatStorage::Dense(entries) => {
                let mut out = Vec::with_capacity(indices.len() * self.cols);
                for &i in indices {
                    out.extend_from_slice(&entries[i * self.cols..(i + 1) * self.cols]);
                }
                FieldMatrix::from_row_major(self.modulus, indices.len(), self.cols, &out)
            }
        }
    }

    /// Hamming weight of row `r`.
    pub fn row_weight(&self, r: usize) -> usize {
        match &self.storage {
            MatStorage::Packed { words_per_row, words } => words
                [r * words_per_row..(r + 1) * words_per_row]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum(),
            MatStorage::Dense(entries) => entries[r * self.cols..(r + 1) * self.cols]
                .iter()
                .filter(|&&e| e != 0)
                .count(),
        }
    }
}

/// Copy `len` bits from `src` into `dst` starting at bit `offset` of `dst`.
fn copy_bits(src: &[u64], len: usize, dst: &mut [u64], offset: usize) {
    for i in 0..len {
        if (src[i / 64] >> (i % 64)) & 1 == 1 {
            let j = offset + i;
            dst[j / 64] |= 1u64 << (j % 64);
        }
    }
}

/// Result of exact elimination on `A v = b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GaussOutcome {
    UniqueSolution(FieldVec),
    Underdetermined,
    Inconsistent,
}

/// Exact `F_q` elimination with deterministic pivoting: each pivot is the
/// lowest-index remaining row with a nonzero entry in the pivot column.
/// `UniqueSolution` iff the system is consistent and has full column rank.
pub fn gauss_solve(a: &FieldMatrix, b: &FieldVec) -> Result<GaussOutcome> {
    if a.modulus() != b.modulus() {
        return Err(Error::Dimension("modulus mismatch between A and b".into()));
    }
    if a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "A has {} rows but b has length {}",
            a.rows(),
            b.len()
        )));
    }
    if a.rows() == 0 {
        return Err(Error::Parameter("gauss_solve needs at least one row".into()));
    }
    let q = a.modulus();
    let m = a.rows();
    let n = a.cols();

    // Working copy, augmented with b as column n.
    let mut work: Vec<Vec<u32>> = (0..m)
        .map(|r| {
            let mut row: Vec<u32> = (0..n).map(|c| a.get(r, c)).collect();
            row.push(b.get(r));
            row
        })
        .collect();

    let mut pivot_cols = Vec::with_capacity(n.min(m));
    let mut rank = 0usize;
    for col in 0..n {
        let Some(pivot) = (rank..m).find(|&r| work[r][col] != 0) else {
            continue;
        };
        work.swap(rank, pivot);
        let inv = q.inv(work[rank][col]);
        for c in col..=n {
            work[rank][c] = q.mul(work[rank][c], inv);
        }
        for r in 0..m {
            if r != rank && work[r][col] != 0 {
                let factor = work[r][col];
                for c in col..=n {
                    let sub = q.mul(factor, work[rank][c]);
                    work[r][c] = q.sub(work[r][c], sub);
                }
            }
        }
        pivot_cols.push(col);
        rank += 1;
        if rank == m {
            break;
        }
    }

    // Rows below the rank are all-zero in A; a nonzero b there means no solution.
    if work[rank..].iter().any(|row| row[n] != 0) {
        return Ok(GaussOutcome::Inconsistent);
    }
    if rank < n {
        return Ok(GaussOutcome::Underdetermined);
    }
    let mut solution = vec![0u32; n];
    for (r, &col) in pivot_cols.iter().enumerate() {
        solution[col] = work[r][n];
    }
    Ok(GaussOutcome::UniqueSolution(FieldVec::new(q, &solution)?))
}
